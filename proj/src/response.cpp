#include "sls/response.hpp"

namespace sls {

SystemResponse::SystemResponse(FirResponse phi_x, FirResponse phi_u)
    : phi_x_(std::move(phi_x)), phi_u_(std::move(phi_u)) {
    const int n = phi_x_.out_dim();
    require(phi_x_.in_dim() == n, "SystemResponse: Phi_x must be square");
    require(phi_u_.in_dim() == n, "SystemResponse: Phi_u input dimension must be n");
    require(phi_x_.num_taps() == phi_u_.num_taps(),
            "SystemResponse: Phi_x and Phi_u must share the FIR horizon");
    require(phi_x_.num_taps() >= 1, "SystemResponse: at least one tap required");
    require((phi_x_.tap(1) - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-9,
            "SystemResponse: Phi_x z^{-1} coefficient must be the identity");
}

FirResponse SystemResponse::weighted(const CostOutput& cost) const {
    require(cost.C.cols() == num_states(), "weighted: C column count must be n");
    require(cost.D.cols() == num_inputs(), "weighted: D column count must be p");
    FirResponse q(cost.num_outputs(), num_states());
    for (int k = 1; k <= fir_horizon(); ++k)
        q.push_tap(cost.C * phi_x_.tap(k) + cost.D * phi_u_.tap(k));
    return q;
}

FirResponse achievability_residual(const Plant& plant, const SystemResponse& resp) {
    const int n = plant.num_states();
    require(resp.num_states() == n, "achievability_residual: state dimension mismatch");
    require(resp.num_inputs() == plant.num_inputs(),
            "achievability_residual: input dimension mismatch");
    const int t = resp.fir_horizon();
    FirResponse delta(n, n);
    for (int k = 1; k <= t; ++k) {
        Matrix d = plant.A * resp.phi_x().tap(k) + plant.B * resp.phi_u().tap(k);
        if (k < t) d -= resp.phi_x().tap(k + 1);
        delta.push_tap(std::move(d));
    }
    return delta;
}

double max_residual(const Plant& plant, const SystemResponse& resp) {
    const FirResponse delta = achievability_residual(plant, resp);
    double worst = 0.0;
    for (const Matrix& tap : delta.taps()) worst = std::max(worst, tap.cwiseAbs().maxCoeff());
    return worst;
}

LtvOperator achievability_residual_ltv(const LtvOperator& a_op, const LtvOperator& b_op,
                                       const LtvOperator& phi_x, const LtvOperator& phi_u) {
    const int n = a_op.out_dim();
    const int horizon = a_op.horizon();
    require(a_op.in_dim() == n, "achievability_residual_ltv: A operator must be square");
    require(b_op.out_dim() == n && b_op.horizon() == horizon,
            "achievability_residual_ltv: B operator mismatch");
    require(phi_x.out_dim() == n && phi_x.in_dim() == n && phi_x.horizon() == horizon,
            "achievability_residual_ltv: Phi_x mismatch");
    require(phi_u.in_dim() == n && phi_u.out_dim() == b_op.in_dim() &&
                phi_u.horizon() == horizon,
            "achievability_residual_ltv: Phi_u mismatch");
    require(phi_x.strictly_causal() && phi_u.strictly_causal(),
            "achievability_residual_ltv: responses must be strictly causal");
    for (int i = 1; i < horizon; ++i)
        require((phi_x.block(i, i - 1) - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-9,
                "achievability_residual_ltv: Phi_x first sub-diagonal must be identity");

    // Matching [I - S+A, -S+B] [Phi_x; Phi_u] = S+ (I - delta) block-wise:
    //   delta(t, j) = (A Phi_x + B Phi_u)(t, j) + 1{j == t-1-ish...}
    // concretely, with drive := A Phi_x + B Phi_u,
    //   delta(t, j) = drive(t, j) - Phi_x(t+1, j)           for j < t,
    //   delta(t, t) = drive(t, t) + (I - Phi_x(t+1, t)) = 0
    // where the diagonal vanishes structurally (strict causality plus the
    // sub-diagonal identity normalization).  The last block row is outside
    // the horizon and stays zero.
    const LtvOperator drive = add(compose(a_op, phi_x), compose(b_op, phi_u));
    LtvOperator delta(n, n, horizon);
    for (int t = 0; t + 1 < horizon; ++t)
        for (int j = 0; j < t; ++j)
            delta.block(t, j) = drive.block(t, j) - phi_x.block(t + 1, j);
    delta.finalize(true);
    return delta;
}

}  // namespace sls
