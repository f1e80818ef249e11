#include "sls/loop.hpp"

namespace sls {

ClosedLoopTraces simulate_closed_loop(const UncertainPlant& plant, const SystemResponse& resp,
                                      const Signal& w, const Signal& delta_y,
                                      const Signal& delta_u) {
    const Plant& nom = plant.nominal();
    const int n = nom.num_states();
    const int p = nom.num_inputs();
    const int horizon = w.horizon();
    require(resp.num_states() == n && resp.num_inputs() == p,
            "simulate_closed_loop: response/plant dimension mismatch");
    require(w.dim() == n, "simulate_closed_loop: disturbance dimension mismatch");
    require(delta_y.dim() == n && delta_y.horizon() == horizon,
            "simulate_closed_loop: delta_y mismatch");
    require(delta_u.dim() == p && delta_u.horizon() == horizon,
            "simulate_closed_loop: delta_u mismatch");
    require(plant.horizon() >= horizon,
            "simulate_closed_loop: perturbation horizon shorter than signal");

    const LtvOperator& da = plant.delta_a();
    const LtvOperator& db = plant.delta_b();

    ClosedLoopTraces out{Signal(n, horizon), Signal(p, horizon), Signal(n, horizon)};
    Controller ctl(resp);
    for (int t = 0; t < horizon; ++t) {
        const Vector u_t = ctl.step(out.x.sample(t) + delta_y.sample(t), delta_u.sample(t));
        out.u.sample(t) = u_t;
        out.w_hat.sample(t) = ctl.last_w_hat();
        if (t + 1 >= horizon) break;
        Vector next = nom.A * out.x.sample(t) + nom.B * u_t + w.sample(t);
        const int sa = da.band() < 0 ? t + 1 : std::max(0, t - da.band());
        for (int s = sa; s <= t; ++s) next.noalias() += da.block(t, s) * out.x.sample(s);
        const int sb = db.band() < 0 ? t + 1 : std::max(0, t - db.band());
        for (int s = sb; s <= t; ++s) next.noalias() += db.block(t, s) * out.u.sample(s);
        out.x.sample(t + 1) = next;
    }
    return out;
}

ClosedLoopTraces simulate_closed_loop(const UncertainPlant& plant, const SystemResponse& resp,
                                      const Signal& w) {
    return simulate_closed_loop(plant, resp, w, Signal(plant.nominal().num_states(), w.horizon()),
                                Signal(plant.nominal().num_inputs(), w.horizon()));
}

LtvOperator delta_hat(const UncertainPlant& plant, const SystemResponse& resp, int horizon) {
    require(horizon >= resp.fir_horizon() + 1, "delta_hat: horizon must be at least T + 1");
    require(horizon <= plant.horizon(), "delta_hat: horizon exceeds perturbation horizon");
    // Matching [I - S+(A0+dA), -S+(B0+dB)] Phi = S+(I - delta) for a response
    // achievable on the nominal pair gives delta = [dA, dB] [Phi_x; Phi_u],
    // strictly causal because the responses are.
    const LtvOperator stacked_delta =
        hstack(truncate(plant.delta_a(), horizon), truncate(plant.delta_b(), horizon));
    return compose(stacked_delta, lift(resp.stacked(), horizon));
}

std::pair<Signal, Signal> predicted_response(const UncertainPlant& plant,
                                             const SystemResponse& resp, const Signal& w) {
    require(w.dim() == plant.nominal().num_states(), "predicted_response: dimension mismatch");
    const LtvOperator dhat = delta_hat(plant, resp, w.horizon());
    const Signal v = apply(feedback_inverse(dhat), w);
    return {apply(resp.phi_x(), v), apply(resp.phi_u(), v)};
}

ClosedLoopMap closed_loop_map(const Plant& plant, const SystemResponse& resp, int horizon) {
    const int n = plant.num_states();
    require(resp.num_states() == n && resp.num_inputs() == plant.num_inputs(),
            "closed_loop_map: dimension mismatch");
    const LtvOperator phi_x = lift(resp.phi_x(), horizon);
    const LtvOperator phi_u = lift(resp.phi_u(), horizon);
    // Phi (S- - A) = lift of z Phi(z) minus lift of Phi(z) A; both causal.
    const LtvOperator x_sm = lift_advanced(resp.phi_x(), horizon);
    const LtvOperator u_sm = lift_advanced(resp.phi_u(), horizon);
    const LtvOperator x_a = lift(postmultiply(resp.phi_x(), plant.A), horizon);
    const LtvOperator u_a = lift(postmultiply(resp.phi_u(), plant.A), horizon);
    const LtvOperator sp = LtvOperator::right_shift(n, horizon);
    const LtvOperator sp_a = compose(sp, LtvOperator::memoryless(plant.A, horizon));
    const LtvOperator sp_b = compose(sp, LtvOperator::memoryless(plant.B, horizon));

    // The x row's measurement-noise block is Phi_x (S- - A) - I: right-
    // multiplying the achievability identity by S- gives (S- - A) Phi_x =
    // I + B Phi_u, and the -I is what pins x_0 = 0 under any delta_y.
    return ClosedLoopMap{
        phi_x,
        add(add(x_sm, scaled(x_a, -1.0)),
            scaled(LtvOperator::identity(n, horizon), -1.0)),
        lift(postmultiply(resp.phi_x(), plant.B), horizon),
        phi_u,
        add(u_sm, scaled(u_a, -1.0)),
        add(LtvOperator::identity(plant.num_inputs(), horizon),
            lift(postmultiply(resp.phi_u(), plant.B), horizon)),
        sp,
        add(LtvOperator::identity(n, horizon), scaled(sp_a, -1.0)),
        sp_b,
    };
}

ClosedLoopTraces simulate_closed_loop_ltv(const LtvOperator& a_op, const LtvOperator& b_op,
                                          const LtvOperator& phi_x, const LtvOperator& phi_u,
                                          const Signal& w, const Signal& delta_y,
                                          const Signal& delta_u) {
    const int n = a_op.out_dim();
    const int p = b_op.in_dim();
    const int horizon = w.horizon();
    require(a_op.in_dim() == n && b_op.out_dim() == n, "simulate_ltv: A/B dimension mismatch");
    require(phi_x.out_dim() == n && phi_x.in_dim() == n && phi_u.out_dim() == p &&
                phi_u.in_dim() == n,
            "simulate_ltv: response dimension mismatch");
    require(a_op.horizon() >= horizon && phi_x.horizon() >= horizon,
            "simulate_ltv: operator horizons too short");
    require(w.dim() == n && delta_y.dim() == n && delta_u.dim() == p &&
                delta_y.horizon() == horizon && delta_u.horizon() == horizon,
            "simulate_ltv: signal mismatch");
    for (int i = 1; i < horizon; ++i)
        require((phi_x.block(i, i - 1) - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-9,
                "simulate_ltv: Phi_x first sub-diagonal must be identity");

    ClosedLoopTraces out{Signal(n, horizon), Signal(p, horizon), Signal(n, horizon)};
    for (int t = 0; t < horizon; ++t) {
        // x_t from the dynamics row t-1
        if (t >= 1) {
            Vector next = w.sample(t - 1);
            for (int s2 = 0; s2 <= t - 1; ++s2) {
                next.noalias() += a_op.block(t - 1, s2) * out.x.sample(s2);
                next.noalias() += b_op.block(t - 1, s2) * out.u.sample(s2);
            }
            out.x.sample(t) = next;
        }
        // x_hat_t uses w_hat up to index t-1 only
        Vector x_hat = Vector::Zero(n);
        for (int j = 0; j <= t - 2; ++j)
            x_hat.noalias() += phi_x.block(t, j) * out.w_hat.sample(j + 1);
        out.w_hat.sample(t) = out.x.sample(t) + delta_y.sample(t) - x_hat;
        Vector u_t = delta_u.sample(t);
        for (int j = 0; j <= t - 1; ++j)
            u_t.noalias() += phi_u.block(t, j) * out.w_hat.sample(j + 1);
        out.u.sample(t) = u_t;
    }
    return out;
}

}  // namespace sls
