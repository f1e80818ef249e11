#include "sls/synthesis.hpp"

#include <cmath>

namespace sls {

void SynthesisProblem::validate() const {
    require(fir_horizon >= 1, "SynthesisProblem: fir_horizon must be >= 1");
    require(epsilon >= 0.0, "SynthesisProblem: epsilon must be nonnegative");
    require(margin > 0.0 && margin <= 0.01, "SynthesisProblem: margin must lie in (0, 0.01]");
    require(gamma_tol > 0.0, "SynthesisProblem: gamma_tol must be positive");
    require(cost.C.cols() == plant.num_states() && cost.D.cols() == plant.num_inputs(),
            "SynthesisProblem: cost dimensions must match the plant");
    if (mask)
        require(mask->fir_horizon() == fir_horizon,
                "SynthesisProblem: mask horizon must equal fir_horizon");
}

AchievabilitySystem::AchievabilitySystem(const Plant& plant, int fir_horizon,
                                         const StructureMask* mask)
    : n_(plant.num_states()), p_(plant.num_inputs()), fir_horizon_(fir_horizon) {
    require(fir_horizon_ >= 1, "build_achievability: fir_horizon must be >= 1");
    if (mask) {
        require(mask->fir_horizon() == fir_horizon_, "build_achievability: mask horizon mismatch");
        for (int i = 0; i < n_; ++i)
            if (!mask->allows_x(1, i, i)) identity_masked_ = true;
    }

    const int t = fir_horizon_;
    x_map_.assign(static_cast<size_t>(std::max(0, t - 1)) * n_ * n_, -1);
    u_map_.assign(static_cast<size_t>(t) * p_ * n_, -1);
    for (int k = 2; k <= t; ++k)
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                if (!mask || mask->allows_x(k, i, j))
                    x_map_[((k - 2) * n_ + i) * n_ + j] = num_entries_++;
    for (int k = 1; k <= t; ++k)
        for (int a = 0; a < p_; ++a)
            for (int j = 0; j < n_; ++j)
                if (!mask || mask->allows_u(k, a, j))
                    u_map_[((k - 1) * p_ + a) * n_ + j] = num_entries_++;

    // Recursion rows Phi_x[k+1] = A Phi_x[k] + B Phi_u[k]; tap 1 of Phi_x is
    // the identity, folded into the right-hand side.
    for (int k = 1; k < t; ++k) {
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                LpRow row;
                double rhs = 0.0;
                if (const int e = x_entry(k + 1, i, j); e >= 0) row.push_back({e, 1.0});
                if (k == 1) {
                    rhs += plant.A(i, j);
                } else {
                    for (int s = 0; s < n_; ++s) {
                        if (plant.A(i, s) == 0.0) continue;
                        if (const int e = x_entry(k, s, j); e >= 0)
                            row.push_back({e, -plant.A(i, s)});
                    }
                }
                for (int a = 0; a < p_; ++a) {
                    if (plant.B(i, a) == 0.0) continue;
                    if (const int e = u_entry(k, a, j); e >= 0) row.push_back({e, -plant.B(i, a)});
                }
                rows_.push_back(std::move(row));
                rhs_.push_back(rhs);
            }
    }
    // Terminal rows A Phi_x[T] + B Phi_u[T] = 0 make FIR membership exact.
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) {
            LpRow row;
            double rhs = 0.0;
            if (t == 1) {
                rhs -= plant.A(i, j);
            } else {
                for (int s = 0; s < n_; ++s) {
                    if (plant.A(i, s) == 0.0) continue;
                    if (const int e = x_entry(t, s, j); e >= 0) row.push_back({e, plant.A(i, s)});
                }
            }
            for (int a = 0; a < p_; ++a) {
                if (plant.B(i, a) == 0.0) continue;
                if (const int e = u_entry(t, a, j); e >= 0) row.push_back({e, plant.B(i, a)});
            }
            rows_.push_back(std::move(row));
            rhs_.push_back(rhs);
        }
    if (identity_masked_) {
        rows_.push_back({});
        rhs_.push_back(1.0);
    }
}

SystemResponse AchievabilitySystem::decode(const std::vector<double>& entries) const {
    require(static_cast<int>(entries.size()) >= num_entries_, "decode: entry vector too short");
    FirResponse phi_x(n_, n_);
    FirResponse phi_u(p_, n_);
    phi_x.push_tap(Matrix::Identity(n_, n_));
    for (int k = 2; k <= fir_horizon_; ++k) {
        Matrix tap = Matrix::Zero(n_, n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                if (const int e = x_entry(k, i, j); e >= 0) tap(i, j) = entries[e];
        phi_x.push_tap(std::move(tap));
    }
    for (int k = 1; k <= fir_horizon_; ++k) {
        Matrix tap = Matrix::Zero(p_, n_);
        for (int a = 0; a < p_; ++a)
            for (int j = 0; j < n_; ++j)
                if (const int e = u_entry(k, a, j); e >= 0) tap(a, j) = entries[e];
        phi_u.push_tap(std::move(tap));
    }
    return SystemResponse(std::move(phi_x), std::move(phi_u));
}

AchievabilitySystem build_achievability(const Plant& plant, int fir_horizon,
                                        const StructureMask* mask) {
    return AchievabilitySystem(plant, fir_horizon, mask);
}

namespace {

// Shared LP assembly.  Every tap entry v is carried as a nonnegative split
// pair (v+, v-) so absolute row sums become plain sums v+ + v-; weighted-
// output entries that mix several variables (or a variable with a constant)
// get an auxiliary split pair tied by an equality.  At the optimum the
// objective pressure makes the splits complementary on the binding rows, so
// the epigraph scalars equal the true norms.
struct SynthLp {
    LinearProgram lp;
    const AchievabilitySystem* sys = nullptr;
    std::vector<int> entry_col;  // entry id -> plus column (minus = +1)
    int t_q = -1;
    int t_phi = -1;

    void add_entry_columns() {
        entry_col.resize(sys->num_entries());
        for (int e = 0; e < sys->num_entries(); ++e) {
            entry_col[e] = lp.add_variable(0.0, kInf, 0.0);
            lp.add_variable(0.0, kInf, 0.0);
        }
    }

    void add_equalities() {
        for (size_t r = 0; r < sys->rows().size(); ++r) {
            LpRow row;
            for (const LpTerm& t : sys->rows()[r]) {
                row.push_back({entry_col[t.col], t.coef});
                row.push_back({entry_col[t.col] + 1, -t.coef});
            }
            lp.add_eq(std::move(row), sys->rhs()[r]);
        }
    }

    // Row-sum epigraph rows for ||Q Phi||: one per output row of [C D].
    void add_weighted_epigraph(const Plant& plant, const CostOutput& cost) {
        t_q = lp.add_variable(0.0, kInf, 0.0);
        const int n = sys->num_states();
        const int p = sys->num_inputs();
        const int m_rows = cost.num_outputs();
        std::vector<std::pair<int, double>> terms;
        for (int r = 0; r < m_rows; ++r) {
            LpRow sum_row;
            double rhs = 0.0;
            for (int k = 1; k <= sys->fir_horizon(); ++k)
                for (int j = 0; j < n; ++j) {
                    terms.clear();
                    double cnst = 0.0;
                    if (k == 1) cnst += cost.C(r, j);  // C Phi_x[1] = C
                    for (int s = 0; s < n; ++s) {
                        if (cost.C(r, s) == 0.0) continue;
                        if (const int e = sys->x_entry(k, s, j); e >= 0)
                            terms.emplace_back(e, cost.C(r, s));
                    }
                    for (int a = 0; a < p; ++a) {
                        if (cost.D(r, a) == 0.0) continue;
                        if (const int e = sys->u_entry(k, a, j); e >= 0)
                            terms.emplace_back(e, cost.D(r, a));
                    }
                    if (terms.empty()) {
                        rhs -= std::abs(cnst);
                    } else if (terms.size() == 1 && cnst == 0.0) {
                        const auto [e, c] = terms[0];
                        sum_row.push_back({entry_col[e], std::abs(c)});
                        sum_row.push_back({entry_col[e] + 1, std::abs(c)});
                    } else {
                        const int qp = lp.add_variable(0.0, kInf, 0.0);
                        const int qm = lp.add_variable(0.0, kInf, 0.0);
                        LpRow def;
                        for (const auto& [e, c] : terms) {
                            def.push_back({entry_col[e], c});
                            def.push_back({entry_col[e] + 1, -c});
                        }
                        def.push_back({qp, -1.0});
                        def.push_back({qm, 1.0});
                        lp.add_eq(std::move(def), -cnst);
                        sum_row.push_back({qp, 1.0});
                        sum_row.push_back({qm, 1.0});
                    }
                }
            sum_row.push_back({t_q, -1.0});
            lp.add_le(std::move(sum_row), rhs);
        }
    }

    // Row-sum epigraph for the stacked ||[Phi_x; Phi_u]||.
    void add_stacked_epigraph() {
        t_phi = lp.add_variable(0.0, kInf, 0.0);
        const int n = sys->num_states();
        const int p = sys->num_inputs();
        for (int i = 0; i < n; ++i) {
            LpRow row;
            for (int k = 2; k <= sys->fir_horizon(); ++k)
                for (int j = 0; j < n; ++j)
                    if (const int e = sys->x_entry(k, i, j); e >= 0) {
                        row.push_back({entry_col[e], 1.0});
                        row.push_back({entry_col[e] + 1, 1.0});
                    }
            row.push_back({t_phi, -1.0});
            lp.add_le(std::move(row), -1.0);  // tap 1 contributes |I(i,i)| = 1
        }
        for (int a = 0; a < p; ++a) {
            LpRow row;
            for (int k = 1; k <= sys->fir_horizon(); ++k)
                for (int j = 0; j < n; ++j)
                    if (const int e = sys->u_entry(k, a, j); e >= 0) {
                        row.push_back({entry_col[e], 1.0});
                        row.push_back({entry_col[e] + 1, 1.0});
                    }
            row.push_back({t_phi, -1.0});
            lp.add_le(std::move(row), 0.0);
        }
    }

    std::vector<double> entry_values(const LpSolution& sol) const {
        std::vector<double> vals(sys->num_entries());
        for (int e = 0; e < sys->num_entries(); ++e)
            vals[e] = sol.x[entry_col[e]] - sol.x[entry_col[e] + 1];
        return vals;
    }
};

}  // namespace

std::optional<SystemResponse> feasibility_at_gamma(const SynthesisProblem& prob, double gamma,
                                                   double* lp_objective) {
    prob.validate();
    require(gamma > 0.0, "feasibility_at_gamma: gamma must be positive");
    const AchievabilitySystem sys = build_achievability(
        prob.plant, prob.fir_horizon, prob.mask ? &*prob.mask : nullptr);

    SynthLp b;
    b.sys = &sys;
    b.add_entry_columns();
    b.add_equalities();
    b.add_weighted_epigraph(prob.plant, prob.cost);
    const double robust_weight = gamma * prob.epsilon;
    if (robust_weight > 0.0) b.add_stacked_epigraph();

    LpRow margin_row{{b.t_q, 1.0}};
    b.lp.objective[b.t_q] = 1.0;
    if (robust_weight > 0.0) {
        margin_row.push_back({b.t_phi, robust_weight});
        b.lp.objective[b.t_phi] = robust_weight;
    }
    b.lp.add_le(std::move(margin_row), gamma * (1.0 - prob.margin));

    const LpSolution sol = lp_solve(b.lp);
    if (sol.status == LpStatus::Infeasible) return std::nullopt;
    if (sol.status != LpStatus::Optimal)
        throw LpFault("feasibility_at_gamma: unexpected LP status");
    if (lp_objective) *lp_objective = sol.objective_value;
    return sys.decode(b.entry_values(sol));
}

SynthesisResult bisect_gamma(const SynthesisProblem& prob, std::optional<double> gamma_hi) {
    prob.validate();
    std::vector<BisectionProbe> trace;
    std::optional<SystemResponse> best;

    auto probe = [&](double gamma) {
        std::optional<SystemResponse> resp = feasibility_at_gamma(prob, gamma);
        trace.push_back({gamma, resp.has_value()});
        if (resp) best = std::move(resp);
        return trace.back().feasible;
    };

    double lo = 0.0;
    double hi;
    if (gamma_hi) {
        require(*gamma_hi > 0.0, "bisect_gamma: gamma_hi must be positive");
        hi = *gamma_hi;
        if (!probe(hi))
            throw SynthesisInfeasible("bisect_gamma: infeasible at the supplied gamma_hi");
    } else {
        constexpr double kGammaCap = 1099511627776.0;  // 2^40
        double gamma = 1.0;
        while (!probe(gamma)) {
            lo = gamma;
            gamma *= 2.0;
            if (gamma > kGammaCap)
                throw SynthesisInfeasible(
                    "bisect_gamma: no feasible gamma up to 2^40; structure or epsilon is too "
                    "restrictive");
        }
        hi = gamma;
    }

    while (hi - lo > prob.gamma_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (probe(mid))
            hi = mid;
        else
            lo = mid;
    }

    SynthesisResult result{prob, hi, std::move(*best), 0.0, 0.0, 0.0, std::move(trace)};
    result.norm_qphi = l1_norm(result.response.weighted(prob.cost));
    result.norm_phi = l1_norm(result.response.stacked());
    result.residual_max = max_residual(prob.plant, result.response);

    const double lhs = result.norm_qphi + result.gamma_star * prob.epsilon * result.norm_phi;
    if (!(lhs < result.gamma_star))
        throw CertificateError("bisect_gamma: certificate lhs >= gamma_star");
    if (!(prob.epsilon * result.norm_phi < 1.0))
        throw CertificateError("bisect_gamma: small-gain condition violated");
    if (!(result.residual_max <= 1e-8))
        throw CertificateError("bisect_gamma: achievability residual too large");
    return result;
}

namespace {

std::pair<double, SystemResponse> minimize_single_norm(const Plant& plant,
                                                       const CostOutput* cost, int fir_horizon,
                                                       const StructureMask* mask) {
    const AchievabilitySystem sys = build_achievability(plant, fir_horizon, mask);
    SynthLp b;
    b.sys = &sys;
    b.add_entry_columns();
    b.add_equalities();
    int objective_var;
    if (cost) {
        b.add_weighted_epigraph(plant, *cost);
        objective_var = b.t_q;
    } else {
        b.add_stacked_epigraph();
        objective_var = b.t_phi;
    }
    b.lp.objective[objective_var] = 1.0;

    const LpSolution sol = lp_solve(b.lp);
    if (sol.status == LpStatus::Infeasible)
        throw SynthesisInfeasible("achievability system infeasible (mask too restrictive?)");
    if (sol.status != LpStatus::Optimal) throw LpFault("norm minimization: unexpected LP status");
    return {sol.x[objective_var], sys.decode(b.entry_values(sol))};
}

}  // namespace

std::pair<double, SystemResponse> nominal_l1_min(const Plant& plant, const CostOutput& cost,
                                                 int fir_horizon, const StructureMask* mask) {
    return minimize_single_norm(plant, &cost, fir_horizon, mask);
}

std::pair<double, SystemResponse> min_stacked_norm(const Plant& plant, int fir_horizon,
                                                   const StructureMask* mask) {
    return minimize_single_norm(plant, nullptr, fir_horizon, mask);
}

}  // namespace sls
