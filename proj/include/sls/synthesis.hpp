#pragma once

#include "sls/lp.hpp"
#include "sls/plant.hpp"
#include "sls/response.hpp"
#include "sls/structure.hpp"

#include <optional>
#include <utility>

namespace sls {

struct SynthesisProblem {
    Plant plant;
    CostOutput cost;
    double epsilon = 0.0;
    int fir_horizon = 1;
    std::optional<StructureMask> mask;
    double margin = 1e-6;     // strict-inequality margin eta in (0, 0.01]
    double gamma_tol = 1e-3;  // relative bisection width

    void validate() const;
};

struct BisectionProbe {
    double gamma;
    bool feasible;
};

struct SynthesisResult {
    SynthesisProblem problem;
    double gamma_star;
    SystemResponse response;
    double norm_qphi;     // ||Q Phi||
    double norm_phi;      // ||[Phi_x; Phi_u]||
    double residual_max;  // achievability residual, max abs entry
    std::vector<BisectionProbe> bisection_trace;
};

/// No gamma admits a feasible response (structure or epsilon too tight).
struct SynthesisInfeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A returned result violates its own certificate: an LP or decoding bug.
struct CertificateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The achievability equalities over the free tap entries:
///
///   Phi_x[1] = I (substituted as constants),
///   Phi_x[k+1] = A Phi_x[k] + B Phi_u[k]  for k = 1..T-1,
///   A Phi_x[T] + B Phi_u[T] = 0,
///
/// with masked entries removed from the variable set.  A mask that forbids
/// the Phi_x[1] diagonal yields a structurally infeasible row rather than an
/// error, so infeasibility surfaces at LP time.
class AchievabilitySystem {
public:
    AchievabilitySystem(const Plant& plant, int fir_horizon, const StructureMask* mask);

    int num_entries() const { return num_entries_; }
    int num_states() const { return n_; }
    int num_inputs() const { return p_; }
    int fir_horizon() const { return fir_horizon_; }

    /// Entry id of a Phi_x tap element (k >= 2), or -1 when masked/constant.
    int x_entry(int k, int i, int j) const {
        return k <= 1 ? -1 : x_map_[((k - 2) * n_ + i) * n_ + j];
    }
    int u_entry(int k, int a, int j) const { return u_map_[((k - 1) * p_ + a) * n_ + j]; }

    const std::vector<LpRow>& rows() const { return rows_; }
    const std::vector<double>& rhs() const { return rhs_; }
    bool identity_masked() const { return identity_masked_; }

    SystemResponse decode(const std::vector<double>& entries) const;

private:
    int n_, p_, fir_horizon_, num_entries_ = 0;
    std::vector<int> x_map_, u_map_;
    std::vector<LpRow> rows_;
    std::vector<double> rhs_;
    bool identity_masked_ = false;
};

AchievabilitySystem build_achievability(const Plant& plant, int fir_horizon,
                                        const StructureMask* mask = nullptr);

/// One feasibility probe of the robust performance condition at a fixed
/// gamma: achievability plus  ||Q Phi|| + gamma eps ||Phi|| <= gamma (1 - eta)
/// posed as an LP over tap entries with row-sum epigraph variables.  The
/// objective minimizes the certified left-hand side, so feasible probes come
/// back with tight norms.
std::optional<SystemResponse> feasibility_at_gamma(const SynthesisProblem& prob, double gamma,
                                                   double* lp_objective = nullptr);

/// Doubling search for a feasible gamma (from 1, capped at 2^40) followed by
/// bisection down to a relative width of gamma_tol.  An explicit gamma_hi
/// skips the doubling.  Throws SynthesisInfeasible when no gamma works.
SynthesisResult bisect_gamma(const SynthesisProblem& prob,
                             std::optional<double> gamma_hi = std::nullopt);

/// Nominal (epsilon = 0) L1 synthesis as a single LP: minimize ||Q Phi||
/// over the achievable set.
std::pair<double, SystemResponse> nominal_l1_min(const Plant& plant, const CostOutput& cost,
                                                 int fir_horizon,
                                                 const StructureMask* mask = nullptr);

/// Smallest achievable ||[Phi_x; Phi_u]||; 1 / that value is the epsilon
/// feasibility threshold of the robust problem.
std::pair<double, SystemResponse> min_stacked_norm(const Plant& plant, int fir_horizon,
                                                   const StructureMask* mask = nullptr);

}  // namespace sls
