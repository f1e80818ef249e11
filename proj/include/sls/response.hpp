#pragma once

#include "sls/fir.hpp"
#include "sls/ltv.hpp"
#include "sls/plant.hpp"

namespace sls {

/// The closed-loop maps {Phi_x, Phi_u} from disturbance to state and input,
/// as strictly causal FIR responses on a shared tap horizon T.  The z^{-1}
/// coefficient of Phi_x is pinned to the identity.
class SystemResponse {
public:
    SystemResponse(FirResponse phi_x, FirResponse phi_u);

    const FirResponse& phi_x() const { return phi_x_; }
    const FirResponse& phi_u() const { return phi_u_; }
    int num_states() const { return phi_x_.out_dim(); }
    int num_inputs() const { return phi_u_.out_dim(); }
    int fir_horizon() const { return phi_x_.num_taps(); }

    /// The stacked response [Phi_x; Phi_u] that the uncertainty multiplies.
    FirResponse stacked() const { return vstack(phi_x_, phi_u_); }

    /// Q Phi = C Phi_x + D Phi_u, the weighted closed-loop map from w to z.
    FirResponse weighted(const CostOutput& cost) const;

private:
    FirResponse phi_x_;
    FirResponse phi_u_;
};

/// Deviation of a response pair from the achievability subspace of the given
/// plant, by z-coefficient matching:
///
///   delta[k] = A Phi_x[k] + B Phi_u[k] - Phi_x[k+1],  k = 1..T-1
///   delta[T] = A Phi_x[T] + B Phi_u[T],
///
/// so delta == 0 exactly when {Phi_x, Phi_u} satisfies the FIR achievability
/// recursion with a hard terminal constraint.
FirResponse achievability_residual(const Plant& plant, const SystemResponse& resp);

/// Largest absolute residual entry.
double max_residual(const Plant& plant, const SystemResponse& resp);

// --- Time-varying nominal dynamics (verification-grade variants) -----------
//
// For dynamics x = S+ A x + S+ B u + S+ w with A, B causal operators, the
// achievability statement reads [I - S+A, -S+B] [Phi_x; Phi_u] = S+ (I - delta)
// with Phi_x carrying identity blocks on its first sub-diagonal.

/// The operator residual delta for LTV-nominal dynamics.  Throws if Phi_x
/// violates the first-sub-diagonal identity normalization.
LtvOperator achievability_residual_ltv(const LtvOperator& a_op, const LtvOperator& b_op,
                                       const LtvOperator& phi_x, const LtvOperator& phi_u);

}  // namespace sls
