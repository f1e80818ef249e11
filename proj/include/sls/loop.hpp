#pragma once

#include "sls/controller.hpp"
#include "sls/plant.hpp"
#include "sls/response.hpp"

namespace sls {

struct ClosedLoopTraces {
    Signal x;
    Signal u;
    Signal w_hat;
};

/// Step the true (perturbed) dynamics against the realized controller:
///
///   x_{t+1} = A x_t + (delta_a x)_t + B u_t + (delta_b u)_t + w_t,  x_0 = 0,
///
/// with the controller fed x_t + delta_y_t and its output offset by
/// delta_u_t.  The perturbation operators are consulted only on rows <= t,
/// so causality is structural.
ClosedLoopTraces simulate_closed_loop(const UncertainPlant& plant, const SystemResponse& resp,
                                      const Signal& w, const Signal& delta_y,
                                      const Signal& delta_u);

ClosedLoopTraces simulate_closed_loop(const UncertainPlant& plant, const SystemResponse& resp,
                                      const Signal& w);

/// The strictly causal uncertainty residual delta_hat = [delta_a, delta_b]
/// [Phi_x; Phi_u] of a nominally achievable response running on the
/// perturbed dynamics (requires horizon >= T + 1).
LtvOperator delta_hat(const UncertainPlant& plant, const SystemResponse& resp, int horizon);

/// Closed-form perturbed response [Phi_x; Phi_u] (I - delta_hat)^{-1} w,
/// assembled from operator algebra with no simulation involved.
std::pair<Signal, Signal> predicted_response(const UncertainPlant& plant,
                                             const SystemResponse& resp, const Signal& w);

/// The nine operator blocks mapping (w, delta_y, delta_u) -> (x, u, w_hat)
/// for the nominal interconnection:
///
///   [ Phi_x    Phi_x (S- - A) - I    Phi_x B     ]
///   [ Phi_u    Phi_u (S- - A)        I + Phi_u B ]
///   [ S+       I - S+ A              S+ B        ]
struct ClosedLoopMap {
    LtvOperator x_w, x_dy, x_du;
    LtvOperator u_w, u_dy, u_du;
    LtvOperator wh_w, wh_dy, wh_du;
};

ClosedLoopMap closed_loop_map(const Plant& plant, const SystemResponse& resp, int horizon);

/// Verification-grade variant for time-varying nominal dynamics
/// x = S+ A x + S+ B u + S+ w with operator-valued responses: steps the
/// realization u = Phi_u S- w_hat, x_hat = (Phi_x S- - I) w_hat in the time
/// domain.  Phi_x must carry identity blocks on its first sub-diagonal.
ClosedLoopTraces simulate_closed_loop_ltv(const LtvOperator& a_op, const LtvOperator& b_op,
                                          const LtvOperator& phi_x, const LtvOperator& phi_u,
                                          const Signal& w, const Signal& delta_y,
                                          const Signal& delta_u);

}  // namespace sls
