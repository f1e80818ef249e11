#include "sls/controller.hpp"

namespace sls {

Vector Controller::step(const Vector& measured_state, const Vector& delta_u) {
    require(measured_state.size() == resp_.num_states(), "Controller: bad state dimension");
    require(delta_u.size() == resp_.num_inputs(), "Controller: bad delta_u dimension");
    const int t_taps = resp_.fir_horizon();
    const long t = steps_;

    Vector x_hat = Vector::Zero(resp_.num_states());
    for (int k = 2; k <= t_taps; ++k) {
        const long idx = t - k + 1;
        if (idx < 0) break;  // ring starts zeroed
        x_hat.noalias() += resp_.phi_x().tap(k) * stored(idx);
    }

    const Vector w_hat = measured_state - x_hat;
    buffer_.col(static_cast<int>(t % t_taps)) = w_hat;

    Vector u = delta_u;
    for (int k = 1; k <= t_taps; ++k) {
        const long idx = t - k + 1;
        if (idx < 0) break;
        u.noalias() += resp_.phi_u().tap(k) * stored(idx);
    }

    ++steps_;
    return u;
}

Vector Controller::last_w_hat() const {
    require(steps_ > 0, "Controller: no step taken yet");
    return stored(steps_ - 1);
}

}  // namespace sls
