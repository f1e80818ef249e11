#pragma once

#include "sls/response.hpp"

namespace sls {

/// Time-domain state machine realizing u = Phi_u Phi_x^{-1} x through the
/// internal disturbance estimate w_hat:
///
///   x_hat_t = sum_{k=2..T} Phi_x[k] w_hat_{t-k+1}
///   w_hat_t = y_t - x_hat_t          (y_t: measured state, x_t + delta_y_t)
///   u_t     = sum_{k=1..T} Phi_u[k] w_hat_{t-k+1} + delta_u_t
///
/// Only the last T values of w_hat are retained (ring buffer, O(nT) memory).
class Controller {
public:
    explicit Controller(SystemResponse resp)
        : resp_(std::move(resp)),
          buffer_(Matrix::Zero(resp_.num_states(), resp_.fir_horizon())),
          steps_(0) {}

    /// Advance one step: consume the measured state, return the control.
    Vector step(const Vector& measured_state, const Vector& delta_u);

    Vector step(const Vector& measured_state) {
        return step(measured_state, Vector::Zero(resp_.num_inputs()));
    }

    /// w_hat from the most recent step.
    Vector last_w_hat() const;

    void reset() {
        buffer_.setZero();
        steps_ = 0;
    }

    const SystemResponse& response() const { return resp_; }

private:
    // Slot for time t is t mod T.
    Eigen::Ref<const Vector> stored(long t) const {
        return buffer_.col(static_cast<int>(t % buffer_.cols()));
    }

    SystemResponse resp_;
    Matrix buffer_;
    long steps_;
};

}  // namespace sls
