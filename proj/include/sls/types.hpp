#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace sls {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

/// A finite-horizon vector-valued signal x_0 .. x_{N-1}, stored as a
/// dim x horizon matrix (one column per time step).
class Signal {
public:
    Signal(int dim, int horizon) : data_(Matrix::Zero(dim, horizon)) {
        require(dim >= 1, "Signal: dim must be >= 1");
        require(horizon >= 1, "Signal: horizon must be >= 1");
    }

    explicit Signal(Matrix samples) : data_(std::move(samples)) {
        require(data_.rows() >= 1 && data_.cols() >= 1, "Signal: empty signal");
        require(all_finite(data_), "Signal: entries must be finite");
    }

    int dim() const { return static_cast<int>(data_.rows()); }
    int horizon() const { return static_cast<int>(data_.cols()); }

    Eigen::Ref<const Vector> sample(int t) const { return data_.col(t); }
    Eigen::Ref<Vector> sample(int t) { return data_.col(t); }

    const Matrix& samples() const { return data_; }
    Matrix& samples() { return data_; }

    /// Peak amplitude max_t max_i |x_i(t)| (the l-infinity signal norm).
    double peak() const { return data_.cwiseAbs().maxCoeff(); }

private:
    Matrix data_;
};

/// S+ : prepends a zero sample and drops the last one (fixed-horizon
/// truncation of the right shift).
Signal shift_right(const Signal& s);

/// S- : drops the first sample and appends zero.
Signal shift_left(const Signal& s);

}  // namespace sls
