#pragma once

#include "sls/fir.hpp"
#include "sls/types.hpp"

namespace sls {

/// A causal linear operator on a fixed horizon N, characterized by its block
/// lower-triangular pulse response: y_i = sum_{j<=i} G(i,j) w_j.
///
/// Blocks are embedded in one dense (N*out_dim) x (N*in_dim) matrix whose
/// upper block triangle is identically zero.  The operator tracks its lower
/// bandwidth (the largest i-j with G(i,j) nonzero, -1 for the zero operator)
/// so that composition and inversion can skip structurally zero blocks.
class LtvOperator {
public:
    LtvOperator(int out_dim, int in_dim, int horizon)
        : out_dim_(out_dim),
          in_dim_(in_dim),
          horizon_(horizon),
          strictly_causal_(false),
          band_(-1),
          data_(Matrix::Zero(static_cast<Eigen::Index>(out_dim) * horizon,
                             static_cast<Eigen::Index>(in_dim) * horizon)) {
        require(out_dim >= 1 && in_dim >= 1, "LtvOperator: dims must be >= 1");
        require(horizon >= 1, "LtvOperator: horizon must be >= 1");
    }

    int out_dim() const { return out_dim_; }
    int in_dim() const { return in_dim_; }
    int horizon() const { return horizon_; }
    bool strictly_causal() const { return strictly_causal_; }
    int band() const { return band_; }

    Eigen::Block<const Matrix> block(int i, int j) const {
        return data_.block(static_cast<Eigen::Index>(i) * out_dim_,
                           static_cast<Eigen::Index>(j) * in_dim_, out_dim_, in_dim_);
    }
    Eigen::Block<Matrix> block(int i, int j) {
        return data_.block(static_cast<Eigen::Index>(i) * out_dim_,
                           static_cast<Eigen::Index>(j) * in_dim_, out_dim_, in_dim_);
    }

    const Matrix& dense() const { return data_; }
    Matrix& dense() { return data_; }

    /// Recompute the bandwidth by scanning and validate the causality
    /// structure.  Call after writing blocks directly.
    void finalize(bool strictly_causal);

    /// Trust the caller-supplied band (used by operations whose output band
    /// is known algebraically).
    void set_structure(bool strictly_causal, int band) {
        strictly_causal_ = strictly_causal;
        band_ = band;
    }

    static LtvOperator zero(int out_dim, int in_dim, int horizon) {
        LtvOperator d(out_dim, in_dim, horizon);
        d.set_structure(true, -1);  // the zero operator is strictly causal
        return d;
    }

    static LtvOperator identity(int dim, int horizon);

    /// Memoryless operator with the same matrix on every diagonal block
    /// (the blkdiag(M, M, ...) lift of a static map).
    static LtvOperator memoryless(const Matrix& m, int horizon);

    /// The right shift S+ restricted to the horizon: identity blocks on the
    /// first sub-diagonal.
    static LtvOperator right_shift(int dim, int horizon);

private:
    int out_dim_;
    int in_dim_;
    int horizon_;
    bool strictly_causal_;
    int band_;
    Matrix data_;
};

/// Induced l-infinity norm: max over scalar output rows of the absolute row
/// sum of the pulse response.  Equals the peak output over the horizon for
/// the worst unit-peak input.
double induced_norm(const LtvOperator& d);

Signal apply(const LtvOperator& d, const Signal& w);

LtvOperator compose(const LtvOperator& a, const LtvOperator& b);

LtvOperator add(const LtvOperator& a, const LtvOperator& b);

LtvOperator scaled(const LtvOperator& a, double factor);

/// (I - d)^{-1} by forward block substitution; requires d strictly causal,
/// which guarantees existence on the horizon.
LtvOperator feedback_inverse(const LtvOperator& d);

/// Lift a FIR response onto a horizon: G(i, i-k) = g.tap(k).
LtvOperator lift(const FirResponse& g, int horizon);

/// Lift of z g(z) restricted to the horizon: G(i, j) = g.tap(i-j+1).  Causal
/// (not strictly) once g is strictly causal; used for the Phi_x S- terms of
/// the closed-loop maps.
LtvOperator lift_advanced(const FirResponse& g, int horizon);

/// [a, b] acting on stacked inputs of dimension a.in_dim + b.in_dim.
LtvOperator hstack(const LtvOperator& a, const LtvOperator& b);

/// Leading principal sub-operator on a shorter horizon.
LtvOperator truncate(const LtvOperator& d, int horizon);

/// A sign-pattern input in {-1,+1}^{in_dim x N} whose output attains
/// induced_norm(d) at the peak row.
Signal worst_case_input(const LtvOperator& d);

}  // namespace sls
