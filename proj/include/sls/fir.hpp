#pragma once

#include "sls/types.hpp"

#include <vector>

namespace sls {

/// A strictly causal finite-impulse-response transfer matrix
///
///   G(z) = sum_{k=1..T} G[k] z^{-k}.
///
/// Taps are indexed from 1 (the z^{-1} coefficient), so strict causality is
/// structural: there is no slot for a z^0 term.  An empty tap list is the
/// zero response of the given dimensions.
class FirResponse {
public:
    FirResponse(int out_dim, int in_dim)
        : out_dim_(out_dim), in_dim_(in_dim) {
        require(out_dim >= 1 && in_dim >= 1, "FirResponse: dims must be >= 1");
    }

    FirResponse(int out_dim, int in_dim, std::vector<Matrix> taps)
        : out_dim_(out_dim), in_dim_(in_dim), taps_(std::move(taps)) {
        require(out_dim >= 1 && in_dim >= 1, "FirResponse: dims must be >= 1");
        for (const Matrix& g : taps_) {
            require(g.rows() == out_dim_ && g.cols() == in_dim_,
                    "FirResponse: tap shape mismatch");
            require(all_finite(g), "FirResponse: tap entries must be finite");
        }
    }

    int out_dim() const { return out_dim_; }
    int in_dim() const { return in_dim_; }
    int num_taps() const { return static_cast<int>(taps_.size()); }

    /// Coefficient of z^{-k}, k in 1..num_taps().
    const Matrix& tap(int k) const { return taps_.at(static_cast<size_t>(k - 1)); }
    Matrix& tap(int k) { return taps_.at(static_cast<size_t>(k - 1)); }

    const std::vector<Matrix>& taps() const { return taps_; }

    void push_tap(Matrix g) {
        require(g.rows() == out_dim_ && g.cols() == in_dim_, "FirResponse: tap shape mismatch");
        require(all_finite(g), "FirResponse: tap entries must be finite");
        taps_.push_back(std::move(g));
    }

    static FirResponse zero(int out_dim, int in_dim, int num_taps) {
        FirResponse g(out_dim, in_dim);
        for (int k = 0; k < num_taps; ++k) g.push_tap(Matrix::Zero(out_dim, in_dim));
        return g;
    }

    /// z^{-1} I, the unit-delay response.
    static FirResponse delay_identity(int dim) {
        FirResponse g(dim, dim);
        g.push_tap(Matrix::Identity(dim, dim));
        return g;
    }

private:
    int out_dim_;
    int in_dim_;
    std::vector<Matrix> taps_;
};

/// Induced l-infinity -> l-infinity norm of a FIR response: the maximum over
/// output rows of the absolute row sum accumulated across all taps.
double l1_norm(const FirResponse& g);

/// Tap-sequence convolution: (a o b)(z) = a(z) b(z).  The result has
/// a.num_taps() + b.num_taps() taps; its first tap is always zero because
/// both factors are strictly causal.
FirResponse compose(const FirResponse& a, const FirResponse& b);

/// y_t = sum_{k=1..T} G[k] w_{t-k}, truncated to the signal horizon.
Signal apply(const FirResponse& g, const Signal& w);

FirResponse add(const FirResponse& a, const FirResponse& b);

/// Stack two responses sharing an input space: [a; b].
FirResponse vstack(const FirResponse& a, const FirResponse& b);

/// Left-multiply every tap by a constant matrix: (M a)(z).
FirResponse premultiply(const Matrix& m, const FirResponse& a);

/// Right-multiply every tap by a constant matrix: (a M)(z).
FirResponse postmultiply(const FirResponse& a, const Matrix& m);

}  // namespace sls
