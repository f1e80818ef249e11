#include "sls/ltv.hpp"

namespace sls {

namespace {
// Smallest band consistent with the stored blocks.
int scan_band(const Matrix& data, int out_dim, int in_dim, int horizon) {
    for (int d = horizon - 1; d >= 0; --d) {
        for (int i = d; i < horizon; ++i) {
            if (!data.block(static_cast<Eigen::Index>(i) * out_dim,
                            static_cast<Eigen::Index>(i - d) * in_dim, out_dim, in_dim)
                     .isZero(0.0))
                return d;
        }
    }
    return -1;
}
}  // namespace

void LtvOperator::finalize(bool strictly_causal) {
    require(all_finite(data_), "LtvOperator: entries must be finite");
    band_ = scan_band(data_, out_dim_, in_dim_, horizon_);
    if (strictly_causal) {
        for (int i = 0; i < horizon_; ++i)
            require(block(i, i).isZero(0.0),
                    "LtvOperator: strictly causal requires zero diagonal blocks");
    }
    strictly_causal_ = strictly_causal;
}

LtvOperator LtvOperator::identity(int dim, int horizon) {
    LtvOperator d(dim, dim, horizon);
    for (int i = 0; i < horizon; ++i) d.block(i, i) = Matrix::Identity(dim, dim);
    d.set_structure(false, 0);
    return d;
}

LtvOperator LtvOperator::memoryless(const Matrix& m, int horizon) {
    LtvOperator d(static_cast<int>(m.rows()), static_cast<int>(m.cols()), horizon);
    for (int i = 0; i < horizon; ++i) d.block(i, i) = m;
    d.set_structure(false, m.isZero(0.0) ? -1 : 0);
    return d;
}

LtvOperator LtvOperator::right_shift(int dim, int horizon) {
    LtvOperator d(dim, dim, horizon);
    for (int i = 1; i < horizon; ++i) d.block(i, i - 1) = Matrix::Identity(dim, dim);
    d.set_structure(true, horizon > 1 ? 1 : -1);
    return d;
}

double induced_norm(const LtvOperator& d) {
    if (d.band() < 0) return 0.0;
    const int n = d.horizon();
    double worst = 0.0;
    Vector row_sums(d.out_dim());
    for (int i = 0; i < n; ++i) {
        row_sums.setZero();
        const int j_lo = std::max(0, i - d.band());
        for (int j = j_lo; j <= i; ++j)
            row_sums += d.block(i, j).cwiseAbs().rowwise().sum();
        worst = std::max(worst, row_sums.maxCoeff());
    }
    return worst;
}

Signal apply(const LtvOperator& d, const Signal& w) {
    require(d.in_dim() == w.dim(), "apply(ltv): input dimension mismatch");
    require(d.horizon() == w.horizon(), "apply(ltv): horizon mismatch");
    Signal y(d.out_dim(), w.horizon());
    for (int i = 0; i < d.horizon(); ++i) {
        const int j_lo = d.band() < 0 ? i + 1 : std::max(0, i - d.band());
        for (int j = j_lo; j <= i; ++j) y.sample(i).noalias() += d.block(i, j) * w.sample(j);
    }
    return y;
}

LtvOperator compose(const LtvOperator& a, const LtvOperator& b) {
    require(a.in_dim() == b.out_dim(), "compose(ltv): inner dimensions must match");
    require(a.horizon() == b.horizon(), "compose(ltv): horizon mismatch");
    const int n = a.horizon();
    LtvOperator c(a.out_dim(), b.in_dim(), n);
    if (a.band() < 0 || b.band() < 0) {
        c.set_structure(a.strictly_causal() || b.strictly_causal(), -1);
        return c;
    }
    for (int i = 0; i < n; ++i) {
        const int k_lo = std::max(0, i - a.band());
        for (int j = 0; j <= i; ++j) {
            const int lo = std::max(k_lo, j);
            const int hi = std::min(i, j + b.band());
            if (lo > hi) continue;
            auto cij = c.block(i, j);
            for (int k = lo; k <= hi; ++k) cij.noalias() += a.block(i, k) * b.block(k, j);
        }
    }
    c.set_structure(a.strictly_causal() || b.strictly_causal(),
                    std::min(n - 1, a.band() + b.band()));
    return c;
}

LtvOperator add(const LtvOperator& a, const LtvOperator& b) {
    require(a.out_dim() == b.out_dim() && a.in_dim() == b.in_dim() && a.horizon() == b.horizon(),
            "add(ltv): dimension mismatch");
    LtvOperator c(a.out_dim(), a.in_dim(), a.horizon());
    c.dense() = a.dense() + b.dense();
    c.set_structure(a.strictly_causal() && b.strictly_causal(), std::max(a.band(), b.band()));
    return c;
}

LtvOperator scaled(const LtvOperator& a, double factor) {
    LtvOperator c(a.out_dim(), a.in_dim(), a.horizon());
    c.dense() = a.dense() * factor;
    c.set_structure(a.strictly_causal(), factor == 0.0 ? -1 : a.band());
    return c;
}

LtvOperator feedback_inverse(const LtvOperator& d) {
    require(d.out_dim() == d.in_dim(), "feedback_inverse: operator must be square");
    require(d.strictly_causal(),
            "feedback_inverse: (I - d)^{-1} is only guaranteed for strictly causal d");
    const int n = d.horizon();
    const int dim = d.out_dim();
    // Forward substitution on (I - d) x = e_j, all columns at once:
    // X(i,j) = delta_ij I + sum_{k<i} d(i,k) X(k,j).
    LtvOperator x = LtvOperator::identity(dim, n);
    if (d.band() < 0) return x;
    for (int i = 1; i < n; ++i) {
        const int k_lo = std::max(0, i - d.band());
        for (int j = 0; j <= i; ++j) {
            auto xij = x.block(i, j);
            for (int k = std::max(k_lo, j); k < i; ++k)
                xij.noalias() += d.block(i, k) * x.block(k, j);
        }
    }
    x.set_structure(false, n - 1);
    return x;
}

LtvOperator lift(const FirResponse& g, int horizon) {
    require(horizon >= 1, "lift: horizon must be >= 1");
    LtvOperator d(g.out_dim(), g.in_dim(), horizon);
    for (int i = 0; i < horizon; ++i) {
        const int k_hi = std::min(g.num_taps(), i);
        for (int k = 1; k <= k_hi; ++k) d.block(i, i - k) = g.tap(k);
    }
    d.set_structure(true, std::min(horizon - 1, g.num_taps()) > 0
                              ? std::min(horizon - 1, g.num_taps())
                              : -1);
    return d;
}

LtvOperator lift_advanced(const FirResponse& g, int horizon) {
    require(horizon >= 1, "lift_advanced: horizon must be >= 1");
    LtvOperator d(g.out_dim(), g.in_dim(), horizon);
    for (int i = 0; i < horizon; ++i) {
        const int k_hi = std::min(g.num_taps(), i + 1);
        for (int k = 1; k <= k_hi; ++k) d.block(i, i - k + 1) = g.tap(k);
    }
    d.set_structure(false, g.num_taps() == 0 ? -1 : std::min(horizon - 1, g.num_taps() - 1));
    return d;
}

LtvOperator hstack(const LtvOperator& a, const LtvOperator& b) {
    require(a.out_dim() == b.out_dim(), "hstack(ltv): output dimension mismatch");
    require(a.horizon() == b.horizon(), "hstack(ltv): horizon mismatch");
    LtvOperator c(a.out_dim(), a.in_dim() + b.in_dim(), a.horizon());
    for (int i = 0; i < a.horizon(); ++i) {
        for (int j = 0; j <= i; ++j) {
            c.block(i, j).leftCols(a.in_dim()) = a.block(i, j);
            c.block(i, j).rightCols(b.in_dim()) = b.block(i, j);
        }
    }
    c.set_structure(a.strictly_causal() && b.strictly_causal(), std::max(a.band(), b.band()));
    return c;
}

LtvOperator truncate(const LtvOperator& d, int horizon) {
    require(horizon >= 1 && horizon <= d.horizon(), "truncate: bad horizon");
    LtvOperator c(d.out_dim(), d.in_dim(), horizon);
    c.dense() = d.dense().topLeftCorner(static_cast<Eigen::Index>(horizon) * d.out_dim(),
                                        static_cast<Eigen::Index>(horizon) * d.in_dim());
    c.set_structure(d.strictly_causal(), std::min(d.band(), horizon - 1));
    return c;
}

Signal worst_case_input(const LtvOperator& d) {
    Signal w(d.in_dim(), d.horizon());
    w.samples().setOnes();
    if (d.band() < 0) return w;
    // Locate the scalar row with the largest absolute row sum, then feed the
    // matching sign pattern; the output at that row equals the norm.
    int best_i = 0;
    int best_r = 0;
    double best = -1.0;
    Vector row_sums(d.out_dim());
    for (int i = 0; i < d.horizon(); ++i) {
        row_sums.setZero();
        for (int j = std::max(0, i - d.band()); j <= i; ++j)
            row_sums += d.block(i, j).cwiseAbs().rowwise().sum();
        for (int r = 0; r < d.out_dim(); ++r) {
            if (row_sums(r) > best) {
                best = row_sums(r);
                best_i = i;
                best_r = r;
            }
        }
    }
    for (int j = std::max(0, best_i - d.band()); j <= best_i; ++j) {
        const auto blk = d.block(best_i, j);
        for (int c = 0; c < d.in_dim(); ++c)
            w.sample(j)(c) = blk(best_r, c) < 0.0 ? -1.0 : 1.0;
    }
    return w;
}

}  // namespace sls
