#include "sls/fir.hpp"

namespace sls {

Signal shift_right(const Signal& s) {
    Signal out(s.dim(), s.horizon());
    out.samples().rightCols(s.horizon() - 1) = s.samples().leftCols(s.horizon() - 1);
    return out;
}

Signal shift_left(const Signal& s) {
    Signal out(s.dim(), s.horizon());
    out.samples().leftCols(s.horizon() - 1) = s.samples().rightCols(s.horizon() - 1);
    return out;
}

double l1_norm(const FirResponse& g) {
    if (g.num_taps() == 0) return 0.0;
    Vector row_sums = Vector::Zero(g.out_dim());
    for (const Matrix& tap : g.taps()) row_sums += tap.cwiseAbs().rowwise().sum();
    return row_sums.maxCoeff();
}

FirResponse compose(const FirResponse& a, const FirResponse& b) {
    require(a.in_dim() == b.out_dim(), "compose(fir): inner dimensions must match");
    const int ta = a.num_taps();
    const int tb = b.num_taps();
    FirResponse h(a.out_dim(), b.in_dim());
    if (ta == 0 || tb == 0) return h;
    // h[k] = sum_m a[m] b[k-m]; k runs to ta+tb, tap 1 is structurally zero.
    for (int k = 1; k <= ta + tb; ++k) {
        Matrix hk = Matrix::Zero(a.out_dim(), b.in_dim());
        const int m_lo = std::max(1, k - tb);
        const int m_hi = std::min(ta, k - 1);
        for (int m = m_lo; m <= m_hi; ++m) hk.noalias() += a.tap(m) * b.tap(k - m);
        h.push_tap(std::move(hk));
    }
    return h;
}

Signal apply(const FirResponse& g, const Signal& w) {
    require(g.in_dim() == w.dim(), "apply(fir): input dimension mismatch");
    Signal y(g.out_dim(), w.horizon());
    for (int t = 0; t < w.horizon(); ++t) {
        const int k_hi = std::min(g.num_taps(), t);
        for (int k = 1; k <= k_hi; ++k) y.sample(t).noalias() += g.tap(k) * w.sample(t - k);
    }
    return y;
}

FirResponse add(const FirResponse& a, const FirResponse& b) {
    require(a.out_dim() == b.out_dim() && a.in_dim() == b.in_dim(),
            "add(fir): dimension mismatch");
    FirResponse h(a.out_dim(), a.in_dim());
    const int t = std::max(a.num_taps(), b.num_taps());
    for (int k = 1; k <= t; ++k) {
        Matrix hk = Matrix::Zero(a.out_dim(), a.in_dim());
        if (k <= a.num_taps()) hk += a.tap(k);
        if (k <= b.num_taps()) hk += b.tap(k);
        h.push_tap(std::move(hk));
    }
    return h;
}

FirResponse vstack(const FirResponse& a, const FirResponse& b) {
    require(a.in_dim() == b.in_dim(), "vstack(fir): input dimension mismatch");
    require(a.num_taps() == b.num_taps(), "vstack(fir): tap count mismatch");
    FirResponse h(a.out_dim() + b.out_dim(), a.in_dim());
    for (int k = 1; k <= a.num_taps(); ++k) {
        Matrix hk(h.out_dim(), h.in_dim());
        hk.topRows(a.out_dim()) = a.tap(k);
        hk.bottomRows(b.out_dim()) = b.tap(k);
        h.push_tap(std::move(hk));
    }
    return h;
}

FirResponse premultiply(const Matrix& m, const FirResponse& a) {
    require(m.cols() == a.out_dim(), "premultiply(fir): dimension mismatch");
    FirResponse h(static_cast<int>(m.rows()), a.in_dim());
    for (int k = 1; k <= a.num_taps(); ++k) h.push_tap(m * a.tap(k));
    return h;
}

FirResponse postmultiply(const FirResponse& a, const Matrix& m) {
    require(a.in_dim() == m.rows(), "postmultiply(fir): dimension mismatch");
    FirResponse h(a.out_dim(), static_cast<int>(m.cols()));
    for (int k = 1; k <= a.num_taps(); ++k) h.push_tap(a.tap(k) * m);
    return h;
}

}  // namespace sls
