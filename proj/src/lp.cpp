#include "sls/lp.hpp"

#include "sls/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <utility>

namespace sls {

namespace {

constexpr double kPivotTol = 1e-10;

bool finite(double v) { return std::isfinite(v); }

// ---------------------------------------------------------------------------
// Standard form: min c'y, A y = b, y >= 0, b >= 0.  Original variables are
// shifted, mirrored, or split; finite upper bounds of shifted variables turn
// into extra <= rows; every <= row gets a slack column.
// ---------------------------------------------------------------------------

enum class VarKind { Shifted, Mirrored, Split };

struct VarMap {
    VarKind kind;
    int col_a;
    int col_b;    // Split only
    double off;   // shift/mirror offset
};

struct StdForm {
    int m = 0;
    int n_real = 0;  // structural + slack columns
    int first_slack = 0;
    std::vector<std::vector<std::pair<int, double>>> cols;  // per column (row, coef)
    std::vector<double> cost;
    std::vector<double> rhs;
    double obj_const = 0.0;
    std::vector<VarMap> vars;
};

struct DenseRowAcc {
    std::vector<double> val;
    std::vector<int> touched;
    explicit DenseRowAcc(int n) : val(n, 0.0) {}
    void add(int j, double v) {
        if (val[j] == 0.0 && v != 0.0) touched.push_back(j);
        val[j] += v;
    }
    void reset() {
        for (int j : touched) val[j] = 0.0;
        touched.clear();
    }
};

void validate(const LinearProgram& lp) {
    require(static_cast<int>(lp.objective.size()) == lp.num_vars &&
                static_cast<int>(lp.lower.size()) == lp.num_vars &&
                static_cast<int>(lp.upper.size()) == lp.num_vars,
            "LinearProgram: inconsistent variable arrays");
    require(lp.eq_rows.size() == lp.eq_rhs.size() && lp.le_rows.size() == lp.le_rhs.size(),
            "LinearProgram: inconsistent row arrays");
    for (double c : lp.objective) require(finite(c), "LinearProgram: objective must be finite");
    for (double b : lp.eq_rhs) require(finite(b), "LinearProgram: rhs must be finite");
    for (double b : lp.le_rhs) require(finite(b), "LinearProgram: rhs must be finite");
    auto check_rows = [&](const std::vector<LpRow>& rows) {
        for (const LpRow& row : rows)
            for (const LpTerm& t : row) {
                require(t.col >= 0 && t.col < lp.num_vars, "LinearProgram: column out of range");
                require(finite(t.coef), "LinearProgram: coefficient must be finite");
            }
    };
    check_rows(lp.eq_rows);
    check_rows(lp.le_rows);
    for (int j = 0; j < lp.num_vars; ++j) {
        require(!std::isnan(lp.lower[j]) && !std::isnan(lp.upper[j]), "LinearProgram: NaN bound");
        require(lp.lower[j] < kInf && lp.upper[j] > -kInf,
                "LinearProgram: bound fixes variable at infinity");
    }
}

StdForm build_std_form(const LinearProgram& lp) {
    StdForm sf;
    sf.vars.resize(lp.num_vars);

    std::vector<std::pair<int, double>> extra_bound_rows;  // (std col, ub - lb)
    for (int j = 0; j < lp.num_vars; ++j) {
        const double lo = lp.lower[j];
        const double hi = lp.upper[j];
        VarMap vm{};
        if (lo > -kInf) {
            vm.kind = VarKind::Shifted;
            vm.off = lo;
            vm.col_a = sf.n_real++;
            if (hi < kInf) extra_bound_rows.emplace_back(vm.col_a, hi - lo);
        } else if (hi < kInf) {
            vm.kind = VarKind::Mirrored;
            vm.off = hi;
            vm.col_a = sf.n_real++;
        } else {
            vm.kind = VarKind::Split;
            vm.col_a = sf.n_real++;
            vm.col_b = sf.n_real++;
        }
        sf.vars[j] = vm;
    }
    const int n_struct = sf.n_real;
    sf.cols.resize(n_struct);
    sf.cost.assign(n_struct, 0.0);

    for (int j = 0; j < lp.num_vars; ++j) {
        const VarMap& vm = sf.vars[j];
        const double c = lp.objective[j];
        switch (vm.kind) {
            case VarKind::Shifted:
                sf.cost[vm.col_a] += c;
                sf.obj_const += c * vm.off;
                break;
            case VarKind::Mirrored:
                sf.cost[vm.col_a] -= c;
                sf.obj_const += c * vm.off;
                break;
            case VarKind::Split:
                sf.cost[vm.col_a] += c;
                sf.cost[vm.col_b] -= c;
                break;
        }
    }

    sf.m = static_cast<int>(lp.eq_rows.size() + lp.le_rows.size() + extra_bound_rows.size());
    sf.rhs.assign(sf.m, 0.0);

    DenseRowAcc acc(n_struct);
    std::vector<int> sorted_cols;
    auto emit_row = [&](int r, const LpRow& row, double rhs, bool with_slack) {
        acc.reset();
        double b = rhs;
        for (const LpTerm& t : row) {
            const VarMap& vm = sf.vars[t.col];
            switch (vm.kind) {
                case VarKind::Shifted:
                    acc.add(vm.col_a, t.coef);
                    b -= t.coef * vm.off;
                    break;
                case VarKind::Mirrored:
                    acc.add(vm.col_a, -t.coef);
                    b -= t.coef * vm.off;
                    break;
                case VarKind::Split:
                    acc.add(vm.col_a, t.coef);
                    acc.add(vm.col_b, -t.coef);
                    break;
            }
        }
        // Equilibrate: scale the row so its largest coefficient is 1 in
        // magnitude.  This keeps one huge row (a bisection probe at large
        // gamma, say) from drowning out O(1) infeasibilities elsewhere.
        double row_max = 0.0;
        for (int jc : acc.touched) row_max = std::max(row_max, std::abs(acc.val[jc]));
        const double row_scale = row_max > 0.0 ? 1.0 / row_max : 1.0;
        b *= row_scale;
        const double sign = b < 0.0 ? -row_scale : row_scale;
        sf.rhs[r] = std::abs(b);
        sorted_cols.assign(acc.touched.begin(), acc.touched.end());
        std::sort(sorted_cols.begin(), sorted_cols.end());
        for (int jc : sorted_cols)
            if (acc.val[jc] != 0.0) sf.cols[jc].emplace_back(r, sign * acc.val[jc]);
        if (with_slack) {
            sf.cols.push_back({{r, sign > 0.0 ? 1.0 : -1.0}});
            sf.cost.push_back(0.0);
            ++sf.n_real;
        }
    };

    int r = 0;
    for (size_t i = 0; i < lp.eq_rows.size(); ++i, ++r) emit_row(r, lp.eq_rows[i], lp.eq_rhs[i], false);
    sf.first_slack = sf.n_real;
    for (size_t i = 0; i < lp.le_rows.size(); ++i, ++r) emit_row(r, lp.le_rows[i], lp.le_rhs[i], true);
    for (const auto& [col, ub] : extra_bound_rows) {
        const double sign = ub < 0.0 ? -1.0 : 1.0;
        sf.rhs[r] = sign * ub;
        sf.cols[col].emplace_back(r, sign);
        sf.cols.push_back({{r, sign}});
        sf.cost.push_back(0.0);
        ++sf.n_real;
        ++r;
    }
    return sf;
}

// ---------------------------------------------------------------------------
// Two-phase revised simplex with a product-form inverse.  Dantzig pricing
// with a pivot-quality cascade carries the normal iterations; Bland's rule
// (lowest-index entering and leaving) takes over during degenerate stalls,
// which is what guarantees termination.
// ---------------------------------------------------------------------------

struct Eta {
    int r;
    double diag;
    std::vector<std::pair<int, double>> off;
};

class Simplex {
public:
    Simplex(const StdForm& sf, double feas_tol, long max_iters)
        : sf_(sf),
          tol_(feas_tol),
          max_iters_(max_iters),
          m_(sf.m),
          basis_(sf.m, -1),
          art_sign_(sf.m, 1.0),
          in_basis_(sf.n_real, 0),
          xb_(sf.m, 0.0),
          work_(sf.m, 0.0),
          resid_work_(sf.m, 0.0) {}

    long iterations() const { return iters_; }
    const std::vector<int>& basis() const { return basis_; }

    double phase1_objective() const {
        double s = 0.0;
        for (int r = 0; r < m_; ++r)
            if (basis_[r] >= sf_.n_real) s += std::max(xb_[r], 0.0);
        return s;
    }

    void crash();
    void set_basis(const std::vector<int>& basis);
    void refine_basic_values();
    void refactorize();
    LpStatus iterate(bool phase1);

    std::vector<double> real_values() const {
        std::vector<double> x(sf_.n_real, 0.0);
        for (int r = 0; r < m_; ++r)
            if (basis_[r] < sf_.n_real) x[basis_[r]] = xb_[r];
        return x;
    }

    std::vector<double> duals(bool phase1) const {
        std::vector<double> y(m_);
        for (int r = 0; r < m_; ++r) y[r] = basis_cost(basis_[r], phase1);
        btran(y);
        return y;
    }

    double reduced_cost(int j, const std::vector<double>& y, bool phase1) const {
        double rc = phase1 ? 0.0 : sf_.cost[j];
        for (const auto& [r, v] : sf_.cols[j]) rc -= y[r] * v;
        return rc;
    }

private:
    double basis_cost(int col, bool phase1) const {
        if (col >= sf_.n_real) return phase1 ? 1.0 : 0.0;
        return phase1 ? 0.0 : sf_.cost[col];
    }

    void column_into(int j, std::vector<double>& z) const {
        std::fill(z.begin(), z.end(), 0.0);
        if (j < sf_.n_real) {
            for (const auto& [r, v] : sf_.cols[j]) z[r] += v;
        } else {
            z[j - sf_.n_real] = art_sign_[j - sf_.n_real];
        }
    }

    void ftran(std::vector<double>& z) const {
        for (const Eta& e : etas_) {
            const double zr = z[e.r];
            if (zr == 0.0) continue;
            const double t = zr / e.diag;
            for (const auto& [i, v] : e.off) z[i] -= v * t;
            z[e.r] = t;
        }
    }

    void btran(std::vector<double>& y) const {
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            double acc = y[it->r];
            for (const auto& [i, v] : it->off) acc -= y[i] * v;
            y[it->r] = acc / it->diag;
        }
    }

    void push_eta(const std::vector<double>& z, int r) {
        Eta e;
        e.r = r;
        e.diag = z[r];
        for (int i = 0; i < m_; ++i)
            if (i != r && z[i] != 0.0) e.off.emplace_back(i, z[i]);
        etas_.push_back(std::move(e));
    }

    const StdForm& sf_;
    double tol_;
    long max_iters_;
    int m_;
    std::vector<int> basis_;
    std::vector<double> art_sign_;
    std::vector<char> in_basis_;
    std::vector<double> xb_;
    mutable std::vector<double> work_;
    std::vector<double> resid_work_;
    std::vector<Eta> etas_;
    long iters_ = 0;
    long since_refactor_ = 0;
    long degenerate_streak_ = 0;
    double eta_growth_ = 1.0;
    std::vector<std::pair<double, int>> candidates_;
};

// Initial basis: feasible slacks first, then a batched column-singleton crash
// over the remaining rows (picking the sign-feasible member of each +/- split
// pair), artificials elsewhere.
void Simplex::crash() {
    std::vector<char> covered(m_, 0);

    for (int j = sf_.first_slack; j < sf_.n_real; ++j) {
        const auto& [r, v] = sf_.cols[j][0];
        if (v > 0.0 && !covered[r]) {
            covered[r] = 1;
            basis_[r] = j;
            in_basis_[j] = 1;
        }
    }

    std::vector<std::vector<int>> row_to_cols(m_);
    std::vector<int> colcount(sf_.first_slack, 0);
    for (int j = 0; j < sf_.first_slack; ++j)
        for (const auto& [r, v] : sf_.cols[j])
            if (std::abs(v) > kPivotTol) {
                row_to_cols[r].push_back(j);
                if (!covered[r]) ++colcount[j];
            }

    std::vector<std::vector<int>> candidates(m_);
    std::vector<std::vector<int>> batches;
    std::vector<char> processed(sf_.first_slack, 0);
    for (;;) {
        std::vector<std::pair<int, int>> hits;  // (row, col)
        for (int j = 0; j < sf_.first_slack; ++j) {
            if (processed[j] || colcount[j] != 1) continue;
            for (const auto& [r, v] : sf_.cols[j])
                if (!covered[r] && std::abs(v) > kPivotTol) {
                    hits.emplace_back(r, j);
                    break;
                }
        }
        if (hits.empty()) break;
        std::vector<int> batch_rows;
        for (const auto& [r, j] : hits) {
            if (candidates[r].empty()) batch_rows.push_back(r);
            candidates[r].push_back(j);
            processed[j] = 1;
        }
        std::sort(batch_rows.begin(), batch_rows.end());
        for (int r : batch_rows) covered[r] = 1;
        for (int r : batch_rows)
            for (int j : row_to_cols[r])
                if (!processed[j]) --colcount[j];
        batches.push_back(std::move(batch_rows));
    }

    // Reverse-order triangular solve; a candidate whose value comes out
    // negative falls back to the next one, then to an artificial.
    std::vector<double> resid = sf_.rhs;
    for (auto bit = batches.rbegin(); bit != batches.rend(); ++bit) {
        for (int r : *bit) {
            int pick = -1;
            double val = 0.0;
            for (int j : candidates[r]) {
                double coef = 0.0;
                for (const auto& [rr, v] : sf_.cols[j])
                    if (rr == r) coef += v;
                if (std::abs(coef) <= kPivotTol) continue;
                const double cand = resid[r] / coef;
                if (cand >= -tol_) {
                    pick = j;
                    val = cand;
                    break;
                }
            }
            if (pick < 0) continue;  // artificial below
            basis_[r] = pick;
            in_basis_[pick] = 1;
            for (const auto& [rr, v] : sf_.cols[pick]) resid[rr] -= v * val;
        }
    }

    // Slack rows whose residual went negative, unresolved peel rows, and
    // never-covered rows all take a sign-matched artificial.
    for (int r = 0; r < m_; ++r) {
        const bool has_slack = basis_[r] >= sf_.first_slack && basis_[r] < sf_.n_real;
        if (has_slack && resid[r] < -tol_) {
            in_basis_[basis_[r]] = 0;
            basis_[r] = -1;
        }
        if (basis_[r] < 0) {
            basis_[r] = sf_.n_real + r;
            art_sign_[r] = resid[r] < 0.0 ? -1.0 : 1.0;
        }
    }

    refactorize();
}

void Simplex::set_basis(const std::vector<int>& basis) {
    require(static_cast<int>(basis.size()) == m_, "set_basis: wrong size");
    basis_ = basis;
    std::fill(in_basis_.begin(), in_basis_.end(), 0);
    for (int c : basis_) {
        require(c >= 0 && c < sf_.n_real + m_, "set_basis: column out of range");
        if (c < sf_.n_real) in_basis_[c] = 1;
    }
    refactorize();
}

void Simplex::refactorize() {
    etas_.clear();
    etas_.reserve(static_cast<size_t>(m_));
    since_refactor_ = 0;
    eta_growth_ = 1.0;

    // Row-singleton peel: a fill-free pivot order for the near-triangular
    // bases these LPs produce.  Whatever is left pivots with partial
    // pivoting over the remaining rows.
    std::vector<int> rowcount(m_, 0);
    std::vector<std::vector<int>> rowpos(m_);
    for (int p = 0; p < m_; ++p) {
        const int col = basis_[p];
        if (col >= sf_.n_real) {
            ++rowcount[col - sf_.n_real];
            rowpos[col - sf_.n_real].push_back(p);
        } else {
            for (const auto& [r, v] : sf_.cols[col])
                if (v != 0.0) {
                    ++rowcount[r];
                    rowpos[r].push_back(p);
                }
        }
    }
    std::deque<int> queue;
    for (int r = 0; r < m_; ++r)
        if (rowcount[r] == 1) queue.push_back(r);

    std::vector<std::pair<int, int>> order;  // (basis position, pivot row or -1)
    order.reserve(static_cast<size_t>(m_));
    std::vector<char> row_used(m_, 0), pos_done(m_, 0);
    while (!queue.empty()) {
        const int r = queue.front();
        queue.pop_front();
        if (row_used[r] || rowcount[r] != 1) continue;
        int pos = -1;
        for (int p : rowpos[r])
            if (!pos_done[p]) pos = p;
        if (pos < 0) continue;
        order.emplace_back(pos, r);
        row_used[r] = 1;
        pos_done[pos] = 1;
        const int col = basis_[pos];
        if (col >= sf_.n_real) continue;
        for (const auto& [r2, v] : sf_.cols[col]) {
            if (v == 0.0 || row_used[r2]) continue;
            if (--rowcount[r2] == 1) queue.push_back(r2);
        }
    }
    for (int p = 0; p < m_; ++p)
        if (!pos_done[p]) order.emplace_back(p, -1);

    std::vector<double>& z = work_;
    std::vector<int> new_basis(m_, -1);
    std::vector<int> deferred;
    for (const auto& [pos, row_hint] : order) {
        if (row_hint < 0) {
            deferred.push_back(pos);
            continue;
        }
        column_into(basis_[pos], z);
        ftran(z);
        if (std::abs(z[row_hint]) > kPivotTol && new_basis[row_hint] < 0) {
            push_eta(z, row_hint);
            new_basis[row_hint] = basis_[pos];
        } else {
            deferred.push_back(pos);
        }
    }
    for (int pos : deferred) {
        column_into(basis_[pos], z);
        ftran(z);
        int r = -1;
        double best = kPivotTol;
        for (int i = 0; i < m_; ++i) {
            if (new_basis[i] >= 0) continue;
            if (std::abs(z[i]) > best) {
                best = std::abs(z[i]);
                r = i;
            }
        }
        if (r < 0) throw LpFault("lp: singular basis during refactorization");
        push_eta(z, r);
        new_basis[r] = basis_[pos];
    }
    basis_ = new_basis;

    std::copy(sf_.rhs.begin(), sf_.rhs.end(), z.begin());
    ftran(z);
    xb_ = z;
    refine_basic_values();
}

// One round of iterative refinement on B xb = rhs.
void Simplex::refine_basic_values() {
    std::vector<double>& r = resid_work_;
    std::copy(sf_.rhs.begin(), sf_.rhs.end(), r.begin());
    for (int i = 0; i < m_; ++i) {
        const double xi = xb_[i];
        if (xi == 0.0) continue;
        const int col = basis_[i];
        if (col >= sf_.n_real) {
            r[col - sf_.n_real] -= art_sign_[col - sf_.n_real] * xi;
        } else {
            for (const auto& [rr, v] : sf_.cols[col]) r[rr] -= v * xi;
        }
    }
    ftran(r);
    for (int i = 0; i < m_; ++i) xb_[i] += r[i];
}

LpStatus Simplex::iterate(bool phase1) {
    std::vector<double> z(m_, 0.0);
    int verify_rounds = 0;

    // residual of the basis equation B z = a_col; large values flag eta
    // drift or ill conditioning.  Leaves the residual in resid_work_ so a
    // refinement step can reuse it.
    auto transform_error = [&](int col, const std::vector<double>& zz) {
        std::vector<double>& r = resid_work_;
        column_into(col, r);
        double a_scale = 1.0;
        for (int i = 0; i < m_; ++i) a_scale = std::max(a_scale, std::abs(r[i]));
        for (int i = 0; i < m_; ++i) {
            const double zi = zz[i];
            if (zi == 0.0) continue;
            const int bcol = basis_[i];
            if (bcol >= sf_.n_real) {
                r[bcol - sf_.n_real] -= art_sign_[bcol - sf_.n_real] * zi;
            } else {
                for (const auto& [rr, v] : sf_.cols[bcol]) r[rr] -= v * zi;
            }
        }
        double err = 0.0;
        for (int i = 0; i < m_; ++i) err = std::max(err, std::abs(r[i]));
        return err / a_scale;
    };

    struct Step {
        int leave = -1;      // -1: unbounded direction
        double z_peak = 0.0;
        bool drifted = false;
    };
    // FTRAN the candidate column with iterative refinement, then run the
    // ratio test (Bland index ties in strict mode, largest-pivot otherwise).
    auto probe = [&](int col, bool strict_bland) {
        Step step;
        column_into(col, z);
        ftran(z);
        double err = transform_error(col, z);
        for (int round = 0; round < 2 && err > 1e-11; ++round) {
            ftran(resid_work_);  // correction = B^{-1} residual
            for (int i = 0; i < m_; ++i) z[i] += resid_work_[i];
            err = transform_error(col, z);
        }
        if (err > 1e-7) {
            step.drifted = true;
            return step;
        }
        for (int i = 0; i < m_; ++i) step.z_peak = std::max(step.z_peak, std::abs(z[i]));
        const double piv_tol = std::max(kPivotTol, 1e-9 * step.z_peak);
        double best_ratio = kInf;
        for (int i = 0; i < m_; ++i) {
            const bool zeroed_artificial = basis_[i] >= sf_.n_real && xb_[i] <= tol_;
            double zi = z[i];
            if (zeroed_artificial && zi < 0.0) zi = -zi;
            if (zi <= piv_tol) continue;
            const double ratio = std::max(xb_[i], 0.0) / zi;
            if (step.leave < 0) {
                best_ratio = ratio;
                step.leave = i;
                continue;
            }
            const double window = 1e-10 * std::max(1.0, best_ratio);
            if (ratio < best_ratio - window) {
                best_ratio = ratio;
                step.leave = i;
            } else if (ratio <= best_ratio + window) {
                const bool better = strict_bland
                                        ? basis_[i] < basis_[step.leave]
                                        : std::abs(z[i]) > std::abs(z[step.leave]) + 1e-12;
                if (better) step.leave = i;
            }
        }
        return step;
    };

    for (;;) {
        if (since_refactor_ >= 100 || eta_growth_ > 1e6) refactorize();

        const std::vector<double> y = duals(phase1);

        // Entering rule: Dantzig (most negative reduced cost, lowest-index
        // ties) while iterations make progress; a degenerate stall switches
        // to Bland's rule, whose anti-cycling guarantee breaks it.  Dantzig
        // mode keeps a shortlist of runners-up so a candidate whose ratio
        // test forces a tiny, basis-wrecking pivot can be passed over.
        const bool strict_bland = degenerate_streak_ >= 40;
        int enter = -1;
        double enter_rc = -tol_;
        candidates_.clear();
        for (int j = 0; j < sf_.n_real; ++j) {
            if (in_basis_[j]) continue;
            const double rc = reduced_cost(j, y, phase1);
            if (rc >= -tol_) continue;
            if (rc < enter_rc) {
                enter_rc = rc;
                enter = j;
                if (strict_bland) break;
            }
            if (!strict_bland) candidates_.push_back({rc, j});
        }
        if (enter < 0) {
            // Re-price against a fresh factorization before declaring
            // optimality; accept once the answer is stable.
            if (verify_rounds < 3 && since_refactor_ > 0) {
                refactorize();
                ++verify_rounds;
                continue;
            }
            return LpStatus::Optimal;
        }
        verify_rounds = 0;

        Step step;
        if (strict_bland) {
            step = probe(enter, true);
        } else {
            std::sort(candidates_.begin(), candidates_.end());
            const size_t shortlist = std::min<size_t>(candidates_.size(), 8);
            int fallback = -1;
            Step fallback_step;
            for (size_t k = 0; k < shortlist; ++k) {
                const int col = candidates_[k].second;
                const Step trial = probe(col, false);
                if (trial.drifted) {
                    step = trial;
                    enter = col;
                    break;
                }
                if (trial.leave >= 0 &&
                    std::abs(z[trial.leave]) >= 1e-5 * trial.z_peak) {
                    step = trial;
                    enter = col;
                    break;
                }
                if (fallback < 0) {
                    fallback = col;
                    fallback_step = trial;
                }
                if (k + 1 == shortlist) {
                    enter = fallback;
                    step = probe(fallback, false);  // restore z for the pivot
                }
            }
        }

        if (step.drifted) {
            if (since_refactor_ > 0) {
                refactorize();
                continue;
            }
            throw LpFault("lp: transformed column inconsistent with a fresh factorization");
        }
        if (step.leave < 0) {
            // Unboundedness must be certified from a fresh factorization.
            if (since_refactor_ > 0) {
                refactorize();
                continue;
            }
            return LpStatus::Unbounded;
        }
        const int leave = step.leave;

        const double t = std::max(xb_[leave], 0.0) / std::abs(z[leave]);
        degenerate_streak_ = t > 1e-12 ? 0 : degenerate_streak_ + 1;
        for (int i = 0; i < m_; ++i) xb_[i] -= z[i] * t;
        xb_[leave] = t;
        const int old = basis_[leave];
        if (old < sf_.n_real) in_basis_[old] = 0;
        basis_[leave] = enter;
        in_basis_[enter] = 1;
        push_eta(z, leave);
        eta_growth_ *= std::max(1.0, step.z_peak / std::abs(z[leave]));

        ++iters_;
        ++since_refactor_;
        if (iters_ > max_iters_)
            throw LpFault("lp: iteration limit exceeded after " + std::to_string(iters_) +
                          " iterations (m=" + std::to_string(m_) +
                          ", n=" + std::to_string(sf_.n_real) + ")");
    }
}

std::vector<double> decode(const StdForm& sf, const std::vector<double>& real) {
    std::vector<double> x(sf.vars.size());
    for (size_t j = 0; j < sf.vars.size(); ++j) {
        const VarMap& vm = sf.vars[j];
        switch (vm.kind) {
            case VarKind::Shifted: x[j] = vm.off + real[vm.col_a]; break;
            case VarKind::Mirrored: x[j] = vm.off - real[vm.col_a]; break;
            case VarKind::Split: x[j] = real[vm.col_a] - real[vm.col_b]; break;
        }
    }
    return x;
}

LpSolution solve_impl(const LinearProgram& lp, double feas_tol, long max_iters, bool phase1_only) {
    validate(lp);
    LpSolution sol;

    for (int j = 0; j < lp.num_vars; ++j)
        if (lp.lower[j] > lp.upper[j]) return sol;  // Infeasible

    const StdForm sf = build_std_form(lp);
    if (max_iters <= 0) max_iters = 20000 + 50L * (sf.m + sf.n_real);
    Simplex simplex(sf, feas_tol, max_iters);
    simplex.crash();

    // Rows are equilibrated, so phase-1 infeasibility is judged on an
    // absolute scale rather than against the largest right-hand side.
    if (simplex.phase1_objective() > feas_tol) {
        (void)simplex.iterate(true);  // phase 1 is always bounded below
        if (simplex.phase1_objective() > 100.0 * feas_tol) {
            sol.iterations = simplex.iterations();
            return sol;  // Infeasible
        }
    }

    if (!phase1_only) {
        const LpStatus st = simplex.iterate(false);
        if (st == LpStatus::Unbounded) {
            sol.status = LpStatus::Unbounded;
            sol.iterations = simplex.iterations();
            return sol;
        }
    }

    sol.status = LpStatus::Optimal;
    sol.iterations = simplex.iterations();
    sol.basis = simplex.basis();
    sol.x = decode(sf, simplex.real_values());
    sol.objective_value = 0.0;
    for (int j = 0; j < lp.num_vars; ++j) sol.objective_value += lp.objective[j] * sol.x[j];

    // Per-row relative residual so one large-coefficient row cannot mask
    // violations elsewhere.
    double rel_resid = 0.0;
    {
        auto row_gap = [&](const LpRow& row, double rhs, bool equality) {
            double v = 0.0, scale = 1.0;
            for (const LpTerm& t : row) {
                v += t.coef * sol.x[t.col];
                scale = std::max(scale, std::abs(t.coef));
            }
            scale = std::max(scale, std::abs(rhs));
            const double gap = equality ? std::abs(v - rhs) : v - rhs;
            return gap / scale;
        };
        for (size_t i = 0; i < lp.eq_rows.size(); ++i)
            rel_resid = std::max(rel_resid, row_gap(lp.eq_rows[i], lp.eq_rhs[i], true));
        for (size_t i = 0; i < lp.le_rows.size(); ++i)
            rel_resid = std::max(rel_resid, row_gap(lp.le_rows[i], lp.le_rhs[i], false));
        for (int j = 0; j < lp.num_vars; ++j) {
            if (lp.lower[j] > -kInf) rel_resid = std::max(rel_resid, lp.lower[j] - sol.x[j]);
            if (lp.upper[j] < kInf) rel_resid = std::max(rel_resid, sol.x[j] - lp.upper[j]);
        }
    }
    if (rel_resid > 100.0 * std::max(feas_tol, 1e-9))
        throw LpFault("lp: relative solution residual " + std::to_string(rel_resid) +
                      " exceeds tolerance");
    return sol;
}

}  // namespace

LpSolution lp_solve(const LinearProgram& lp, double feas_tol, long max_iters) {
    return solve_impl(lp, feas_tol, max_iters, false);
}

LpSolution lp_feasible(const LinearProgram& lp, double feas_tol, long max_iters) {
    return solve_impl(lp, feas_tol, max_iters, true);
}

double lp_min_reduced_cost(const LinearProgram& lp, const LpSolution& sol) {
    validate(lp);
    require(sol.status == LpStatus::Optimal, "lp_min_reduced_cost: needs an optimal solution");
    const StdForm sf = build_std_form(lp);
    Simplex simplex(sf, 1e-9, 1);
    simplex.set_basis(sol.basis);
    const std::vector<double> y = simplex.duals(false);
    double worst = 0.0;
    std::vector<char> basic(sf.n_real, 0);
    for (int c : sol.basis)
        if (c >= 0 && c < sf.n_real) basic[c] = 1;
    for (int j = 0; j < sf.n_real; ++j)
        if (!basic[j]) worst = std::min(worst, simplex.reduced_cost(j, y, false));
    return worst;
}

double lp_residual(const LinearProgram& lp, const std::vector<double>& x) {
    require(static_cast<int>(x.size()) == lp.num_vars, "lp_residual: wrong point size");
    double worst = 0.0;
    auto row_value = [&](const LpRow& row) {
        double s = 0.0;
        for (const LpTerm& t : row) s += t.coef * x[t.col];
        return s;
    };
    for (size_t i = 0; i < lp.eq_rows.size(); ++i)
        worst = std::max(worst, std::abs(row_value(lp.eq_rows[i]) - lp.eq_rhs[i]));
    for (size_t i = 0; i < lp.le_rows.size(); ++i)
        worst = std::max(worst, row_value(lp.le_rows[i]) - lp.le_rhs[i]);
    for (int j = 0; j < lp.num_vars; ++j) {
        if (lp.lower[j] > -kInf) worst = std::max(worst, lp.lower[j] - x[j]);
        if (lp.upper[j] < kInf) worst = std::max(worst, x[j] - lp.upper[j]);
    }
    return worst;
}

std::string dump_lp(const LinearProgram& lp) {
    std::string out;
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    auto row_text = [&](const LpRow& row) {
        std::string s;
        for (size_t k = 0; k < row.size(); ++k) {
            if (k) s += " + ";
            s += num(row[k].coef) + " x" + std::to_string(row[k].col);
        }
        if (row.empty()) s = "0";
        return s;
    };
    out += "min:";
    for (int j = 0; j < lp.num_vars; ++j)
        if (lp.objective[j] != 0.0) out += " " + num(lp.objective[j]) + " x" + std::to_string(j);
    out += "\n";
    for (size_t i = 0; i < lp.eq_rows.size(); ++i)
        out += row_text(lp.eq_rows[i]) + " = " + num(lp.eq_rhs[i]) + "\n";
    for (size_t i = 0; i < lp.le_rows.size(); ++i)
        out += row_text(lp.le_rows[i]) + " <= " + num(lp.le_rhs[i]) + "\n";
    for (int j = 0; j < lp.num_vars; ++j)
        out += num(lp.lower[j]) + " <= x" + std::to_string(j) + " <= " + num(lp.upper[j]) + "\n";
    return out;
}

}  // namespace sls
