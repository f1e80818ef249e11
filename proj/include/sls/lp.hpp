#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace sls {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct LpTerm {
    int col;
    double coef;
};
using LpRow = std::vector<LpTerm>;

/// min c'x  subject to  A_eq x = b_eq,  A_le x <= b_le,  lower <= x <= upper.
/// Bounds may be infinite.  Strict inequalities never appear here; callers
/// encode margins upstream.
struct LinearProgram {
    int num_vars = 0;
    std::vector<double> objective;
    std::vector<LpRow> eq_rows;
    std::vector<double> eq_rhs;
    std::vector<LpRow> le_rows;
    std::vector<double> le_rhs;
    std::vector<double> lower;
    std::vector<double> upper;

    int add_variable(double lo, double hi, double cost) {
        objective.push_back(cost);
        lower.push_back(lo);
        upper.push_back(hi);
        return num_vars++;
    }
    void add_eq(LpRow row, double rhs) {
        eq_rows.push_back(std::move(row));
        eq_rhs.push_back(rhs);
    }
    void add_le(LpRow row, double rhs) {
        le_rows.push_back(std::move(row));
        le_rhs.push_back(rhs);
    }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> x;
    double objective_value = 0.0;
    long iterations = 0;
    /// Basic column indices of the solver's standard form, one per row, kept
    /// so optimality can be re-certified after the fact.
    std::vector<int> basis;
};

struct LpFault : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Two-phase primal simplex (revised, product-form inverse) with Bland's
/// anti-cycling rule.  Deterministic given input ordering.  Infeasible and
/// Unbounded come back as statuses; hitting max_iters throws LpFault.
LpSolution lp_solve(const LinearProgram& lp, double feas_tol = 1e-9, long max_iters = 0);

/// Phase 1 only.  status is Optimal (with a feasible point) or Infeasible.
LpSolution lp_feasible(const LinearProgram& lp, double feas_tol = 1e-9, long max_iters = 0);

/// Recompute reduced costs for the solution's basis from a fresh
/// factorization; returns the minimum over nonbasic real columns (>= -tol at
/// a genuine optimum).
double lp_min_reduced_cost(const LinearProgram& lp, const LpSolution& sol);

/// Max constraint/bound violation of a candidate point.
double lp_residual(const LinearProgram& lp, const std::vector<double>& x);

/// Plain-text dump, one constraint per line.
std::string dump_lp(const LinearProgram& lp);

}  // namespace sls
