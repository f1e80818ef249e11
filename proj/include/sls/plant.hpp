#pragma once

#include "sls/ltv.hpp"
#include "sls/types.hpp"

namespace sls {

/// Nominal LTI dynamics x_{t+1} = A x_t + B u_t + w_t, x_0 = 0.
struct Plant {
    Matrix A;
    Matrix B;

    Plant(Matrix a, Matrix b) : A(std::move(a)), B(std::move(b)) {
        require(A.rows() == A.cols(), "Plant: A must be square");
        require(B.rows() == A.rows(), "Plant: B row count must match A");
        require(all_finite(A) && all_finite(B), "Plant: entries must be finite");
    }

    int num_states() const { return static_cast<int>(A.rows()); }
    int num_inputs() const { return static_cast<int>(B.cols()); }
};

/// Weighted output z = C x + D u whose l-infinity gain from w is the
/// performance measure.
struct CostOutput {
    Matrix C;
    Matrix D;

    CostOutput(Matrix c, Matrix d) : C(std::move(c)), D(std::move(d)) {
        require(C.rows() == D.rows(), "CostOutput: C and D must share a row count");
        require(all_finite(C) && all_finite(D), "CostOutput: entries must be finite");
    }

    int num_outputs() const { return static_cast<int>(C.rows()); }
};

/// Nominal plant plus causal perturbations of its A and B operators with
/// || [delta_a, delta_b] || <= epsilon (checked at construction).
class UncertainPlant {
public:
    UncertainPlant(Plant nominal, LtvOperator delta_a, LtvOperator delta_b, double epsilon);

    /// epsilon = 0 convenience: zero perturbations on the given horizon.
    static UncertainPlant exact(Plant nominal, int horizon);

    const Plant& nominal() const { return nominal_; }
    const LtvOperator& delta_a() const { return delta_a_; }
    const LtvOperator& delta_b() const { return delta_b_; }
    double epsilon() const { return epsilon_; }
    int horizon() const { return delta_a_.horizon(); }

private:
    Plant nominal_;
    LtvOperator delta_a_;
    LtvOperator delta_b_;
    double epsilon_;
};

}  // namespace sls
