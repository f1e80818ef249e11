#include "sls/plant.hpp"

namespace sls {

UncertainPlant::UncertainPlant(Plant nominal, LtvOperator delta_a, LtvOperator delta_b,
                               double epsilon)
    : nominal_(std::move(nominal)),
      delta_a_(std::move(delta_a)),
      delta_b_(std::move(delta_b)),
      epsilon_(epsilon) {
    const int n = nominal_.num_states();
    const int p = nominal_.num_inputs();
    require(epsilon_ >= 0.0, "UncertainPlant: epsilon must be nonnegative");
    require(delta_a_.out_dim() == n && delta_a_.in_dim() == n,
            "UncertainPlant: delta_a must be n x n");
    require(delta_b_.out_dim() == n && delta_b_.in_dim() == p,
            "UncertainPlant: delta_b must be n x p");
    require(delta_a_.horizon() == delta_b_.horizon(), "UncertainPlant: horizon mismatch");
    const double stacked = induced_norm(hstack(delta_a_, delta_b_));
    require(stacked <= epsilon_ + 1e-9 * std::max(1.0, epsilon_),
            "UncertainPlant: ||[delta_a, delta_b]|| exceeds epsilon");
}

UncertainPlant UncertainPlant::exact(Plant nominal, int horizon) {
    const int n = nominal.num_states();
    const int p = nominal.num_inputs();
    return UncertainPlant(std::move(nominal), LtvOperator::zero(n, n, horizon),
                          LtvOperator::zero(n, p, horizon), 0.0);
}

}  // namespace sls
