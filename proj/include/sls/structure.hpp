#pragma once

#include "sls/plant.hpp"

#include <string>
#include <vector>

namespace sls {

/// Directed interaction graph read off the sparsity of (A, B): state j
/// influences state i when A(i,j) != 0 (self-loops always present), and
/// actuator a attaches to every state it drives (B(i,a) != 0).
class SupportGraph {
public:
    static SupportGraph from_plant(const Plant& plant);

    int num_states() const { return n_; }
    int num_actuators() const { return static_cast<int>(actuator_sites_.size()); }

    /// Hop distance from state j to state i (graph-directed), or a value
    /// larger than any diameter when unreachable.
    int distance(int from, int to) const { return dist_[from][to]; }

    /// Hop distance from state j to actuator a: the closest state a drives.
    int actuator_distance(int from, int actuator) const;

    static constexpr int kUnreachable = 1 << 20;

private:
    int n_ = 0;
    std::vector<std::vector<int>> dist_;  // dist_[from][to]
    std::vector<std::vector<int>> actuator_sites_;
};

/// Per-tap allow-patterns for the response entries.  Masked-off entries are
/// pinned to exactly zero during synthesis.
struct StructureMask {
    std::vector<Eigen::ArrayXXi> phi_x;  // one n x n 0/1 pattern per tap
    std::vector<Eigen::ArrayXXi> phi_u;  // one p x n pattern per tap

    int fir_horizon() const { return static_cast<int>(phi_x.size()); }
    bool allows_x(int k, int i, int j) const { return phi_x[k - 1](i, j) != 0; }
    bool allows_u(int k, int a, int j) const { return phi_u[k - 1](a, j) != 0; }
};

/// d-hop locality with an optional communication delay of tau steps per hop:
/// entry (i,j) of Phi_x[k] is allowed when dist(j -> i) <= r(k) where
/// r(k) = min(d, floor((k-1)/tau)) if tau > 0 and r(k) = d otherwise; Phi_u
/// uses the actuator distance.  The k = 1 diagonal is always allowed.
StructureMask locality_mask(const SupportGraph& graph, int d, int fir_horizon, int tau = 0);

StructureMask all_allowed_mask(int n, int p, int fir_horizon);

/// Is every nonzero of the response inside the mask?  Entries outside the
/// mask must be exactly zero.
bool mask_satisfied(const StructureMask& mask, const class SystemResponse& resp);

/// Bidirectional chain benchmark: tridiagonal A (a_self on the diagonal,
/// a_couple on both off-diagonals) and B = b_diag * I.
Plant chain_system(int n, double a_self, double a_couple, double b_diag);

/// JSON import/export, schema: {"fir_horizon": T, "phi_x": [tap][i][j] 0/1,
/// "phi_u": [tap][a][j] 0/1}.
std::string mask_to_json(const StructureMask& mask);
StructureMask mask_from_json(const std::string& text);

}  // namespace sls
