#include "sls/structure.hpp"

#include "sls/response.hpp"

#include <json.hpp>

#include <deque>

namespace sls {

SupportGraph SupportGraph::from_plant(const Plant& plant) {
    SupportGraph g;
    g.n_ = plant.num_states();
    const int n = g.n_;

    std::vector<std::vector<int>> out_edges(n);
    for (int j = 0; j < n; ++j) {
        out_edges[j].push_back(j);  // reflexive
        for (int i = 0; i < n; ++i)
            if (i != j && plant.A(i, j) != 0.0) out_edges[j].push_back(i);
    }

    g.dist_.assign(n, std::vector<int>(n, kUnreachable));
    for (int src = 0; src < n; ++src) {
        std::deque<int> queue{src};
        g.dist_[src][src] = 0;
        while (!queue.empty()) {
            const int v = queue.front();
            queue.pop_front();
            for (int w : out_edges[v])
                if (g.dist_[src][w] == kUnreachable) {
                    g.dist_[src][w] = g.dist_[src][v] + 1;
                    queue.push_back(w);
                }
        }
    }

    g.actuator_sites_.resize(plant.num_inputs());
    for (int a = 0; a < plant.num_inputs(); ++a)
        for (int i = 0; i < n; ++i)
            if (plant.B(i, a) != 0.0) g.actuator_sites_[a].push_back(i);
    return g;
}

int SupportGraph::actuator_distance(int from, int actuator) const {
    int best = kUnreachable;
    for (int site : actuator_sites_[actuator]) best = std::min(best, dist_[from][site]);
    return best;
}

StructureMask locality_mask(const SupportGraph& graph, int d, int fir_horizon, int tau) {
    require(d >= 0, "locality_mask: d must be nonnegative");
    require(tau >= 0, "locality_mask: tau must be nonnegative");
    require(fir_horizon >= 1, "locality_mask: fir_horizon must be >= 1");
    const int n = graph.num_states();
    const int p = graph.num_actuators();
    StructureMask mask;
    for (int k = 1; k <= fir_horizon; ++k) {
        const int radius = tau > 0 ? std::min(d, (k - 1) / tau) : d;
        Eigen::ArrayXXi mx(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                mx(i, j) = (graph.distance(j, i) <= radius || (k == 1 && i == j)) ? 1 : 0;
        Eigen::ArrayXXi mu(p, n);
        for (int a = 0; a < p; ++a)
            for (int j = 0; j < n; ++j)
                mu(a, j) = graph.actuator_distance(j, a) <= radius ? 1 : 0;
        mask.phi_x.push_back(std::move(mx));
        mask.phi_u.push_back(std::move(mu));
    }
    return mask;
}

StructureMask all_allowed_mask(int n, int p, int fir_horizon) {
    StructureMask mask;
    for (int k = 0; k < fir_horizon; ++k) {
        mask.phi_x.push_back(Eigen::ArrayXXi::Ones(n, n));
        mask.phi_u.push_back(Eigen::ArrayXXi::Ones(p, n));
    }
    return mask;
}

bool mask_satisfied(const StructureMask& mask, const SystemResponse& resp) {
    if (mask.fir_horizon() != resp.fir_horizon()) return false;
    for (int k = 1; k <= resp.fir_horizon(); ++k) {
        for (int i = 0; i < resp.num_states(); ++i)
            for (int j = 0; j < resp.num_states(); ++j)
                if (!mask.allows_x(k, i, j) && resp.phi_x().tap(k)(i, j) != 0.0) return false;
        for (int a = 0; a < resp.num_inputs(); ++a)
            for (int j = 0; j < resp.num_states(); ++j)
                if (!mask.allows_u(k, a, j) && resp.phi_u().tap(k)(a, j) != 0.0) return false;
    }
    return true;
}

Plant chain_system(int n, double a_self, double a_couple, double b_diag) {
    require(n >= 1, "chain_system: n must be >= 1");
    Matrix a = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        a(i, i) = a_self;
        if (i + 1 < n) {
            a(i, i + 1) = a_couple;
            a(i + 1, i) = a_couple;
        }
    }
    return Plant(a, b_diag * Matrix::Identity(n, n));
}

std::string mask_to_json(const StructureMask& mask) {
    nlohmann::json j;
    j["fir_horizon"] = mask.fir_horizon();
    auto pack = [](const std::vector<Eigen::ArrayXXi>& taps) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& m : taps) {
            nlohmann::json rows = nlohmann::json::array();
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                nlohmann::json row = nlohmann::json::array();
                for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c) ? 1 : 0);
                rows.push_back(std::move(row));
            }
            out.push_back(std::move(rows));
        }
        return out;
    };
    j["phi_x"] = pack(mask.phi_x);
    j["phi_u"] = pack(mask.phi_u);
    return j.dump(2);
}

StructureMask mask_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    StructureMask mask;
    auto unpack = [](const nlohmann::json& taps) {
        std::vector<Eigen::ArrayXXi> out;
        for (const auto& tap : taps) {
            const int rows = static_cast<int>(tap.size());
            require(rows > 0, "mask_from_json: empty tap");
            const int cols = static_cast<int>(tap[0].size());
            Eigen::ArrayXXi m(rows, cols);
            for (int i = 0; i < rows; ++i) {
                require(static_cast<int>(tap[i].size()) == cols, "mask_from_json: ragged rows");
                for (int c = 0; c < cols; ++c) m(i, c) = tap[i][c].get<int>() ? 1 : 0;
            }
            out.push_back(std::move(m));
        }
        return out;
    };
    mask.phi_x = unpack(j.at("phi_x"));
    mask.phi_u = unpack(j.at("phi_u"));
    require(j.at("fir_horizon").get<int>() == mask.fir_horizon(),
            "mask_from_json: fir_horizon disagrees with tap count");
    require(mask.phi_x.size() == mask.phi_u.size(), "mask_from_json: tap count mismatch");
    return mask;
}

}  // namespace sls
