#include "sls/structure.hpp"
#include "sls/synthesis.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

using namespace sls;

namespace {
CostOutput regulation_cost(int n, int p) {
    Matrix c(n + p, n), d(n + p, p);
    c << Matrix::Identity(n, n), Matrix::Zero(p, n);
    d << Matrix::Zero(n, p), Matrix::Identity(p, p);
    return CostOutput(std::move(c), std::move(d));
}
}  // namespace

TEST_CASE("chain generator: scalar case and support pattern") {
    const Plant scalar = chain_system(1, 0.7, 0.4, 2.0);
    CHECK(scalar.A(0, 0) == 0.7);
    CHECK(scalar.B(0, 0) == 2.0);

    const Plant chain = chain_system(4, 0.5, 0.2, 1.0);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(chain.A(i, j) == (i == j ? 0.5 : (std::abs(i - j) == 1 ? 0.2 : 0.0)));
}

TEST_CASE("support graph distances follow the chain") {
    const Plant chain = chain_system(5, 0.5, 0.2, 1.0);
    const SupportGraph graph = SupportGraph::from_plant(chain);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) CHECK(graph.distance(j, i) == std::abs(i - j));
    CHECK(graph.actuator_distance(0, 4) == 4);

    // decoupled chain: off-diagonal distances are unreachable
    const SupportGraph loose = SupportGraph::from_plant(chain_system(3, 0.5, 0.0, 1.0));
    CHECK(loose.distance(0, 1) >= SupportGraph::kUnreachable);
    CHECK(loose.distance(2, 2) == 0);
}

TEST_CASE("locality masks: banding, vacuous radius, and delay growth") {
    const Plant chain = chain_system(5, 0.5, 0.2, 1.0);
    const SupportGraph graph = SupportGraph::from_plant(chain);

    const StructureMask banded = locality_mask(graph, 1, 4);
    for (int k = 1; k <= 4; ++k)
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) {
                CHECK(banded.allows_x(k, i, j) == (std::abs(i - j) <= 1));
                CHECK(banded.allows_u(k, i, j) == (std::abs(i - j) <= 1));
            }

    // d at least the diameter with no delay allows everything
    const StructureMask loose = locality_mask(graph, 4, 3);
    for (int k = 1; k <= 3; ++k)
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) CHECK(loose.allows_x(k, i, j));

    // tau = 2: the allowed radius grows one hop per two steps
    const StructureMask delayed = locality_mask(graph, 3, 6, 2);
    CHECK(delayed.allows_x(1, 0, 0));
    CHECK_FALSE(delayed.allows_x(1, 1, 0));
    CHECK_FALSE(delayed.allows_x(2, 1, 0));
    CHECK(delayed.allows_x(3, 1, 0));   // radius floor((3-1)/2) = 1
    CHECK_FALSE(delayed.allows_x(3, 2, 0));
    CHECK(delayed.allows_x(5, 2, 0));   // radius 2

    // nesting: smaller d is a subset of larger d
    const StructureMask d2 = locality_mask(graph, 2, 4);
    for (int k = 1; k <= 4; ++k)
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j)
                if (banded.allows_x(k, i, j)) CHECK(d2.allows_x(k, i, j));
}

TEST_CASE("d = 0 on a coupled chain is infeasible for T >= 2") {
    const Plant chain = chain_system(3, 0.5, 0.2, 1.0);
    const SupportGraph graph = SupportGraph::from_plant(chain);
    SynthesisProblem prob{chain, regulation_cost(3, 3), 0.0, 2,
                          locality_mask(graph, 0, 2), 1e-6, 1e-3};
    CHECK_FALSE(feasibility_at_gamma(prob, 10.0).has_value());
    CHECK_THROWS_AS(bisect_gamma(prob), SynthesisInfeasible);

    // while a vacuous mask equals the unstructured synthesis
    SynthesisProblem wide = prob;
    wide.mask = locality_mask(graph, 4, 2);
    SynthesisProblem free_prob = prob;
    free_prob.mask.reset();
    const double g_wide = bisect_gamma(wide).gamma_star;
    const double g_free = bisect_gamma(free_prob).gamma_star;
    CHECK(std::abs(g_wide - g_free) <= 2.0 * 1e-3 * std::max(g_wide, g_free));
}

TEST_CASE("masked synthesis keeps masked entries exactly zero") {
    const Plant chain = chain_system(4, 0.55, 0.2, 1.0);
    const SupportGraph graph = SupportGraph::from_plant(chain);
    const StructureMask mask = locality_mask(graph, 1, 6);
    SynthesisProblem prob{chain, regulation_cost(4, 4), 0.05, 6, mask, 1e-6, 1e-3};
    const SynthesisResult res = bisect_gamma(prob);
    CHECK(mask_satisfied(mask, res.response));
    for (int k = 1; k <= 6; ++k)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                if (std::abs(i - j) > 1) {
                    CHECK(res.response.phi_x().tap(k)(i, j) == 0.0);
                    CHECK(res.response.phi_u().tap(k)(i, j) == 0.0);
                }
}

TEST_CASE("gamma is monotone in the locality radius") {
    const Plant chain = chain_system(5, 0.55, 0.2, 1.0);
    const SupportGraph graph = SupportGraph::from_plant(chain);
    const CostOutput cost = regulation_cost(5, 5);
    double previous = kInf;
    for (int d : {1, 2, 4}) {
        SynthesisProblem prob{chain, cost, 0.05, 8, locality_mask(graph, d, 8), 1e-6, 1e-3};
        const double gamma = bisect_gamma(prob).gamma_star;
        CHECK(gamma <= previous + 2.0 * 1e-3 * std::max(gamma, previous));
        previous = gamma;
    }
}

TEST_CASE("decoupled chain separates into scalar problems") {
    // a_couple = 0: three independent scalars; gamma matches the n = 1 answer
    const Plant trio = chain_system(3, 0.6, 0.0, 1.0);
    const Plant solo = chain_system(1, 0.6, 0.0, 1.0);
    SynthesisProblem p3{trio, regulation_cost(3, 3), 0.1, 4, std::nullopt, 1e-6, 1e-4};
    SynthesisProblem p1{solo, regulation_cost(1, 1), 0.1, 4, std::nullopt, 1e-6, 1e-4};
    const double g3 = bisect_gamma(p3).gamma_star;
    const double g1 = bisect_gamma(p1).gamma_star;
    CHECK(std::abs(g3 - g1) <= 4e-4 * std::max(g3, g1));
}

TEST_CASE("synthesis handles an open-loop unstable chain") {
    const Plant unstable = chain_system(3, 1.1, 0.2, 1.0);
    Eigen::EigenSolver<Matrix> eig(unstable.A);
    CHECK(eig.eigenvalues().cwiseAbs().maxCoeff() > 1.0);

    SynthesisProblem prob{unstable, regulation_cost(3, 3), 0.05, 6, std::nullopt, 1e-6, 1e-3};
    const SynthesisResult res = bisect_gamma(prob);
    CHECK(res.gamma_star > 0.0);
    CHECK(res.residual_max <= 1e-8);
    CHECK(prob.epsilon * res.norm_phi < 1.0);
}

TEST_CASE("mask JSON round trip and schema checks") {
    const Plant chain = chain_system(4, 0.5, 0.2, 1.0);
    const StructureMask mask = locality_mask(SupportGraph::from_plant(chain), 1, 3, 1);
    const std::string text = mask_to_json(mask);
    const StructureMask back = mask_from_json(text);
    REQUIRE(back.fir_horizon() == mask.fir_horizon());
    for (int k = 1; k <= 3; ++k) {
        CHECK((back.phi_x[k - 1] == mask.phi_x[k - 1]).all());
        CHECK((back.phi_u[k - 1] == mask.phi_u[k - 1]).all());
    }
    CHECK_THROWS_AS(mask_from_json("{\"fir_horizon\": 2}"), std::exception);
}
