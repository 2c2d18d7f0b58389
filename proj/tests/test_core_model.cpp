#include <catch2/catch_amalgamated.hpp>

#include "cio/forward.hpp"
#include "cio/types.hpp"

using namespace cio;

TEST_CASE("objective is the dot product") {
    CHECK(objective(CostVector({1, 2}), Decision({1, 0})) == Catch::Approx(1.0));
    CHECK(objective(CostVector({0, 0}), Decision({3, -7})) == 0.0);
    CHECK(objective(CostVector({std::cos(M_PI / 4), std::sin(M_PI / 4)}), Decision({0, 1})) ==
          Catch::Approx(std::sqrt(2.0) / 2).epsilon(1e-12));
    CHECK_THROWS_AS(objective(CostVector({1, 2, 3}), Decision({1, 0})), Error);
}

TEST_CASE("objective is linear in theta") {
    RandomSource rng = make_rng(11);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 1 + static_cast<int>(rng() % 8);
        Vec t1(d), t2(d), x(d);
        for (int i = 0; i < d; ++i) {
            t1[i] = u(rng);
            t2[i] = u(rng);
            x[i] = u(rng);
        }
        const double a = u(rng), b = u(rng);
        Vec mix(d);
        for (int i = 0; i < d; ++i) mix[i] = a * t1[i] + b * t2[i];
        const Decision dx{Vec(x)};
        const double lhs = objective(CostVector(mix), dx);
        const double rhs = a * objective(CostVector(t1), dx) + b * objective(CostVector(t2), dx);
        CHECK(lhs == Catch::Approx(rhs).margin(1e-9));
    }
}

TEST_CASE("nu is the euclidean norm of the decision") {
    CHECK(nu(Decision({0, 1})) == 1.0);
    CHECK(nu(Decision({3, 4})) == Catch::Approx(5.0));
    CHECK(nu(Decision({10, 0})) == Catch::Approx(10.0));
}

TEST_CASE("knapsack feasibility checks budget and binarity") {
    const auto inst = make_knapsack_instance({3, 4}, 5);
    CHECK(is_feasible(Decision({1, 0}), inst));
    CHECK_FALSE(is_feasible(Decision({1, 1}), inst));
    CHECK_FALSE(is_feasible(Decision({0.5, 0}), inst));  // fractional
}

TEST_CASE("grid feasibility checks flow balance") {
    // 2x2 grid, origin top-left (0), destination bottom-right (3).
    const auto inst = make_shortest_path_instance(2, 2, 0, 3);
    const Digraph g = make_grid_digraph(2, 2);
    // right-then-down: edges 0->1 and 1->3
    Vec x(g.num_edges(), 0.0);
    for (int e = 0; e < g.num_edges(); ++e) {
        if (g.edges[e] == std::pair<int, int>{0, 1}) x[e] = 1.0;
        if (g.edges[e] == std::pair<int, int>{1, 3}) x[e] = 1.0;
    }
    CHECK(is_feasible(Decision(x), inst));
    x[0] = 1.0 - x[0];  // break one edge
    CHECK_FALSE(is_feasible(Decision(x), inst));
}

TEST_CASE("optimal solution set is invariant to positive scaling of theta") {
    RandomSource rng = make_rng(12);
    std::uniform_real_distribution<double> u(0.1, 5.0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto inst = make_shortest_path_instance(3, 3, 0, 8);
        Vec theta(inst.dim);
        for (double& v : theta) v = u(rng);
        const double beta = u(rng);
        const auto s1 = solve_shortest_path(CostVector(theta), inst.exo);
        Vec scaled_theta = theta;
        for (double& v : scaled_theta) v *= beta;
        const auto s2 = solve_shortest_path(CostVector(scaled_theta), inst.exo);
        CHECK(s2.optimal_value() == Catch::Approx(beta * s1.optimal_value()));
        CHECK(s1.shortest_path().tight == s2.shortest_path().tight);

        Vec w = {u(rng), u(rng), u(rng)};
        const auto ki = make_knapsack_instance(w, u(rng) * 3);
        Vec kt = {u(rng), u(rng), u(rng)};
        const auto k1 = solve_knapsack(CostVector(kt), ki.exo);
        Vec kt2 = kt;
        for (double& v : kt2) v *= beta;
        const auto k2 = solve_knapsack(CostVector(kt2), ki.exo);
        REQUIRE(k1.knapsack().optima.size() == k2.knapsack().optima.size());
        for (std::size_t i = 0; i < k1.knapsack().optima.size(); ++i)
            CHECK(k1.knapsack().optima[i].values() == k2.knapsack().optima[i].values());
    }
}

TEST_CASE("dataset construction rejects infeasible pairs and bad splits") {
    const ExoParams exo = KnapsackParams{{3, 4}, 5};
    std::vector<Observation> good{{Decision({1, 0}), exo}, {Decision({0, 1}), exo}};
    CHECK_NOTHROW(DecisionDataset(ProblemKind::knapsack, good, {0}, {1}));

    std::vector<Observation> bad{{Decision({1, 1}), exo}};
    CHECK_THROWS_AS(DecisionDataset(ProblemKind::knapsack, bad, {0}, {}), Error);
    CHECK_THROWS_AS(DecisionDataset(ProblemKind::knapsack, good, {0, 1}, {1}), Error);
    CHECK_THROWS_AS(DecisionDataset(ProblemKind::knapsack, good, {0}, {}), Error);
}

TEST_CASE("cone uncertainty set validates its invariants") {
    CHECK_THROWS_AS(ConeUncertaintySet(CostVector({1.0, 1.0}), 0.5), Error);
    CHECK_THROWS_AS(ConeUncertaintySet(CostVector({1.0, 0.0}), 0.0), Error);
    CHECK_THROWS_AS(ConeUncertaintySet(CostVector({1.0, 0.0}), 3.5), Error);
    const ConeUncertaintySet cone(CostVector({1.0, 0.0}), M_PI / 4);
    CHECK(cone.contains(CostVector({1.0, 0.0})));
    CHECK_FALSE(cone.contains(CostVector({0.0, 1.0})));
}

TEST_CASE("instance constructors enforce invariants") {
    CHECK_THROWS_AS(make_shortest_path_instance(2, 2, 1, 1), Error);
    CHECK_THROWS_AS(make_shortest_path_instance(2, 2, 0, 9), Error);
    CHECK_THROWS_AS(make_knapsack_instance({1, -1}, 2), Error);
    CHECK_THROWS_AS(CostVector({1.0, std::nan("")}), Error);
    const auto sp = make_shortest_path_instance(5, 5, 0, 24);
    CHECK(sp.dim == 80);
    CHECK(sp.sense == Sense::minimize);
    const auto kn = make_knapsack_instance({1, 2, 3}, 4);
    CHECK(kn.sense == Sense::maximize);
}
