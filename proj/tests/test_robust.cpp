#include <catch2/catch_amalgamated.hpp>

#include "cio/evaluation.hpp"
#include "cio/robust.hpp"

using namespace cio;

namespace {

/// Dense sampling of the cap in 2-D: worst case of theta'x over the cap.
double cap_grid_extreme(const Vec& x, const ConeUncertaintySet& cone, bool maximize,
                        int steps = 200000) {
    const Vec& c = cone.center().values();
    const double base = std::atan2(c[1], c[0]);
    double best = maximize ? -1e300 : 1e300;
    for (int i = 0; i <= steps; ++i) {
        const double a =
            base - cone.half_angle() + 2.0 * cone.half_angle() * i / steps;
        const double v = std::cos(a) * x[0] + std::sin(a) * x[1];
        best = maximize ? std::max(best, v) : std::min(best, v);
    }
    return best;
}

}  // namespace

TEST_CASE("a nearly degenerate cone reproduces the nominal forward problem") {
    {
        const auto inst = make_shortest_path_instance(3, 3, 0, 8);
        Vec theta(inst.dim);
        RandomSource rng = make_rng(8);
        std::uniform_real_distribution<double> u(0.5, 2.0);
        for (double& v : theta) v = u(rng);
        const CostVector tb = CostVector(theta).unit();
        const ConeUncertaintySet cone(tb, 1e-7);
        const auto r = solve_rfo(cone, inst);
        const auto fo = solve_shortest_path(tb, inst.exo);
        CHECK(r.worst_case_value == Catch::Approx(fo.optimal_value()).margin(1e-5));
    }
    {
        const auto inst = make_knapsack_instance({2.0, 3.0, 1.0}, 4.0);
        const CostVector tb = CostVector({3.0, 1.0, 2.0}).unit();
        const ConeUncertaintySet cone(tb, 1e-7);
        const auto r = solve_rfo(cone, inst);
        const auto fo = solve_knapsack(tb, inst.exo);
        CHECK(r.worst_case_value == Catch::Approx(fo.optimal_value()).margin(1e-5));
    }
}

TEST_CASE("knapsack worst case matches dense cap sampling") {
    const auto inst = make_knapsack_instance({1.0, 1.0}, 1.0);
    const CostVector tb = CostVector({1.0, 1.0}).unit();
    const ConeUncertaintySet cone(tb, M_PI / 2 - 0.05);
    const auto r = solve_rfo(cone, inst);
    // the returned worst case equals the sampled inner minimum of the chosen x
    const double sampled = cap_grid_extreme(r.x.values(), cone, false);
    CHECK(r.worst_case_value == Catch::Approx(sampled).margin(1e-3));
    // and no subset does better than the reported max-min value
    for (const auto& x : knapsack_feasible_set(std::get<KnapsackParams>(inst.exo))) {
        const double inner = cap_grid_extreme(x.values(), cone, false);
        CHECK(inner <= r.worst_case_value + 1e-6);
    }
}

TEST_CASE("robust solutions carry exact certificates") {
    RandomSource rng = make_rng(14);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (int rep = 0; rep < 10; ++rep) {
        const auto inst = make_shortest_path_instance(3, 3, 1, 7);
        Vec theta(inst.dim);
        for (double& v : theta) v = u(rng);
        const CostVector tb = CostVector(theta).unit();
        const ConeUncertaintySet cone(tb, 0.2 + 0.1 * rep);
        const auto r = solve_rfo(cone, inst);
        // worst_case_value is the closed-form support at the returned x
        const auto support = spherical_cap_support(r.x.values(), cone);
        CHECK(r.worst_case_value == Catch::Approx(support.value).margin(1e-9));
        // x is feasible (possibly fractional flow)
        CHECK(is_feasible(r.x, inst, 1e-6));
        CHECK(!r.active_thetas.empty());
    }
}

TEST_CASE("robust value is monotone in the cone half-angle") {
    RandomSource rng = make_rng(15);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (int seed = 0; seed < 20; ++seed) {
        // shortest path: min-max value non-decreasing in alpha
        const auto inst = make_shortest_path_instance(2, 3, 0, 5);
        Vec theta(inst.dim);
        for (double& v : theta) v = u(rng);
        const CostVector tb = CostVector(theta).unit();
        double prev = -kInf;
        for (double alpha : {0.05, 0.3, 0.8, 1.5, 2.5}) {
            const auto r = solve_rfo(ConeUncertaintySet(tb, alpha), inst);
            // slack: each solve certifies within the 1e-6 termination tolerance
            CHECK(r.worst_case_value >= prev - 2e-6);
            prev = r.worst_case_value;
        }
        // knapsack: max-min value non-increasing in alpha
        const auto ki = make_knapsack_instance({u(rng), u(rng), u(rng)}, 2.5);
        const CostVector ktb = CostVector({u(rng), u(rng), u(rng)}).unit();
        prev = kInf;
        for (double alpha : {0.05, 0.3, 0.8, 1.5, 2.5}) {
            const auto r = solve_rfo(ConeUncertaintySet(ktb, alpha), ki);
            CHECK(r.worst_case_value <= prev + 2e-6);
            prev = r.worst_case_value;
        }
    }
}

TEST_CASE("d=2 robust solves match vertex-times-grid brute force") {
    // knapsack is integer: enumeration over subsets x dense cap grid is exact
    RandomSource rng = make_rng(16);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (int rep = 0; rep < 8; ++rep) {
        const auto inst = make_knapsack_instance({u(rng), u(rng)}, u(rng) * 1.2);
        Vec dir = {u(rng), u(rng)};
        const CostVector tb = CostVector(dir).unit();
        const double alpha = 0.1 + 0.25 * rep;
        const ConeUncertaintySet cone(tb, alpha);
        const auto r = solve_rfo(cone, inst);
        double brute = -kInf;
        for (const auto& x : knapsack_feasible_set(std::get<KnapsackParams>(inst.exo)))
            brute = std::max(brute, cap_grid_extreme(x.values(), cone, false));
        CHECK(r.worst_case_value == Catch::Approx(brute).margin(1e-4));
    }
    {
        // d=2 shortest path (1x2 grid, single path): value equals the support
        const auto inst = make_shortest_path_instance(1, 2, 0, 1);
        const CostVector tb = CostVector({1.0, 1.0}).unit();
        const ConeUncertaintySet cone(tb, 0.7);
        const auto r = solve_rfo(cone, inst);
        const double brute = cap_grid_extreme({1.0, 0.0}, cone, true);
        CHECK(r.worst_case_value == Catch::Approx(brute).margin(1e-4));
    }
}

TEST_CASE("wide cones can prefer fractional flows") {
    // two disjoint unit-cost routes with a symmetric cone: splitting the flow
    // lowers the worst case below any single path
    const auto inst = make_shortest_path_instance(2, 2, 0, 3);
    Vec ones(inst.dim, 1.0);
    const CostVector tb = CostVector(ones).unit();
    const ConeUncertaintySet cone(tb, 1.2);
    const auto r = solve_rfo(cone, inst);
    double best_pure = kInf;
    const Digraph g = make_grid_digraph(2, 2);
    for (const auto& path :
         {std::vector<std::pair<int, int>>{{0, 1}, {1, 3}},
          std::vector<std::pair<int, int>>{{0, 2}, {2, 3}}}) {
        Vec x(inst.dim, 0.0);
        for (int e = 0; e < g.num_edges(); ++e)
            for (const auto& pe : path)
                if (g.edges[e] == pe) x[e] = 1.0;
        best_pure = std::min(best_pure, spherical_cap_support(x, cone).value);
    }
    CHECK(r.worst_case_value <= best_pure + 1e-9);
    // a path decomposition of the flow is a feasible integral path
    RandomSource rng = make_rng(4);
    const Decision path = sample_path_decomposition(r.x, inst, rng);
    CHECK(is_feasible(path, inst));
}

TEST_CASE("iteration cap raises an error with the best iterate") {
    const auto inst = make_shortest_path_instance(3, 3, 0, 8);
    Vec theta(inst.dim, 1.0);
    const ConeUncertaintySet cone(CostVector(theta).unit(), 1.0);
    CHECK_THROWS_AS(solve_rfo(cone, inst, 1), RfoError);
}
