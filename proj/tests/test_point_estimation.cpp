#include <catch2/catch_amalgamated.hpp>

#include "cio/evaluation.hpp"
#include "cio/point_estimation.hpp"

using namespace cio;

namespace {

std::vector<Observation> noiseless_knapsack_data(int n, const Vec& theta0, const Vec& w,
                                                 uint64_t seed) {
    RandomSource rng = make_rng(seed);
    std::uniform_real_distribution<double> uq(0.2, 5.0);
    double wsum = 0.0;
    for (double v : w) wsum += v;
    std::vector<Observation> obs;
    for (int k = 0; k < n; ++k) {
        const ExoParams exo = KnapsackParams{w, uq(rng) * wsum};
        const auto s = solve_knapsack(CostVector(theta0), exo);
        obs.push_back({s.representative(), exo});
    }
    return obs;
}

}  // namespace

TEST_CASE("noiseless data is rationalized with zero training loss") {
    const Vec theta0 = {2.0, 1.0, 3.0};
    const auto obs = noiseless_knapsack_data(25, theta0, {1.0, 1.2, 0.8}, 5);
    FitTrace trace;
    const auto pe = fit_suboptimality(obs, ProblemKind::knapsack, {}, &trace);
    CHECK(pe.train_loss == Catch::Approx(0.0).margin(1e-7));
    // every observation is optimal under the fitted direction
    for (const auto& o : obs) {
        const auto fo = solve_knapsack(pe.theta_bar, o.exo);
        CHECK(objective(pe.theta_bar, o.decision) ==
              Catch::Approx(fo.optimal_value()).margin(1e-6));
    }
    CHECK(norm2(pe.theta_bar.values()) == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("noiseless shortest-path data is rationalized") {
    RandomSource rng = make_rng(77);
    std::uniform_real_distribution<double> u(0.5, 3.0);
    const int d = grid_edge_count(3, 3);
    Vec theta0(d);
    for (double& v : theta0) v = u(rng);
    std::vector<Observation> obs;
    for (int k = 0; k < 30; ++k) {
        const int o = static_cast<int>(rng() % 9);
        int dd = static_cast<int>(rng() % 9);
        if (dd == o) dd = (dd + 1) % 9;
        const ExoParams exo = GridParams{3, 3, o, dd};
        obs.push_back(
            {solve_shortest_path(CostVector(theta0), exo).representative(), exo});
    }
    const auto pe = fit_suboptimality(obs, ProblemKind::shortest_path_grid);
    CHECK(pe.train_loss == Catch::Approx(0.0).margin(1e-7));
}

TEST_CASE("two discriminating knapsack observations pin the direction") {
    // (1,1,0) under w=(2,2,4), u=4 and (0,0,1) under w=(1,3,3), u=3 are both
    // rationalized inside the trust region (e.g. by theta = (1,1,1))
    std::vector<Observation> obs;
    obs.push_back({Decision({1, 1, 0}), KnapsackParams{{2, 2, 4}, 4}});
    obs.push_back({Decision({0, 0, 1}), KnapsackParams{{1, 3, 3}, 3}});
    const auto pe = fit_suboptimality(obs, ProblemKind::knapsack);
    CHECK(pe.train_loss == Catch::Approx(0.0).margin(1e-7));
    for (const auto& o : obs) {
        const auto fo = solve_knapsack(pe.theta_bar, o.exo);
        CHECK(objective(pe.theta_bar, o.decision) ==
              Catch::Approx(fo.optimal_value()).margin(1e-6));
    }
}

TEST_CASE("master value tightens monotonically; incumbent loss non-increasing") {
    // noisy data plus an empty-set observation that no trust-region theta can
    // rationalize, forcing several cut rounds
    GroundTruthConfig cfg;
    cfg.kind = ProblemKind::knapsack;
    cfg.theta_star = CostVector({4.0, 2.0, 7.0, 1.0, 5.0});
    cfg.weights = {2.0, 4.0, 3.0, 1.0, 5.0};
    cfg.seed = 3;
    const auto samples = generate_samples(cfg, 40);
    std::vector<Observation> obs;
    for (const auto& s : samples) obs.push_back({s.x_hat, s.exo});
    obs.push_back({Decision({0, 0, 0, 0, 0}), KnapsackParams{{2, 4, 3, 1, 5}, 15.0}});

    FitTrace trace;
    const auto pe = fit_suboptimality(obs, ProblemKind::knapsack, {}, &trace);
    REQUIRE(trace.master_values.size() >= 2);
    for (std::size_t i = 1; i < trace.master_values.size(); ++i)
        CHECK(trace.master_values[i] >= trace.master_values[i - 1] - 1e-9);
    double inc = kInf;
    Vec incumbents;
    for (double loss : trace.true_losses) {
        inc = std::min(inc, loss);
        incumbents.push_back(inc);
    }
    for (std::size_t i = 1; i < incumbents.size(); ++i)
        CHECK(incumbents[i] <= incumbents[i - 1] + 1e-12);
    // at termination the relaxation is exact
    CHECK(trace.master_values.back() ==
          Catch::Approx(trace.true_losses.back()).margin(1e-6));
    // trust region honored by the raw estimate
    double l1 = 0.0;
    for (std::size_t i = 0; i < pe.raw_theta.dim(); ++i)
        l1 += std::abs(pe.raw_theta[i] - 1.0);
    CHECK(l1 <= 5.0 / 4.0 + 1e-7);
}

TEST_CASE("iteration cap raises an error carrying the last iterate") {
    GroundTruthConfig cfg;
    cfg.kind = ProblemKind::knapsack;
    cfg.theta_star = CostVector({4.0, 2.0, 7.0, 1.0, 5.0});
    cfg.weights = {2.0, 4.0, 3.0, 1.0, 5.0};
    cfg.seed = 4;
    const auto samples = generate_samples(cfg, 30);
    std::vector<Observation> obs;
    for (const auto& s : samples) obs.push_back({s.x_hat, s.exo});
    FitOptions opt;
    opt.max_iter = 1;
    try {
        fit_suboptimality(obs, ProblemKind::knapsack, opt);
        FAIL("expected FitError");
    } catch (const FitError& e) {
        CHECK(e.last_iterate.iterations == 1);
    }
}

TEST_CASE("external point estimates are normalized only") {
    const auto pe = PointEstimate::from_external(CostVector({3.0, 4.0}));
    CHECK(pe.theta_bar[0] == Catch::Approx(0.6));
    CHECK(pe.theta_bar[1] == Catch::Approx(0.8));
    CHECK_THROWS_AS(PointEstimate::from_external(CostVector({0.0, 0.0})), Error);
}
