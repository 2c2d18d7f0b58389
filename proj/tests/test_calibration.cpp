#include <catch2/catch_amalgamated.hpp>

#include "cio/calibration.hpp"
#include "cio/evaluation.hpp"

using namespace cio;

namespace {

/// Fine-grid oracle for 2-D conformity: max theta'theta_bar over unit vectors
/// that make x_hat optimal, optimality checked by exact enumeration.
double grid_conformity_knapsack(const Decision& x_hat, const KnapsackParams& kp,
                                const Vec& theta_bar, int steps = 400000) {
    double best = -1.0;
    const auto feas = knapsack_feasible_set(kp);
    for (int i = 0; i <= steps; ++i) {
        const double a = 2 * M_PI * i / steps;
        const Vec th = {std::cos(a), std::sin(a)};
        const double v = dot(th, x_hat.values());
        bool optimal = true;
        for (const auto& x : feas) {
            if (dot(th, x.values()) > v + 1e-12) {
                optimal = false;
                break;
            }
        }
        if (optimal) best = std::max(best, dot(th, theta_bar));
    }
    return best;
}

}  // namespace

TEST_CASE("a decision optimal under theta_bar scores 1") {
    const CostVector theta_bar = CostVector({5.0, 1.0}).unit();
    const ExoParams exo = KnapsackParams{{3.0, 4.0}, 5.0};
    const auto r =
        conformity_score(Decision({1, 0}), exo, theta_bar, ProblemKind::knapsack);
    CHECK(r.c == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("knapsack conformity matches the grid oracle") {
    const KnapsackParams kp{{1.0, 1.0}, 1.0};
    const CostVector theta_bar{{1.0, 0.0}};
    const Decision x_hat{{0.0, 1.0}};
    const auto r = conformity_score(x_hat, ExoParams{kp}, theta_bar, ProblemKind::knapsack);
    CHECK(r.c == Catch::Approx(std::sqrt(2.0) / 2).margin(1e-5));
    const double grid = grid_conformity_knapsack(x_hat, kp, theta_bar.values());
    CHECK(r.c == Catch::Approx(grid).margin(1e-4));
    // the returned theta realizes the score and rationalizes the decision
    CHECK(dot(r.theta_k.values(), theta_bar.values()) == Catch::Approx(r.c).margin(1e-5));
}

TEST_CASE("parallel-edge network conformity is sqrt(2)/2") {
    Digraph g;
    g.num_nodes = 2;
    g.edges = {{0, 1}, {0, 1}};
    const Vec x_hat = {1.0, 0.0};  // uses edge 1 of the two parallel edges
    const auto r =
        cal_detail::score_shortest_path_digraph(x_hat, g, 0, 1, CostVector({1.0, 0.0}));
    CHECK(r.c == Catch::Approx(std::sqrt(2.0) / 2).margin(1e-5));
}

TEST_CASE("projection route agrees with the dual-feasibility LP route") {
    // the production score (cone projection) and the strong-duality LP with a
    // Kelley ball must solve the same maximization
    RandomSource rng = make_rng(55);
    std::uniform_real_distribution<double> u(0.5, 3.0);
    const Digraph g = make_grid_digraph(2, 3);
    for (int rep = 0; rep < 12; ++rep) {
        Vec theta0(g.num_edges());
        for (double& v : theta0) v = u(rng);
        const int o = static_cast<int>(rng() % 6);
        int dd = static_cast<int>(rng() % 6);
        if (dd == o) dd = (dd + 1) % 6;
        const auto sp = solve_shortest_path_digraph(g, theta0, o, dd);
        Vec dir(g.num_edges());
        for (double& v : dir) v = u(rng);
        const CostVector tb = CostVector(dir).unit();
        const GridParams gp{2, 3, o, dd};
        const auto mnp = conformity_score(sp.representative, ExoParams{gp}, tb,
                                          ProblemKind::shortest_path_grid);
        const auto lp = cal_detail::score_shortest_path_digraph(
            sp.representative.values(), g, o, dd, tb);
        CHECK(mnp.c == Catch::Approx(lp.c).margin(1e-5));
    }
}

TEST_CASE("grid shortest-path conformity: optimal path scores 1, detour scores less") {
    const GridParams gp{2, 2, 0, 3};
    const Digraph g = make_grid_digraph(2, 2);
    Vec theta0 = {1.0, 5.0, 1.0, 5.0, 1.0, 5.0, 1.0, 5.0};
    theta0.resize(g.num_edges(), 1.0);
    const auto sp = solve_shortest_path_digraph(g, theta0, 0, 3);
    const CostVector tb = CostVector(theta0).unit();
    const auto r1 = conformity_score(sp.representative, ExoParams{gp}, tb,
                                     ProblemKind::shortest_path_grid);
    CHECK(r1.c == Catch::Approx(1.0).margin(1e-5));
}

TEST_CASE("calibrate follows the quantile decomposition") {
    // synthetic scores by construction: use knapsack val points with known c_k
    const CostVector theta_bar{{1.0, 0.0}};
    const KnapsackParams kp{{1.0, 1.0}, 1.0};
    std::vector<Observation> val;
    // (1,0) is optimal under theta_bar: c = 1; (0,1) has c = sqrt(2)/2
    val.push_back({Decision({1, 0}), ExoParams{kp}});
    val.push_back({Decision({0, 1}), ExoParams{kp}});
    val.push_back({Decision({1, 0}), ExoParams{kp}});

    const auto res = calibrate(theta_bar, val, 0.5, ProblemKind::knapsack);
    CHECK(res.tau == 2);  // ceil(0.5 * 4)
    CHECK(res.alpha_gamma == Catch::Approx(std::acos(1.0)).margin(1e-5));

    const auto res2 = calibrate(theta_bar, val, 0.75, ProblemKind::knapsack);
    CHECK(res2.tau == 3);
    CHECK(res2.alpha_gamma == Catch::Approx(std::acos(std::sqrt(2.0) / 2)).margin(1e-4));

    const auto res0 = calibrate(theta_bar, val, 0.0, ProblemKind::knapsack);
    CHECK(res0.tau == 0);
    CHECK(res0.alpha_gamma == 0.0);

    CHECK_THROWS_WITH(calibrate(theta_bar, val, 0.9, ProblemKind::knapsack),
                      Catch::Matchers::ContainsSubstring("validity range"));
    CHECK_THROWS_AS(calibrate(theta_bar, {}, 0.5, ProblemKind::knapsack), Error);
}

TEST_CASE("alpha_gamma is non-decreasing in gamma") {
    RandomSource rng = make_rng(21);
    std::uniform_real_distribution<double> u(0.5, 3.0);
    for (int seed = 0; seed < 20; ++seed) {
        GroundTruthConfig cfg;
        cfg.kind = ProblemKind::knapsack;
        cfg.theta_star = CostVector({u(rng), u(rng), u(rng), u(rng)});
        cfg.weights = {u(rng), u(rng), u(rng), u(rng)};
        cfg.seed = 100 + seed;
        const auto samples = generate_samples(cfg, 12);
        std::vector<Observation> val;
        for (const auto& s : samples) val.push_back({s.x_hat, s.exo});
        const CostVector tb = cfg.theta_star.unit();
        double prev = -1.0;
        for (double gamma : {0.0, 0.2, 0.4, 0.6, 0.8, 12.0 / 13.0}) {
            const auto res = calibrate(tb, val, gamma, ProblemKind::knapsack);
            CHECK(res.alpha_gamma >= prev - 1e-12);
            prev = res.alpha_gamma;
        }
    }
}

TEST_CASE("scores are realizable: returned thetas rationalize the decisions") {
    GroundTruthConfig cfg;
    cfg.kind = ProblemKind::knapsack;
    cfg.theta_star = CostVector({3.0, 1.0, 2.0});
    cfg.weights = {1.0, 2.0, 1.5};
    cfg.seed = 9;
    const auto samples = generate_samples(cfg, 15);
    const CostVector tb = CostVector({1.0, 1.0, 1.0}).unit();
    for (const auto& s : samples) {
        const auto r = conformity_score(s.x_hat, s.exo, tb, ProblemKind::knapsack);
        const auto fo = solve_knapsack(r.theta_k, s.exo);
        CHECK(objective(r.theta_k, s.x_hat) ==
              Catch::Approx(fo.optimal_value()).margin(1e-5));
        CHECK(r.c >= -1.0);
        CHECK(r.c <= 1.0);
    }
}

TEST_CASE("decomposition matches the brute-force extensive formulation") {
    // d = 2 knapsack, N_val <= 5: alpha from the quantile decomposition equals
    // the discretized extensive solve within 1e-3
    RandomSource rng = make_rng(33);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (int rep = 0; rep < 5; ++rep) {
        const KnapsackParams kp{{u(rng), u(rng)}, u(rng) * 1.5};
        Vec tb_raw = {u(rng), u(rng)};
        const CostVector tb = CostVector(tb_raw).unit();
        GroundTruthConfig cfg;
        cfg.kind = ProblemKind::knapsack;
        cfg.theta_star = CostVector({u(rng), u(rng)});
        cfg.weights = kp.weights;
        cfg.seed = 50 + rep;
        const auto samples = generate_samples(cfg, 4);
        std::vector<Observation> val;
        for (const auto& s : samples) val.push_back({s.x_hat, s.exo});

        const double gamma = 0.6;
        const auto res = calibrate(tb, val, gamma, ProblemKind::knapsack);

        Vec brute_scores;
        for (const auto& o : val)
            brute_scores.push_back(grid_conformity_knapsack(
                o.decision, std::get<KnapsackParams>(o.exo), tb.values(), 100000));
        const int tau = static_cast<int>(std::ceil(gamma * (val.size() + 1) - 1e-9));
        const double alpha_brute =
            std::acos(std::clamp(quantile_gamma(brute_scores, tau), -1.0, 1.0));
        CHECK(res.alpha_gamma == Catch::Approx(alpha_brute).margin(1e-3));
    }
}
