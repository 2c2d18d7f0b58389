#ifndef CIO_EXPERIMENTS_HPP
#define CIO_EXPERIMENTS_HPP

#include <chrono>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cio/calibration.hpp"
#include "cio/evaluation.hpp"
#include "cio/example1.hpp"
#include "cio/io.hpp"
#include "cio/point_estimation.hpp"
#include "cio/robust.hpp"

namespace cio {

using nlohmann::json;

/// Batch experiment configuration; serialized to/from JSON.
struct ExperimentConfig {
    ProblemKind kind = ProblemKind::shortest_path_grid;
    int rows = 5, cols = 5;           // shortest path grid
    int items = 10;                   // knapsack dimension
    int n = 1000;                     // dataset size (train + val + test)
    double train_frac = 0.6, val_frac = 0.2;
    std::vector<double> gammas = {0.8};
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    double alpha_override = -1.0;     // > 0 forces the cone half-angle
    double theta_lo = 1.0, theta_hi = 10.0;
    double weight_lo = 1.0, weight_hi = 10.0;
    NoiseSpec noise;
    double q_lo = 0.2, q_hi = 5.0;
    int jobs = 0;                     // 0 = hardware concurrency
    int max_fit_iters = 100;
    int rfo_max_iter = 600;
    std::vector<int> coverage_n = {250, 500, 1000};        // coverage sweep
    std::vector<int> pool_sizes = {160, 320, 480, 640, 800};  // split sweep
    std::vector<double> val_ratios = {0.2, 0.4, 0.6, 0.8};

    int dim() const {
        return kind == ProblemKind::shortest_path_grid ? grid_edge_count(rows, cols)
                                                       : items;
    }

    void validate() const {
        if (n < 10) throw Error("config: n too small");
        if (train_frac <= 0 || val_frac <= 0 || train_frac + val_frac >= 1.0)
            throw Error("config: split fractions must be positive and leave a test part");
        if (seeds.empty()) throw Error("config: no seeds");
        if (gammas.empty()) throw Error("config: no gamma values");
        const int n_val = static_cast<int>(std::lround(val_frac * n));
        for (double g : gammas)
            if (g < 0.0 || g > n_val / (n_val + 1.0))
                throw Error("config: gamma outside [0, N_val/(N_val+1)]");
        if (kind == ProblemKind::shortest_path_grid && (rows < 2 || cols < 2))
            throw Error("config: grid too small");
        if (kind == ProblemKind::knapsack && (items < 2 || items > 25))
            throw Error("config: knapsack items must lie in [2, 25]");
    }

    json to_json() const {
        json j;
        j["problem"] = kind == ProblemKind::shortest_path_grid ? "shortest_path" : "knapsack";
        j["rows"] = rows;
        j["cols"] = cols;
        j["items"] = items;
        j["n"] = n;
        j["split"] = {train_frac, val_frac, 1.0 - train_frac - val_frac};
        j["gammas"] = gammas;
        j["seeds"] = seeds;
        j["alpha_override"] = alpha_override;
        j["theta_star_range"] = {theta_lo, theta_hi};
        j["weight_range"] = {weight_lo, weight_hi};
        j["budget_factor_range"] = {q_lo, q_hi};
        j["noise"] = {{"p_lo", noise.p_lo},
                      {"p_hi", noise.p_hi},
                      {"eps_sd", noise.eps_sd},
                      {"eps0", noise.eps0}};
        j["jobs"] = jobs;
        j["max_fit_iters"] = max_fit_iters;
        j["rfo_max_iter"] = rfo_max_iter;
        j["coverage_n"] = coverage_n;
        j["pool_sizes"] = pool_sizes;
        j["val_ratios"] = val_ratios;
        return j;
    }

    static ExperimentConfig from_json(const json& j) {
        ExperimentConfig c;
        const std::string problem = j.value("problem", "shortest_path");
        if (problem == "shortest_path")
            c.kind = ProblemKind::shortest_path_grid;
        else if (problem == "knapsack")
            c.kind = ProblemKind::knapsack;
        else
            throw Error("config: unknown problem '" + problem + "'");
        c.rows = j.value("rows", c.rows);
        c.cols = j.value("cols", c.cols);
        c.items = j.value("items", c.items);
        c.n = j.value("n", c.n);
        if (j.contains("split")) {
            const auto s = j["split"];
            c.train_frac = s.at(0).get<double>();
            c.val_frac = s.at(1).get<double>();
        }
        if (j.contains("gammas")) c.gammas = j["gammas"].get<std::vector<double>>();
        if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
        if (j.contains("alpha_override") && !j["alpha_override"].is_null())
            c.alpha_override = j["alpha_override"].get<double>();
        if (j.contains("theta_star_range")) {
            c.theta_lo = j["theta_star_range"].at(0).get<double>();
            c.theta_hi = j["theta_star_range"].at(1).get<double>();
        }
        if (j.contains("weight_range")) {
            c.weight_lo = j["weight_range"].at(0).get<double>();
            c.weight_hi = j["weight_range"].at(1).get<double>();
        }
        if (j.contains("budget_factor_range")) {
            c.q_lo = j["budget_factor_range"].at(0).get<double>();
            c.q_hi = j["budget_factor_range"].at(1).get<double>();
        }
        if (j.contains("noise")) {
            const auto& nj = j["noise"];
            c.noise.p_lo = nj.value("p_lo", c.noise.p_lo);
            c.noise.p_hi = nj.value("p_hi", c.noise.p_hi);
            c.noise.eps_sd = nj.value("eps_sd", c.noise.eps_sd);
            c.noise.eps0 = nj.value("eps0", c.noise.eps0);
        }
        c.jobs = j.value("jobs", c.jobs);
        c.max_fit_iters = j.value("max_fit_iters", c.max_fit_iters);
        c.rfo_max_iter = j.value("rfo_max_iter", c.rfo_max_iter);
        if (j.contains("coverage_n")) c.coverage_n = j["coverage_n"].get<std::vector<int>>();
        if (j.contains("pool_sizes")) c.pool_sizes = j["pool_sizes"].get<std::vector<int>>();
        if (j.contains("val_ratios"))
            c.val_ratios = j["val_ratios"].get<std::vector<double>>();
        c.validate();
        return c;
    }

    std::string hash() const { return hash_hex(fnv1a64(to_json().dump())); }
};

/// Ground truth drawn per seed: theta* and (for knapsack) the shared weights.
inline GroundTruthConfig draw_ground_truth(const ExperimentConfig& cfg,
                                           std::uint64_t seed) {
    GroundTruthConfig gt;
    gt.kind = cfg.kind;
    gt.rows = cfg.rows;
    gt.cols = cfg.cols;
    gt.noise = cfg.noise;
    gt.q_lo = cfg.q_lo;
    gt.q_hi = cfg.q_hi;
    gt.seed = splitmix64(seed ^ 0x67726f756e64ULL);
    RandomSource rng = make_rng(seed, 0x7468657461ULL);
    std::uniform_real_distribution<double> ut(cfg.theta_lo, cfg.theta_hi);
    Vec ts(cfg.dim());
    for (double& v : ts) v = ut(rng);
    gt.theta_star = CostVector(std::move(ts));
    if (cfg.kind == ProblemKind::knapsack) {
        std::uniform_real_distribution<double> uw(cfg.weight_lo, cfg.weight_hi);
        gt.weights.resize(cfg.items);
        for (double& w : gt.weights) w = uw(rng);
    }
    return gt;
}

struct GammaResult {
    double gamma = 0.0;
    int tau = 0;
    double alpha = 0.0;
    EvaluationReport cio;
    double coverage = 0.0;
    double rfo_seconds_per_decision = 0.0;
};

struct SeedResult {
    std::uint64_t seed = 0;
    int n_train = 0, n_val = 0, n_test = 0;
    EvaluationReport classic;
    std::vector<GammaResult> per_gamma;
    double fit_classic_seconds = 0.0;
    double fit_conformal_seconds = 0.0;
    double calibrate_seconds = 0.0;
    double fo_seconds_per_decision = 0.0;
};

namespace exp_detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace exp_detail

/// One full pipeline run: generate, fit (classic on train+val, conformal on
/// train), calibrate at every gamma, prescribe and evaluate on the test set.
inline SeedResult run_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
    using clock = std::chrono::steady_clock;
    cfg.validate();
    const GroundTruthConfig gt = draw_ground_truth(cfg, seed);
    const SyntheticData data = generate_synthetic(gt, cfg.n, cfg.train_frac, cfg.val_frac);

    SeedResult res;
    res.seed = seed;
    res.n_train = static_cast<int>(data.dataset.train_indices().size());
    res.n_val = static_cast<int>(data.dataset.val_indices().size());
    res.n_test = static_cast<int>(data.test.size());

    FitOptions fo_opt;
    fo_opt.max_iter = cfg.max_fit_iters;
    fo_opt.jobs = cfg.jobs;

    auto t0 = clock::now();
    const PointEstimate pe_conf =
        fit_suboptimality(data.dataset.train_set(), cfg.kind, fo_opt);
    res.fit_conformal_seconds = exp_detail::seconds_since(t0);

    t0 = clock::now();
    const PointEstimate pe_classic =
        fit_suboptimality(data.dataset.observations(), cfg.kind, fo_opt);
    res.fit_classic_seconds = exp_detail::seconds_since(t0);

    t0 = clock::now();
    const ConformityScores val_scores =
        conformity_scores(data.dataset.val_set(), pe_conf.theta_bar, cfg.kind, cfg.jobs);
    res.calibrate_seconds = exp_detail::seconds_since(t0);

    // classic policy: plain forward solves at the classic estimate
    t0 = clock::now();
    const Policy classic_policy = [&](const ExoParams& exo, RandomSource& rng) {
        return forward_oracle(pe_classic.theta_bar, make_instance(exo), rng);
    };
    res.classic = estimate_gaps(classic_policy, data.test, gt.theta_star, seed ^ 0xc1a);
    res.fo_seconds_per_decision =
        data.test.empty() ? 0.0 : exp_detail::seconds_since(t0) / data.test.size();

    // test-set conformity scores (one pass; thresholded per gamma)
    std::vector<Observation> test_obs;
    test_obs.reserve(data.test.size());
    for (const auto& s : data.test) test_obs.push_back({s.x_hat, s.exo});
    const ConformityScores test_scores =
        conformity_scores(test_obs, pe_conf.theta_bar, cfg.kind, cfg.jobs);

    for (double gamma : cfg.gammas) {
        GammaResult gr;
        const CalibrationResult cal = calibrate_from_scores(val_scores, gamma);
        gr.gamma = gamma;
        gr.tau = cal.tau;
        gr.alpha = cfg.alpha_override > 0.0 ? cfg.alpha_override : cal.alpha_gamma;

        t0 = clock::now();
        if (gr.alpha > 0.0) {
            const ConeUncertaintySet cone(pe_conf.theta_bar, gr.alpha);
            // the robust solve depends on the instance only; repeated
            // origin-destination pairs reuse the cached decision
            auto cache = std::make_shared<std::map<std::pair<int, int>, Decision>>();
            const Policy cio_policy = [&, cache](const ExoParams& exo, RandomSource&) {
                if (const auto* gp = std::get_if<GridParams>(&exo)) {
                    const auto key = std::make_pair(gp->origin, gp->destination);
                    const auto it = cache->find(key);
                    if (it != cache->end()) return it->second;
                    Decision d = solve_rfo(cone, make_instance(exo), cfg.rfo_max_iter).x;
                    cache->emplace(key, d);
                    return d;
                }
                return solve_rfo(cone, make_instance(exo), cfg.rfo_max_iter).x;
            };
            gr.cio = estimate_gaps(cio_policy, data.test, gt.theta_star, seed ^ 0xc10);
        } else {
            // degenerate cone: the robust problem collapses to the forward
            // problem at the point estimate
            const Policy cio_policy = [&](const ExoParams& exo, RandomSource& rng) {
                return forward_oracle(pe_conf.theta_bar, make_instance(exo), rng);
            };
            gr.cio = estimate_gaps(cio_policy, data.test, gt.theta_star, seed ^ 0xc10);
        }
        gr.rfo_seconds_per_decision =
            data.test.empty() ? 0.0 : exp_detail::seconds_since(t0) / data.test.size();

        const double threshold = std::cos(gr.alpha) - 1e-8;
        int hit = 0;
        for (double c : test_scores.scores)
            if (c >= threshold) ++hit;
        gr.coverage = test_obs.empty() ? 0.0 : static_cast<double>(hit) / test_obs.size();
        gr.cio.coverage = gr.coverage;
        res.per_gamma.push_back(std::move(gr));
    }
    return res;
}

/// Coverage study: per (n, seed, gamma) the calibrated alpha and the
/// out-of-sample coverage on the held-out test split. No gap evaluation.
struct CoverageRow {
    int n = 0, n_val = 0;
    std::uint64_t seed = 0;
    double gamma = 0.0;
    int tau = 0;
    double alpha = 0.0;
    double coverage = 0.0;
};

inline std::vector<CoverageRow> coverage_sweep(const ExperimentConfig& base,
                                               const std::vector<int>& n_values) {
    std::vector<std::pair<int, std::uint64_t>> tasks;
    for (int n : n_values)
        for (std::uint64_t seed : base.seeds) tasks.emplace_back(n, seed);
    std::vector<std::vector<CoverageRow>> per_task(tasks.size());
    parallel_for(tasks.size(), base.jobs, [&](std::size_t ti) {
        auto [n, seed] = tasks[ti];
        ExperimentConfig cfg = base;
        cfg.n = n;
        cfg.jobs = 1;
        const GroundTruthConfig gt = draw_ground_truth(cfg, seed);
        const SyntheticData data =
            generate_synthetic(gt, cfg.n, cfg.train_frac, cfg.val_frac);
        const PointEstimate pe = fit_suboptimality(data.dataset.train_set(), cfg.kind,
                                                   FitOptions{cfg.max_fit_iters,
                                                              tol::cut_violation, 1});
        const ConformityScores val_scores =
            conformity_scores(data.dataset.val_set(), pe.theta_bar, cfg.kind, 1);
        std::vector<Observation> test_obs;
        for (const auto& s : data.test) test_obs.push_back({s.x_hat, s.exo});
        const ConformityScores test_scores =
            conformity_scores(test_obs, pe.theta_bar, cfg.kind, 1);
        for (double gamma : cfg.gammas) {
            const CalibrationResult cal = calibrate_from_scores(val_scores, gamma);
            CoverageRow row;
            row.n = n;
            row.n_val = static_cast<int>(data.dataset.val_indices().size());
            row.seed = seed;
            row.gamma = gamma;
            row.tau = cal.tau;
            row.alpha = cal.alpha_gamma;
            const double threshold = std::cos(cal.alpha_gamma) - 1e-8;
            int hit = 0;
            for (double c : test_scores.scores)
                if (c >= threshold) ++hit;
            row.coverage = static_cast<double>(hit) / test_scores.scores.size();
            per_task[ti].push_back(row);
        }
    });
    std::vector<CoverageRow> rows;
    for (auto& v : per_task) rows.insert(rows.end(), v.begin(), v.end());
    return rows;
}

/// Classic-vs-conformal comparison over seeds; seeds fan out to the pool.
inline std::vector<SeedResult> compare_policies(const ExperimentConfig& cfg) {
    std::vector<SeedResult> out(cfg.seeds.size());
    parallel_for(cfg.seeds.size(), cfg.jobs, [&](std::size_t i) {
        ExperimentConfig local = cfg;
        local.jobs = 1;
        out[i] = run_seed(local, cfg.seeds[i]);
    });
    return out;
}

struct SplitRow {
    int pool = 0;          // N_train + N_val
    double val_ratio = 0.0;
    std::uint64_t seed = 0;
    double gamma = 0.0;
    double classic_aog = 0.0, classic_pog = 0.0;
    double cio_aog = 0.0, cio_pog = 0.0;
    double aog_reduction_pct = 0.0, pog_reduction_pct = 0.0;
};

/// Split-ratio study: pool sizes x validation ratios, one gamma.
inline std::vector<SplitRow> split_sweep(const ExperimentConfig& base,
                                         const std::vector<int>& pool_sizes,
                                         const std::vector<double>& val_ratios,
                                         double gamma) {
    struct Task {
        int pool;
        double ratio;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (int pool : pool_sizes)
        for (double ratio : val_ratios)
            for (std::uint64_t seed : base.seeds) tasks.push_back({pool, ratio, seed});
    std::vector<SplitRow> rows(tasks.size());
    parallel_for(tasks.size(), base.jobs, [&](std::size_t ti) {
        const Task& tk = tasks[ti];
        ExperimentConfig cfg = base;
        cfg.jobs = 1;
        const int test_n = std::max(20, static_cast<int>(std::lround(0.25 * tk.pool)));
        cfg.n = tk.pool + test_n;
        cfg.train_frac = (1.0 - tk.ratio) * tk.pool / cfg.n;
        cfg.val_frac = tk.ratio * tk.pool / cfg.n;
        cfg.gammas = {gamma};
        const SeedResult r = run_seed(cfg, tk.seed);
        SplitRow row;
        row.pool = tk.pool;
        row.val_ratio = tk.ratio;
        row.seed = tk.seed;
        row.gamma = gamma;
        row.classic_aog = r.classic.aog;
        row.classic_pog = r.classic.pog;
        row.cio_aog = r.per_gamma.front().cio.aog;
        row.cio_pog = r.per_gamma.front().cio.pog;
        row.aog_reduction_pct =
            r.classic.aog != 0.0 ? 100.0 * (1.0 - row.cio_aog / row.classic_aog) : 0.0;
        row.pog_reduction_pct =
            r.classic.pog != 0.0 ? 100.0 * (1.0 - row.cio_pog / row.classic_pog) : 0.0;
        rows[ti] = row;
    });
    return rows;
}

struct Table1Row {
    double u = 0.0;
    double classic_aog = 0.0, classic_pog = 0.0;
    double conformal_aog = 0.0, conformal_pog = 0.0;
    double bound_aog = 0.0, bound_pog = 0.0;
};

/// The analytic Example-1 grid: closed-form classic/conformal gaps plus the
/// bound formulas evaluated with the analytic constants at alpha = pi/4.
inline std::vector<Table1Row> table1_grid(const std::vector<double>& us = {2, 10, 50,
                                                                           100}) {
    std::vector<Table1Row> rows;
    for (double u : us) {
        Table1Row r;
        r.u = u;
        const auto cl = ex1::classic_gaps(u);
        const auto co = ex1::conformal_gaps(u, M_PI / 4);
        const auto bc = ex1::bound_constants(u, M_PI / 4);
        const auto b = theorem4_bounds(bc.eta, bc.sigma, M_PI / 4, bc.mu, bc.mu_cio,
                                       bc.mu_star);
        r.classic_aog = cl.aog;
        r.classic_pog = cl.pog;
        r.conformal_aog = co.aog;
        r.conformal_pog = co.pog;
        r.bound_aog = b.aog_bound;
        r.bound_pog = b.pog_bound;
        rows.push_back(r);
    }
    return rows;
}

}  // namespace cio

#endif  // CIO_EXPERIMENTS_HPP
