#ifndef CIO_EVALUATION_HPP
#define CIO_EVALUATION_HPP

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "cio/calibration.hpp"
#include "cio/common.hpp"
#include "cio/forward.hpp"
#include "cio/types.hpp"

namespace cio {

struct NoiseSpec {
    double p_lo = 0.5;   // multiplicative perception noise, uniform
    double p_hi = 2.0;
    double eps_sd = 1.0;  // additive gaussian noise
    double eps0 = 0.1;    // positivity floor
};

/// Ground truth and instance distribution for synthetic data.
struct GroundTruthConfig {
    ProblemKind kind = ProblemKind::shortest_path_grid;
    CostVector theta_star;
    NoiseSpec noise;
    int rows = 5, cols = 5;           // shortest path grid
    Vec weights;                      // knapsack item weights, shared across DMs
    double q_lo = 0.2, q_hi = 5.0;    // knapsack budget factor, uniform
    std::uint64_t seed = 0;
};

struct GeneratedSample {
    CostVector theta_hat;  // hidden from estimators
    ExoParams exo;
    Decision x_hat;
};

namespace eval_detail {

inline CostVector perceived_theta(const CostVector& theta_star, const NoiseSpec& ns,
                                  RandomSource& rng) {
    std::uniform_real_distribution<double> up(ns.p_lo, ns.p_hi);
    std::normal_distribution<double> ue(0.0, ns.eps_sd);
    Vec t(theta_star.dim());
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double p = up(rng);
        const double eps = ns.eps_sd > 0.0 ? ue(rng) : 0.0;
        t[i] = std::max(0.0, theta_star[i] * p + eps) + ns.eps0;
    }
    return CostVector(std::move(t));
}

inline ExoParams draw_exo(const GroundTruthConfig& cfg, RandomSource& rng) {
    if (cfg.kind == ProblemKind::shortest_path_grid) {
        const int n = cfg.rows * cfg.cols;
        std::uniform_int_distribution<int> un(0, n - 1);
        for (int attempt = 0; attempt < 100; ++attempt) {
            const int o = un(rng);
            const int d = un(rng);
            if (o != d) return GridParams{cfg.rows, cfg.cols, o, d};
        }
        throw Error("generate_synthetic: failed to draw a distinct OD pair");
    }
    double wsum = 0.0;
    for (double w : cfg.weights) wsum += w;
    std::uniform_real_distribution<double> uq(cfg.q_lo, cfg.q_hi);
    return KnapsackParams{cfg.weights, uq(rng) * wsum};
}

}  // namespace eval_detail

/// n i.i.d. samples: perceived parameters, exogenous parameters, and the
/// decision produced by the forward oracle under the perceived parameters.
inline std::vector<GeneratedSample> generate_samples(const GroundTruthConfig& cfg, int n) {
    if (n < 1) throw Error("generate_synthetic: n must be positive");
    if (cfg.kind == ProblemKind::knapsack && cfg.weights.empty())
        throw Error("generate_synthetic: knapsack weights missing");
    std::vector<GeneratedSample> out;
    out.reserve(n);
    RandomSource rng = make_rng(cfg.seed, 0x64617461);
    for (int k = 0; k < n; ++k) {
        GeneratedSample s{eval_detail::perceived_theta(cfg.theta_star, cfg.noise, rng),
                          eval_detail::draw_exo(cfg, rng), Decision{}};
        s.x_hat = forward_oracle(s.theta_hat, make_instance(s.exo), rng);
        out.push_back(std::move(s));
    }
    return out;
}

struct SyntheticData {
    DecisionDataset dataset;                 // train + validation with split
    std::vector<CostVector> hidden_thetas;   // per dataset row, kept out of the
                                             // estimator-facing view
    std::vector<GeneratedSample> test;
};

/// Splits n samples into train/val (the dataset) and test. Fractions must be
/// positive and sum to 1.
inline SyntheticData generate_synthetic(const GroundTruthConfig& cfg, int n,
                                        double train_frac, double val_frac) {
    if (train_frac <= 0.0 || val_frac <= 0.0 || train_frac + val_frac >= 1.0 + 1e-12)
        throw Error("generate_synthetic: bad split fractions");
    auto samples = generate_samples(cfg, n);
    const int n_train = static_cast<int>(std::lround(train_frac * n));
    const int n_val = static_cast<int>(std::lround(val_frac * n));
    if (n_train < 1 || n_val < 1 || n_train + n_val > n)
        throw Error("generate_synthetic: split leaves an empty part");
    std::vector<Observation> obs;
    std::vector<CostVector> hidden;
    for (int k = 0; k < n_train + n_val; ++k) {
        obs.push_back({samples[k].x_hat, samples[k].exo});
        hidden.push_back(samples[k].theta_hat);
    }
    std::vector<std::size_t> tr(n_train), va(n_val);
    for (int k = 0; k < n_train; ++k) tr[k] = k;
    for (int k = 0; k < n_val; ++k) va[k] = n_train + k;
    DecisionDataset ds(cfg.kind, std::move(obs), std::move(tr), std::move(va));
    std::vector<GeneratedSample> test(samples.begin() + n_train + n_val, samples.end());
    return SyntheticData{std::move(ds), std::move(hidden), std::move(test)};
}

/// A decision policy: maps exogenous parameters to a feasible decision, with
/// caller-owned randomness for randomized policies.
using Policy = std::function<Decision(const ExoParams&, RandomSource&)>;

struct EvaluationReport {
    double aog = 0.0, aog_se = 0.0;
    double pog = 0.0, pog_se = 0.0;
    double coverage = -1.0;  // set by coverage runs; -1 when not measured
    int n_test = 0;
    int failures = 0;
};

namespace eval_detail {

inline std::pair<double, double> mean_se(const Vec& v) {
    if (v.empty()) return {0.0, 0.0};
    double m = 0.0;
    for (double x : v) m += x;
    m /= v.size();
    if (v.size() == 1) return {m, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const double sd = std::sqrt(ss / (v.size() - 1));
    return {m, sd / std::sqrt(static_cast<double>(v.size()))};
}

}  // namespace eval_detail

/// Monte Carlo AOG/POG of a policy on a test set. Gaps are sense-adjusted so
/// both are non-negative in expectation. A policy failure on an instance is
/// recorded and the instance excluded.
inline EvaluationReport estimate_gaps(const Policy& policy,
                                      const std::vector<GeneratedSample>& test,
                                      const CostVector& theta_star, std::uint64_t seed) {
    if (test.empty()) throw Error("estimate_gaps: empty test set");
    Vec aogs, pogs;
    aogs.reserve(test.size());
    pogs.reserve(test.size());
    int failures = 0;
    RandomSource rng = make_rng(seed, 0x6576616c);
    for (const auto& s : test) {
        const ForwardInstance inst = make_instance(s.exo);
        const double sgn = inst.sense == Sense::minimize ? 1.0 : -1.0;
        Decision xbar;
        try {
            xbar = policy(s.exo, rng);
        } catch (const Error&) {
            ++failures;
            continue;
        }
        const double f_star = solve_forward(theta_star, inst).optimal_value();
        const double f_hat = solve_forward(s.theta_hat, inst).optimal_value();
        aogs.push_back(sgn * (objective(theta_star, xbar) - f_star));
        pogs.push_back(sgn * (objective(s.theta_hat, xbar) - f_hat));
    }
    EvaluationReport rep;
    std::tie(rep.aog, rep.aog_se) = eval_detail::mean_se(aogs);
    std::tie(rep.pog, rep.pog_se) = eval_detail::mean_se(pogs);
    rep.n_test = static_cast<int>(aogs.size());
    rep.failures = failures;
    return rep;
}

/// Fraction of observations whose inverse-feasible set intersects the cone:
/// conformity score >= cos(alpha) - 1e-8.
inline double empirical_coverage(const ConeUncertaintySet& cone,
                                 const std::vector<Observation>& obs, ProblemKind kind,
                                 int jobs = 1) {
    if (obs.empty()) throw Error("empirical_coverage: empty test set");
    const ConformityScores s = conformity_scores(obs, cone.center(), kind, jobs);
    const double threshold = std::cos(cone.half_angle()) - 1e-8;
    int hit = 0;
    for (double c : s.scores)
        if (c >= threshold) ++hit;
    return static_cast<double>(hit) / obs.size();
}

struct GapBounds {
    double pog_bound = 0.0;
    double aog_bound = 0.0;
};

/// Optimality-gap bound formulas:
///   POG <= (eta - 2 cos 2a1 + 2) mu + eta mu_cio
///   AOG <= (2 - 2 cos 2a1 + eta + sigma) mu_star + (eta + sigma) mu_cio
inline GapBounds theorem4_bounds(double eta, double sigma, double alpha1, double mu,
                                 double mu_cio, double mu_star) {
    if (eta < 0 || sigma < 0 || mu < 0 || mu_cio < 0 || mu_star < 0)
        throw Error("theorem4_bounds: constants must be non-negative");
    if (!(alpha1 > 0.0) || alpha1 > M_PI + 1e-12)
        throw Error("theorem4_bounds: alpha1 must lie in (0, pi]");
    const double c2 = std::cos(2.0 * alpha1);
    GapBounds b;
    b.pog_bound = (eta - 2.0 * c2 + 2.0) * mu + eta * mu_cio;
    b.aog_bound = (2.0 - 2.0 * c2 + eta + sigma) * mu_star + (eta + sigma) * mu_cio;
    return b;
}

/// Coverage radius of the asymptotic-exactness statement:
/// sqrt((8 log(N+1) + 2 log N)/N) + 2/N.
inline double coverage_radius(int n_val) {
    if (n_val < 1) throw Error("coverage_radius: n_val must be positive");
    const double n = n_val;
    return std::sqrt((8.0 * std::log(n + 1.0) + 2.0 * std::log(n)) / n) + 2.0 / n;
}

}  // namespace cio

#endif  // CIO_EVALUATION_HPP
