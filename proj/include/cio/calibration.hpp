#ifndef CIO_CALIBRATION_HPP
#define CIO_CALIBRATION_HPP

#include <cmath>
#include <utility>
#include <vector>

#include "cio/common.hpp"
#include "cio/forward.hpp"
#include "cio/kernel.hpp"
#include "cio/types.hpp"

namespace cio {

/// Per-sample conformity scores c_k with the unit vectors that realize them.
struct ConformityScores {
    Vec scores;
    std::vector<CostVector> thetas;
};

struct CalibrationResult {
    double alpha_gamma = 0.0;
    int tau = 0;
    double gamma = 0.0;
    ConformityScores scores;
};

struct ScoreResult {
    double c = 0.0;
    CostVector theta_k;
    int iterations = 0;
};

namespace cal_detail {

/// Audits that theta_k makes x_hat optimal, by one exact forward solve.
inline void verify_realizable(const CostVector& theta_k, const Decision& x_hat,
                              const ForwardInstance& inst) {
    const auto fo = solve_forward(theta_k, inst);
    const double val = objective(theta_k, x_hat);
    if (std::abs(val - fo.optimal_value()) > tol::value_compare)
        throw Error("conformity_score: returned theta does not rationalize the decision");
}

inline ScoreResult score_shortest_path_digraph(const Vec& x_hat, const Digraph& g,
                                               int origin, int destination,
                                               const CostVector& theta_bar) {
    const int d = g.num_edges();
    const int n = g.num_nodes;

    // maximize theta' theta_bar subject to LP optimality of x_hat:
    // dual feasibility  w_j - w_i - v_e <= theta_e,
    // strong duality    w_dest - w_origin - sum_e v_e = theta' x_hat,
    // v >= 0, ||theta|| <= 1. w_origin is pinned to 0 (translation invariance).
    LinearProgram lp;
    lp.sense = Sense::maximize;
    const int j_theta = lp.add_vars(d, -kInf, kInf);
    const int j_w = lp.add_vars(n, -kInf, kInf);
    const int j_v = lp.add_vars(d, 0.0, kInf);
    lp.lower[j_w + origin] = 0.0;
    lp.upper[j_w + origin] = 0.0;
    for (int i = 0; i < d; ++i) lp.c[j_theta + i] = theta_bar[i];

    for (int e = 0; e < d; ++e) {
        const auto [i, j] = g.edges[e];
        lp.add_row_sparse(
            {{j_w + j, 1.0}, {j_w + i, -1.0}, {j_v + e, -1.0}, {j_theta + e, -1.0}},
            RowSense::le, 0.0);
    }
    {
        std::vector<std::pair<int, double>> row;
        row.reserve(d + n + 2);
        row.emplace_back(j_w + destination, 1.0);
        row.emplace_back(j_w + origin, -1.0);
        for (int e = 0; e < d; ++e) row.emplace_back(j_v + e, -1.0);
        for (int e = 0; e < d; ++e)
            if (x_hat[e] != 0.0) row.emplace_back(j_theta + e, -x_hat[e]);
        lp.add_row_sparse(row, RowSense::eq, 0.0);
    }

    std::vector<int> ball(d);
    for (int i = 0; i < d; ++i) ball[i] = j_theta + i;
    KelleyOptions opt;
    opt.conic_rows = true;  // all rows are homogeneous in (theta, w, v)
    const Vec anchor = theta_bar.values();
    opt.anchor = &anchor;
    KelleyResult k = kelley_ball_max(std::move(lp), ball, opt);

    ScoreResult out;
    out.theta_k = CostVector(k.theta);
    out.c = std::clamp(dot(out.theta_k.values(), theta_bar.values()), -1.0, 1.0);
    out.iterations = k.iterations;
    return out;
}

inline ScoreResult score_shortest_path(const Decision& x_hat, const GridParams& gp,
                                       const CostVector& theta_bar) {
    const Digraph g = make_grid_digraph(gp.rows, gp.cols);
    return score_shortest_path_digraph(x_hat.values(), g, gp.origin, gp.destination,
                                       theta_bar);
}

}  // namespace cal_detail

/// c_k = max { theta' theta_bar : x_hat in X^OPT(theta, u), ||theta|| <= 1 },
/// with the maximizing theta returned and audited by one exact forward solve.
///
/// The inverse-feasible set is the polar of the cone spanned by the decision
/// differences (x_hat - x for minimization, x - x_hat for maximization) over
/// x in X(u), so the score is the norm of theta_bar's residual after
/// projecting onto that cone (Moreau). The projection runs the min-norm-point
/// active-set scheme with the exact forward solver generating the most
/// violated difference vector, which is the optimality-cut loop of the
/// knapsack calibration subproblem with the norm constraint handled exactly;
/// for the shortest path it is equivalent, by LP duality, to the
/// dual-feasibility/strong-duality formulation (kept as a cross-check in
/// score_shortest_path_digraph).
inline ScoreResult conformity_score(const Decision& x_hat, const ExoParams& exo,
                                    const CostVector& theta_bar, ProblemKind kind,
                                    int max_cuts = 500) {
    if (std::abs(norm2(theta_bar.values()) - 1.0) > 1e-6)
        throw Error("conformity_score: theta_bar must be unit norm");
    const ForwardInstance inst = make_instance(exo);
    if (inst.kind != kind) throw Error("conformity_score: kind mismatch");
    if (!is_feasible(x_hat, inst, 1e-6))
        throw Error("conformity_score: decision infeasible for its instance");

    const Vec& xh = x_hat.values();
    const bool maximize = inst.sense == Sense::maximize;
    const GeneratorOracle lmo = [&](const Vec& r) {
        const auto fo = solve_forward(CostVector(Vec(r)), inst);
        const Vec& xr = fo.representative().values();
        Vec g(xh.size());
        for (std::size_t i = 0; i < g.size(); ++i)
            g[i] = maximize ? xr[i] - xh[i] : xh[i] - xr[i];
        return g;
    };
    const ConeProjectionResult proj =
        project_onto_cone(theta_bar.values(), lmo, max_cuts);

    ScoreResult out;
    out.iterations = proj.lmo_calls;
    if (proj.norm < 1e-9) {
        // theta_bar lies in the difference cone itself; only the degenerate
        // zero vector rationalizes, and the relaxed score floors at 0
        out.c = 0.0;
        out.theta_k = CostVector(Vec(xh.size(), 0.0));
    } else {
        out.theta_k = CostVector(scaled(proj.residual, 1.0 / proj.norm));
        out.c = std::clamp(dot(out.theta_k.values(), theta_bar.values()), -1.0, 1.0);
    }
    cal_detail::verify_realizable(out.theta_k, x_hat, inst);
    return out;
}

/// Scores for a set of observations; the per-sample solves run in parallel.
inline ConformityScores conformity_scores(const std::vector<Observation>& obs,
                                          const CostVector& theta_bar, ProblemKind kind,
                                          int jobs = 1) {
    ConformityScores out;
    out.scores.resize(obs.size());
    out.thetas.resize(obs.size());
    parallel_for(obs.size(), jobs, [&](std::size_t k) {
        const ScoreResult r = conformity_score(obs[k].decision, obs[k].exo, theta_bar, kind);
        out.scores[k] = r.c;
        out.thetas[k] = r.theta_k;
    });
    return out;
}

/// Quantile step alone, for re-calibrating at several gammas from one score
/// computation. gamma = 0 degenerates to the singleton cone (alpha = 0).
inline CalibrationResult calibrate_from_scores(ConformityScores scores, double gamma) {
    const int n_val = static_cast<int>(scores.scores.size());
    if (n_val == 0) throw Error("calibrate: empty validation split");
    if (gamma < 0.0 || gamma > n_val / (n_val + 1.0) + 1e-12)
        throw Error(
            "calibrate: gamma outside [0, N_val/(N_val+1)], the validity range of the "
            "coverage guarantee");
    CalibrationResult res;
    res.gamma = gamma;
    res.scores = std::move(scores);
    res.tau = static_cast<int>(std::ceil(gamma * (n_val + 1) - 1e-9));
    if (res.tau <= 0) {
        res.tau = 0;
        res.alpha_gamma = 0.0;  // no coverage requirement binds
        return res;
    }
    const double c = std::clamp(quantile_gamma(res.scores.scores, res.tau), -1.0, 1.0);
    res.alpha_gamma = std::acos(c);
    return res;
}

/// Calibrates the cone half-angle: tau = ceil(gamma (N_val + 1)),
/// alpha_gamma = arccos of the tau-th largest score.
inline CalibrationResult calibrate(const CostVector& theta_bar,
                                   const std::vector<Observation>& val, double gamma,
                                   ProblemKind kind, int jobs = 1) {
    if (val.empty()) throw Error("calibrate: empty validation split");
    const int n_val = static_cast<int>(val.size());
    if (gamma < 0.0 || gamma > n_val / (n_val + 1.0) + 1e-12)
        throw Error(
            "calibrate: gamma outside [0, N_val/(N_val+1)], the validity range of the "
            "coverage guarantee");
    return calibrate_from_scores(conformity_scores(val, theta_bar, kind, jobs), gamma);
}

}  // namespace cio

#endif  // CIO_CALIBRATION_HPP
