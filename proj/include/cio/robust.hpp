#ifndef CIO_ROBUST_HPP
#define CIO_ROBUST_HPP

#include <utility>
#include <vector>

#include "cio/common.hpp"
#include "cio/forward.hpp"
#include "cio/kernel.hpp"
#include "cio/lp.hpp"
#include "cio/types.hpp"

namespace cio {

struct RobustSolution {
    Decision x;
    double worst_case_value = 0.0;  // exact over the full cone, sense-adjusted
    std::vector<CostVector> active_thetas;
    int iterations = 0;
};

struct RfoError : Error {
    RfoError(const std::string& msg, RobustSolution best)
        : Error(msg), best_iterate(std::move(best)) {}
    RobustSolution best_iterate;
};

namespace rfo_detail {

inline bool is_duplicate_scenario(const std::vector<CostVector>& thetas, const Vec& cand) {
    for (const auto& t : thetas)
        if (angle_between(t.values(), cand) < tol::scenario_dedup) return true;
    return false;
}

/// A cap point between theta and the center, at the fraction f of their
/// angle; strengthens each master round with a second scenario.
inline Vec rotate_toward_center(const Vec& theta, const ConeUncertaintySet& cone,
                                double f) {
    const Vec& cen = cone.center().values();
    const double a = dot(theta, cen);
    Vec p = theta;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] -= a * cen[i];
    const double np = norm2(p);
    if (np < 1e-12) return theta;
    const double ang = std::atan2(np, a) * f;
    Vec out(theta.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::cos(ang) * cen[i] + std::sin(ang) * p[i] / np;
    return out;
}

/// Generic min-max scenario loop over an LP-described feasible region:
///   minimize Omega  s.t.  theta'x <= Omega for theta in the scenario set,
/// with the worst case certified by the closed-form cap support. Omega is a
/// lower bound that tightens monotonically; the loop stops once the best
/// iterate's exact worst case meets it within 1e-6 and returns that iterate.
inline RobustSolution minimize_over_lp(const ConeUncertaintySet& cone, LinearProgram base,
                                       int x_offset, int x_dim, int omega_col,
                                       int max_iter) {
    std::vector<CostVector> scenarios{cone.center()};
    LinearProgram lp = std::move(base);
    {
        std::vector<std::pair<int, double>> row;
        for (int i = 0; i < x_dim; ++i)
            if (cone.center()[i] != 0.0) row.emplace_back(x_offset + i, cone.center()[i]);
        row.emplace_back(omega_col, -1.0);
        lp.add_row_sparse(row, RowSense::le, 0.0);
    }
    auto push_scenario = [&](const Vec& th) {
        if (rfo_detail::is_duplicate_scenario(scenarios, th)) return false;
        scenarios.emplace_back(Vec(th));
        std::vector<std::pair<int, double>> row;
        row.reserve(x_dim + 1);
        for (int i = 0; i < x_dim; ++i)
            if (th[i] != 0.0) row.emplace_back(x_offset + i, th[i]);
        row.emplace_back(omega_col, -1.0);
        lp.add_row_sparse(row, RowSense::le, 0.0);
        return true;
    };

    RobustSolution best;
    double best_ub = kInf;
    for (int it = 0; it < max_iter; ++it) {
        const LpSolution sol = simplex_solve(lp);
        if (sol.status != LpStatus::optimal)
            throw Error("solve_rfo: master LP not optimal");
        Vec x(sol.x.begin() + x_offset, sol.x.begin() + x_offset + x_dim);
        const double omega = sol.x[omega_col];
        const CapSupport worst = spherical_cap_support(x, cone);

        if (worst.value < best_ub) {
            best_ub = worst.value;
            best.x = Decision(std::move(x));
            best.worst_case_value = worst.value;
        }
        best.iterations = it + 1;
        if (best_ub <= omega + tol::ball_violation) {
            best.active_thetas = scenarios;
            return best;
        }
        bool added = push_scenario(worst.argmax);
        added |= push_scenario(rotate_toward_center(worst.argmax, cone, 0.5));
        if (!added) {
            best.active_thetas = scenarios;
            throw RfoError("solve_rfo: stalled on a duplicate scenario", best);
        }
    }
    best.active_thetas = scenarios;
    throw RfoError("solve_rfo: max_iter exceeded", best);
}

inline RobustSolution solve_rfo_shortest_path(const ConeUncertaintySet& cone,
                                              const GridParams& gp, int max_iter) {
    const Digraph g = make_grid_digraph(gp.rows, gp.cols);
    const int d = g.num_edges();
    LinearProgram lp;
    const int j_x = lp.add_vars(d, 0.0, 1.0);      // LP relaxation of the flow problem
    const int j_omega = lp.add_vars(1, -kInf, kInf, 1.0);
    for (int node = 0; node < g.num_nodes; ++node) {
        std::vector<std::pair<int, double>> row;
        for (int e = 0; e < d; ++e) {
            if (g.edges[e].second == node) row.emplace_back(j_x + e, 1.0);
            if (g.edges[e].first == node) row.emplace_back(j_x + e, -1.0);
        }
        double rhs = 0.0;
        if (node == gp.destination) rhs = 1.0;
        if (node == gp.origin) rhs = -1.0;
        lp.add_row_sparse(row, RowSense::eq, rhs);
    }
    return minimize_over_lp(cone, std::move(lp), j_x, d, j_omega, max_iter);
}

/// Max-min over the enumerated feasible subsets; the inner worst case over
/// the scenario set is maintained incrementally per candidate.
inline RobustSolution solve_rfo_knapsack(const ConeUncertaintySet& cone,
                                         const KnapsackParams& kp, int max_iter) {
    const auto subsets = knapsack_feasible_set(kp);
    if (subsets.empty()) throw Error("solve_rfo: no feasible subset");
    std::vector<CostVector> scenarios{cone.center()};
    Vec min_vals(subsets.size());
    for (std::size_t s = 0; s < subsets.size(); ++s)
        min_vals[s] = dot(cone.center().values(), subsets[s].values());

    RobustSolution best;
    for (int it = 0; it < max_iter; ++it) {
        std::size_t star = 0;
        for (std::size_t s = 1; s < subsets.size(); ++s)
            if (min_vals[s] > min_vals[star] + 1e-15) star = s;
        const double omega = min_vals[star];
        const CapSupport worst = spherical_cap_min(subsets[star].values(), cone);

        best.x = subsets[star];
        best.worst_case_value = worst.value;
        best.active_thetas = scenarios;
        best.iterations = it + 1;
        if (worst.value >= omega - tol::ball_violation) return best;
        if (rfo_detail::is_duplicate_scenario(scenarios, worst.argmax))
            throw RfoError("solve_rfo: stalled on a duplicate scenario", best);
        scenarios.emplace_back(Vec(worst.argmax));
        for (std::size_t s = 0; s < subsets.size(); ++s)
            min_vals[s] =
                std::min(min_vals[s], dot(worst.argmax, subsets[s].values()));
    }
    throw RfoError("solve_rfo: max_iter exceeded", best);
}

}  // namespace rfo_detail

/// Robust forward problem over the cone: min-max for shortest path (over the
/// LP-relaxed flow polytope; a fractional flow is returned as-is), max-min
/// with exact subset enumeration for knapsack.
inline RobustSolution solve_rfo(const ConeUncertaintySet& cone, const ForwardInstance& inst,
                                int max_iter = 200) {
    if (static_cast<int>(cone.center().dim()) != inst.dim)
        throw Error("solve_rfo: dimension mismatch");
    if (inst.kind == ProblemKind::shortest_path_grid)
        return rfo_detail::solve_rfo_shortest_path(cone, std::get<GridParams>(inst.exo),
                                                   max_iter);
    return rfo_detail::solve_rfo_knapsack(cone, std::get<KnapsackParams>(inst.exo),
                                          max_iter);
}

/// Samples an integral path from a fractional flow by a flow-weighted walk;
/// offered for consumers that need paths rather than flows.
inline Decision sample_path_decomposition(const Decision& flow, const ForwardInstance& inst,
                                          RandomSource& rng) {
    const auto& gp = std::get<GridParams>(inst.exo);
    const Digraph g = make_grid_digraph(gp.rows, gp.cols);
    auto out = g.out_edges();
    Vec x(g.num_edges(), 0.0);
    int node = gp.origin;
    int guard = 0;
    while (node != gp.destination) {
        double total = 0.0;
        for (int e : out[node])
            if (flow[e] > 1e-9) total += flow[e];
        if (total <= 0.0) throw Error("path decomposition: flow conservation violated");
        std::uniform_real_distribution<double> u(0.0, total);
        double pick = u(rng);
        int chosen = -1;
        for (int e : out[node]) {
            if (flow[e] <= 1e-9) continue;
            chosen = e;
            if (pick < flow[e]) break;
            pick -= flow[e];
        }
        x[chosen] = 1.0;
        node = g.edges[chosen].second;
        if (++guard > 10 * g.num_edges())
            throw Error("path decomposition: cycle-heavy flow");
    }
    return Decision(std::move(x));
}

}  // namespace cio

#endif  // CIO_ROBUST_HPP
