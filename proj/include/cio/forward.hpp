#ifndef CIO_FORWARD_HPP
#define CIO_FORWARD_HPP

#include <algorithm>
#include <cstdint>
#include <variant>
#include <vector>

#include "cio/common.hpp"
#include "cio/grid.hpp"
#include "cio/lp.hpp"
#include "cio/types.hpp"

namespace cio {

namespace fwd_detail {

inline constexpr double kUnreached = 1e100;

struct BellmanResult {
    Vec dist;
    std::vector<int> parent_edge;       // edge used to reach each node, -1 for none
    std::vector<int> relaxable;         // nodes still improvable after num_nodes rounds
};

/// Label-correcting shortest distances from `source`; handles negative edge
/// costs. `relaxable` is non-empty iff a negative cycle is reachable from the
/// source.
inline BellmanResult bellman(const Digraph& g, const Vec& theta, int source,
                             bool reversed = false) {
    const int n = g.num_nodes;
    BellmanResult r;
    r.dist.assign(n, kUnreached);
    r.parent_edge.assign(n, -1);
    r.dist[source] = 0.0;
    bool changed = true;
    for (int round = 0; round < n && changed; ++round) {
        changed = false;
        for (int e = 0; e < g.num_edges(); ++e) {
            int from = g.edges[e].first, to = g.edges[e].second;
            if (reversed) std::swap(from, to);
            if (r.dist[from] >= kUnreached) continue;
            const double cand = r.dist[from] + theta[e];
            if (cand < r.dist[to] - 1e-12) {
                r.dist[to] = cand;
                r.parent_edge[to] = e;
                changed = true;
            }
        }
    }
    if (changed) {
        for (int e = 0; e < g.num_edges(); ++e) {
            int from = g.edges[e].first, to = g.edges[e].second;
            if (reversed) std::swap(from, to);
            if (r.dist[from] >= kUnreached) continue;
            if (r.dist[from] + theta[e] < r.dist[to] - 1e-12) r.relaxable.push_back(to);
        }
    }
    return r;
}

/// Nodes reachable from `seeds` along (possibly reversed) edges.
inline std::vector<char> reach(const Digraph& g, const std::vector<int>& seeds,
                               bool reversed) {
    std::vector<char> seen(g.num_nodes, 0);
    std::vector<int> stack(seeds);
    for (int s : seeds) seen[s] = 1;
    auto adj = reversed ? g.in_edges() : g.out_edges();
    while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        for (int e : adj[i]) {
            const int j = reversed ? g.edges[e].first : g.edges[e].second;
            if (!seen[j]) {
                seen[j] = 1;
                stack.push_back(j);
            }
        }
    }
    return seen;
}

}  // namespace fwd_detail

/// Optimal set of a shortest-path instance: optimal value, one representative
/// path, and the tight-edge DAG that encodes every optimal path. Path counts
/// are built on demand for uniform sampling.
struct SpOptimalSet {
    Digraph graph;
    int origin = 0, destination = 0;
    double optimal_value = 0.0;
    Vec dist_from_origin, dist_to_destination;
    std::vector<char> tight;  // per edge
    Decision representative;
    mutable Vec path_counts;  // per node: optimal paths from node to destination

    double num_paths() const {
        ensure_counts();
        return path_counts[origin];
    }

    /// Uniform draw over the optimal paths via path-count-weighted edge choice.
    Decision sample(RandomSource& rng) const {
        ensure_counts();
        Vec x(graph.num_edges(), 0.0);
        auto out = graph.out_edges();
        int node = origin;
        int guard = 0;
        while (node != destination) {
            std::uniform_real_distribution<double> u(0.0, path_counts[node]);
            double pick = u(rng);
            int chosen = -1;
            for (int e : out[node]) {
                if (!tight[e]) continue;
                const double w = path_counts[graph.edges[e].second];
                if (w <= 0.0) continue;
                chosen = e;
                if (pick < w) break;
                pick -= w;
            }
            if (chosen < 0) throw Error("shortest_path: sampling walked off the DAG");
            x[chosen] = 1.0;
            node = graph.edges[chosen].second;
            if (++guard > graph.num_edges() + 1)
                throw Error("shortest_path: cycle encountered while sampling");
        }
        return Decision(std::move(x));
    }

private:
    void ensure_counts() const {
        if (!path_counts.empty()) return;
        const int n = graph.num_nodes;
        std::vector<int> indeg(n, 0);
        for (int e = 0; e < graph.num_edges(); ++e)
            if (tight[e]) ++indeg[graph.edges[e].second];
        std::vector<int> order, stack;
        order.reserve(n);
        for (int i = 0; i < n; ++i)
            if (indeg[i] == 0) stack.push_back(i);
        auto out = graph.out_edges();
        while (!stack.empty()) {
            const int i = stack.back();
            stack.pop_back();
            order.push_back(i);
            for (int e : out[i]) {
                if (!tight[e]) continue;
                if (--indeg[graph.edges[e].second] == 0)
                    stack.push_back(graph.edges[e].second);
            }
        }
        if (static_cast<int>(order.size()) != n)
            throw Error("shortest_path: zero-cost cycle makes the optimal set degenerate");
        path_counts.assign(n, 0.0);
        path_counts[destination] = 1.0;
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const int i = *it;
            if (i == destination) continue;
            double c = 0.0;
            for (int e : out[i])
                if (tight[e]) c += path_counts[graph.edges[e].second];
            path_counts[i] = c;
        }
        if (path_counts[origin] <= 0.0)
            throw Error("shortest_path: no optimal path counted (internal error)");
    }
};

struct KnapsackOptimalSet {
    double optimal_value = 0.0;
    std::vector<Decision> optima;

    Decision sample(RandomSource& rng) const {
        std::uniform_int_distribution<std::size_t> u(0, optima.size() - 1);
        return optima[u(rng)];
    }
};

/// A single integral vertex of the capped flow polytope; produced when edge
/// costs admit negative cycles, where the binary flow-balance feasible set is
/// optimized exactly by its (totally unimodular) LP relaxation and optima may
/// carry circulation on top of the origin-destination path.
struct FlowVertexOptimalSet {
    double optimal_value = 0.0;
    Decision representative;
};

/// Optimal solution set of a forward problem.
class OptimalSet {
public:
    explicit OptimalSet(SpOptimalSet sp) : rep_(std::move(sp)) {}
    explicit OptimalSet(KnapsackOptimalSet ks) : rep_(std::move(ks)) {}
    explicit OptimalSet(FlowVertexOptimalSet fv) : rep_(std::move(fv)) {}

    double optimal_value() const {
        if (const auto* sp = std::get_if<SpOptimalSet>(&rep_)) return sp->optimal_value;
        if (const auto* fv = std::get_if<FlowVertexOptimalSet>(&rep_))
            return fv->optimal_value;
        return std::get<KnapsackOptimalSet>(rep_).optimal_value;
    }

    const Decision& representative() const {
        if (const auto* sp = std::get_if<SpOptimalSet>(&rep_)) return sp->representative;
        if (const auto* fv = std::get_if<FlowVertexOptimalSet>(&rep_))
            return fv->representative;
        return std::get<KnapsackOptimalSet>(rep_).optima.front();
    }

    /// Number of optimal vertices (paths / subsets; 1 for the LP-vertex case).
    double count() const {
        if (const auto* sp = std::get_if<SpOptimalSet>(&rep_)) return sp->num_paths();
        if (std::holds_alternative<FlowVertexOptimalSet>(rep_)) return 1.0;
        return static_cast<double>(std::get<KnapsackOptimalSet>(rep_).optima.size());
    }

    Decision sample(RandomSource& rng) const {
        if (const auto* sp = std::get_if<SpOptimalSet>(&rep_)) return sp->sample(rng);
        if (const auto* fv = std::get_if<FlowVertexOptimalSet>(&rep_))
            return fv->representative;
        return std::get<KnapsackOptimalSet>(rep_).sample(rng);
    }

    const SpOptimalSet& shortest_path() const { return std::get<SpOptimalSet>(rep_); }
    const KnapsackOptimalSet& knapsack() const { return std::get<KnapsackOptimalSet>(rep_); }

private:
    std::variant<SpOptimalSet, KnapsackOptimalSet, FlowVertexOptimalSet> rep_;
};

/// Shortest path on an arbitrary digraph (tests may call this directly; the
/// instance API goes through the grid). Errors out when a negative cycle can
/// lie on an origin-destination walk.
inline SpOptimalSet solve_shortest_path_digraph(const Digraph& g, const Vec& theta,
                                                int origin, int destination) {
    using namespace fwd_detail;
    if (static_cast<int>(theta.size()) != g.num_edges())
        throw Error("shortest_path: cost dimension mismatch");
    if (origin == destination) throw Error("shortest_path: origin equals destination");

    const auto fromo = bellman(g, theta, origin, false);
    if (fromo.dist[destination] >= kUnreached)
        throw Error("shortest_path: destination unreachable");
    if (!fromo.relaxable.empty()) {
        const auto seen = reach(g, fromo.relaxable, false);
        if (seen[destination])
            throw Error(
                "shortest_path: negative cycle detected (optimal set unbounded below)");
    }
    const auto tod = bellman(g, theta, destination, true);
    if (!tod.relaxable.empty()) {
        const auto seen = reach(g, tod.relaxable, true);
        if (seen[origin])
            throw Error(
                "shortest_path: negative cycle detected (optimal set unbounded below)");
    }

    SpOptimalSet s;
    s.graph = g;
    s.origin = origin;
    s.destination = destination;
    s.optimal_value = fromo.dist[destination];
    s.dist_from_origin = fromo.dist;
    s.dist_to_destination = tod.dist;
    s.tight.assign(g.num_edges(), 0);
    for (int e = 0; e < g.num_edges(); ++e) {
        const auto [i, j] = g.edges[e];
        if (fromo.dist[i] >= kUnreached || tod.dist[j] >= kUnreached) continue;
        if (fromo.dist[i] + theta[e] + tod.dist[j] <= s.optimal_value + tol::reduced_cost)
            s.tight[e] = 1;
    }
    Vec x(g.num_edges(), 0.0);
    for (int node = destination; node != origin;) {
        const int e = fromo.parent_edge[node];
        if (e < 0) throw Error("shortest_path: broken parent chain");
        x[e] = 1.0;
        node = g.edges[e].first;
    }
    s.representative = Decision(std::move(x));
    return s;
}

inline OptimalSet solve_shortest_path(const CostVector& theta, const ExoParams& exo) {
    const auto& gp = std::get<GridParams>(exo);
    const Digraph g = make_grid_digraph(gp.rows, gp.cols);
    return OptimalSet(
        solve_shortest_path_digraph(g, theta.values(), gp.origin, gp.destination));
}

/// All feasible 0/1 subsets of a knapsack instance (d <= 25).
inline std::vector<Decision> knapsack_feasible_set(const KnapsackParams& kp) {
    const int d = static_cast<int>(kp.weights.size());
    if (d > 25) throw Error("knapsack: d too large for exhaustive enumeration");
    std::vector<Decision> out;
    const std::uint32_t lim = 1u << d;
    for (std::uint32_t mask = 0; mask < lim; ++mask) {
        double load = 0.0;
        for (int i = 0; i < d; ++i)
            if (mask & (1u << i)) load += kp.weights[i];
        if (load > kp.budget + tol::decision_feas) continue;
        Vec x(d, 0.0);
        for (int i = 0; i < d; ++i)
            if (mask & (1u << i)) x[i] = 1.0;
        out.emplace_back(std::move(x));
    }
    return out;
}

/// Exhaustive knapsack maximization; ties collected exactly so the oracle can
/// sample uniformly over all maximizers.
inline OptimalSet solve_knapsack(const CostVector& theta, const ExoParams& exo) {
    const auto& kp = std::get<KnapsackParams>(exo);
    const int d = static_cast<int>(kp.weights.size());
    if (static_cast<int>(theta.dim()) != d) throw Error("knapsack: cost dimension mismatch");
    if (d > 25) throw Error("knapsack: d too large for exhaustive enumeration");

    const std::uint32_t lim = 1u << d;
    auto value_of = [&](std::uint32_t mask, double& load) {
        double value = 0.0;
        load = 0.0;
        for (int i = 0; i < d; ++i) {
            if (mask & (1u << i)) {
                load += kp.weights[i];
                value += theta[i];
            }
        }
        return value;
    };
    double best = -kInf;
    bool any = false;
    for (std::uint32_t mask = 0; mask < lim; ++mask) {
        double load;
        const double value = value_of(mask, load);
        if (load > kp.budget + tol::decision_feas) continue;
        any = true;
        best = std::max(best, value);
    }
    if (!any) throw Error("knapsack: no feasible subset (bad budget)");
    KnapsackOptimalSet s;
    s.optimal_value = best;
    for (std::uint32_t mask = 0; mask < lim; ++mask) {
        double load;
        const double value = value_of(mask, load);
        if (load > kp.budget + tol::decision_feas) continue;
        if (value >= best - 1e-9) {
            Vec x(d, 0.0);
            for (int i = 0; i < d; ++i)
                if (mask & (1u << i)) x[i] = 1.0;
            s.optima.emplace_back(std::move(x));
        }
    }
    return OptimalSet(std::move(s));
}

/// Exact solve of min theta'x over the capped flow polytope by the simplex;
/// the constraint matrix is totally unimodular so the vertex is integral.
inline OptimalSet solve_flow_lp(const CostVector& theta, const ExoParams& exo) {
    const auto& gp = std::get<GridParams>(exo);
    const Digraph g = make_grid_digraph(gp.rows, gp.cols);
    const int d = g.num_edges();
    LinearProgram lp;
    lp.add_vars(d, 0.0, 1.0);
    lp.c = theta.values();
    for (int node = 0; node < g.num_nodes; ++node) {
        std::vector<std::pair<int, double>> row;
        for (int e = 0; e < d; ++e) {
            if (g.edges[e].second == node) row.emplace_back(e, 1.0);
            if (g.edges[e].first == node) row.emplace_back(e, -1.0);
        }
        double rhs = 0.0;
        if (node == gp.destination) rhs = 1.0;
        if (node == gp.origin) rhs = -1.0;
        lp.add_row_sparse(row, RowSense::eq, rhs);
    }
    const LpSolution sol = simplex_solve(lp);
    if (sol.status != LpStatus::optimal) throw Error("solve_flow_lp: solve failed");
    FlowVertexOptimalSet fv;
    fv.optimal_value = sol.objective;
    Vec x = sol.x;
    for (double& v : x) {
        if (std::abs(v) < 1e-7) v = 0.0;
        if (std::abs(v - 1.0) < 1e-7) v = 1.0;
    }
    fv.representative = Decision(std::move(x));
    return OptimalSet(std::move(fv));
}

inline OptimalSet solve_forward(const CostVector& theta, const ForwardInstance& inst) {
    if (static_cast<int>(theta.dim()) != inst.dim)
        throw Error("solve_forward: dimension mismatch");
    if (inst.kind == ProblemKind::knapsack) return solve_knapsack(theta, inst.exo);
    // negative fitted costs can make circulation-carrying binary flows
    // optimal; the path solver refuses those, the flow LP settles them
    bool negative = false;
    for (std::size_t i = 0; i < theta.dim(); ++i)
        if (theta[i] < 0.0) negative = true;
    if (!negative) return solve_shortest_path(theta, inst.exo);
    try {
        return solve_shortest_path(theta, inst.exo);
    } catch (const Error&) {
        return solve_flow_lp(theta, inst.exo);
    }
}

/// x~ oracle: a decision drawn uniformly at random from the optimal set.
/// Zero-cost cycles (possible at vertex-fitted costs) make exact path
/// counting degenerate; the representative optimal path is returned then.
inline Decision forward_oracle(const CostVector& theta, const ForwardInstance& inst,
                               RandomSource& rng) {
    const OptimalSet s = solve_forward(theta, inst);
    try {
        return s.sample(rng);
    } catch (const Error&) {
        return s.representative();
    }
}

}  // namespace cio

#endif  // CIO_FORWARD_HPP
