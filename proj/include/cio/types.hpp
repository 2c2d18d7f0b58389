#ifndef CIO_TYPES_HPP
#define CIO_TYPES_HPP

#include <utility>
#include <variant>
#include <vector>

#include "cio/common.hpp"
#include "cio/grid.hpp"

namespace cio {

enum class ProblemKind { shortest_path_grid, knapsack };
enum class Sense { minimize, maximize };

inline const char* to_string(ProblemKind k) {
    return k == ProblemKind::shortest_path_grid ? "shortest_path_grid" : "knapsack";
}

/// Cost/utility parameter vector. Entries must be finite.
class CostVector {
public:
    CostVector() = default;
    explicit CostVector(Vec values) : values_(std::move(values)) {
        if (!all_finite(values_)) throw Error("CostVector: non-finite entry");
    }
    std::size_t dim() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    const Vec& values() const { return values_; }

    CostVector unit() const { return CostVector(normalized(values_)); }

private:
    Vec values_;
};

/// A (possibly fractional) decision vector: edge flows for shortest path,
/// item indicators for knapsack.
class Decision {
public:
    Decision() = default;
    explicit Decision(Vec values) : values_(std::move(values)) {
        if (!all_finite(values_)) throw Error("Decision: non-finite entry");
    }
    std::size_t dim() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    const Vec& values() const { return values_; }

private:
    Vec values_;
};

struct GridParams {
    int rows = 0;
    int cols = 0;
    int origin = 0;
    int destination = 0;
};

struct KnapsackParams {
    Vec weights;
    double budget = 0.0;
};

using ExoParams = std::variant<GridParams, KnapsackParams>;

inline ProblemKind kind_of(const ExoParams& exo) {
    return std::holds_alternative<GridParams>(exo) ? ProblemKind::shortest_path_grid
                                                   : ProblemKind::knapsack;
}

/// One forward problem: kind, optimization sense, decision dimension and the
/// exogenous parameters. The sense is tied to the kind (shortest path
/// minimizes, knapsack maximizes).
struct ForwardInstance {
    ProblemKind kind;
    Sense sense;
    int dim;
    ExoParams exo;
};

inline ForwardInstance make_shortest_path_instance(int rows, int cols, int origin,
                                                   int destination) {
    if (rows < 1 || cols < 1) throw Error("shortest_path: empty grid");
    const int n = rows * cols;
    if (origin < 0 || origin >= n || destination < 0 || destination >= n)
        throw Error("shortest_path: node id out of range");
    if (origin == destination) throw Error("shortest_path: origin equals destination");
    return ForwardInstance{ProblemKind::shortest_path_grid, Sense::minimize,
                           grid_edge_count(rows, cols),
                           GridParams{rows, cols, origin, destination}};
}

inline ForwardInstance make_knapsack_instance(Vec weights, double budget) {
    if (weights.empty()) throw Error("knapsack: no items");
    for (double w : weights)
        if (!(w > 0.0) || !std::isfinite(w)) throw Error("knapsack: weights must be positive");
    if (!(budget >= 0.0) || !std::isfinite(budget)) throw Error("knapsack: bad budget");
    const int d = static_cast<int>(weights.size());
    return ForwardInstance{ProblemKind::knapsack, Sense::maximize, d,
                           KnapsackParams{std::move(weights), budget}};
}

inline ForwardInstance make_instance(const ExoParams& exo) {
    if (const auto* g = std::get_if<GridParams>(&exo))
        return make_shortest_path_instance(g->rows, g->cols, g->origin, g->destination);
    const auto& k = std::get<KnapsackParams>(exo);
    return make_knapsack_instance(k.weights, k.budget);
}

/// f(theta, x) = theta' x (linear basis f_i(x) = x_i).
inline double objective(const CostVector& theta, const Decision& x) {
    if (theta.dim() != x.dim()) throw Error("objective: dimension mismatch");
    return dot(theta.values(), x.values());
}

/// nu(x) = sqrt(sum_i f_i(x)^2) = ||x||_2 for the linear basis.
inline double nu(const Decision& x) { return norm2(x.values()); }

inline bool is_feasible(const Decision& x, const ForwardInstance& inst,
                        double tolerance = tol::decision_feas) {
    if (static_cast<int>(x.dim()) != inst.dim) throw Error("is_feasible: dimension mismatch");
    if (inst.kind == ProblemKind::shortest_path_grid) {
        const auto& gp = std::get<GridParams>(inst.exo);
        const Digraph g = make_grid_digraph(gp.rows, gp.cols);
        for (std::size_t e = 0; e < x.dim(); ++e)
            if (x[e] < -tolerance || x[e] > 1.0 + tolerance) return false;
        std::vector<double> balance(g.num_nodes, 0.0);
        for (int e = 0; e < g.num_edges(); ++e) {
            balance[g.edges[e].first] -= x[e];
            balance[g.edges[e].second] += x[e];
        }
        for (int i = 0; i < g.num_nodes; ++i) {
            double want = 0.0;
            if (i == gp.destination) want = 1.0;
            if (i == gp.origin) want = -1.0;
            if (std::abs(balance[i] - want) > tolerance) return false;
        }
        return true;
    }
    const auto& kp = std::get<KnapsackParams>(inst.exo);
    double load = 0.0;
    for (std::size_t i = 0; i < x.dim(); ++i) {
        if (std::abs(x[i]) > tolerance && std::abs(x[i] - 1.0) > tolerance) return false;
        load += kp.weights[i] * x[i];
    }
    return load <= kp.budget + tolerance;
}

/// Unit-norm center plus half-angle alpha in (0, pi]. Eq.-style cone
/// {theta : ||theta|| = 1, theta' center >= cos(alpha)}.
class ConeUncertaintySet {
public:
    ConeUncertaintySet(CostVector center, double half_angle)
        : center_(std::move(center)), half_angle_(half_angle) {
        if (std::abs(norm2(center_.values()) - 1.0) > tol::unit_norm)
            throw Error("ConeUncertaintySet: center must be unit norm");
        if (!(half_angle_ > 0.0) || half_angle_ > M_PI + 1e-12)
            throw Error("ConeUncertaintySet: half angle must lie in (0, pi]");
    }
    const CostVector& center() const { return center_; }
    double half_angle() const { return half_angle_; }

    bool contains(const CostVector& theta, double tolerance = tol::value_compare) const {
        if (std::abs(norm2(theta.values()) - 1.0) > 1e-6) return false;
        return dot(theta.values(), center_.values()) >= std::cos(half_angle_) - tolerance;
    }

private:
    CostVector center_;
    double half_angle_;
};

struct Observation {
    Decision decision;
    ExoParams exo;
};

/// Observed (decision, exogenous parameters) pairs plus a train/validation
/// split. Construction rejects infeasible pairs and overlapping splits.
class DecisionDataset {
public:
    DecisionDataset(ProblemKind kind, std::vector<Observation> obs,
                    std::vector<std::size_t> train_idx, std::vector<std::size_t> val_idx)
        : kind_(kind),
          obs_(std::move(obs)),
          train_(std::move(train_idx)),
          val_(std::move(val_idx)) {
        std::vector<char> seen(obs_.size(), 0);
        auto mark = [&](const std::vector<std::size_t>& idx) {
            for (std::size_t i : idx) {
                if (i >= obs_.size()) throw Error("DecisionDataset: split index out of range");
                if (seen[i]) throw Error("DecisionDataset: split sets must be disjoint");
                seen[i] = 1;
            }
        };
        mark(train_);
        mark(val_);
        for (char s : seen)
            if (!s) throw Error("DecisionDataset: split must cover all indices");
        for (const auto& o : obs_) {
            if (kind_of(o.exo) != kind_) throw Error("DecisionDataset: mixed problem kinds");
            if (!is_feasible(o.decision, make_instance(o.exo)))
                throw Error("DecisionDataset: infeasible observation");
        }
    }

    ProblemKind kind() const { return kind_; }
    std::size_t size() const { return obs_.size(); }
    const Observation& operator[](std::size_t i) const { return obs_[i]; }
    const std::vector<Observation>& observations() const { return obs_; }
    const std::vector<std::size_t>& train_indices() const { return train_; }
    const std::vector<std::size_t>& val_indices() const { return val_; }

    std::vector<Observation> train_set() const { return subset(train_); }
    std::vector<Observation> val_set() const { return subset(val_); }

private:
    std::vector<Observation> subset(const std::vector<std::size_t>& idx) const {
        std::vector<Observation> out;
        out.reserve(idx.size());
        for (std::size_t i : idx) out.push_back(obs_[i]);
        return out;
    }

    ProblemKind kind_;
    std::vector<Observation> obs_;
    std::vector<std::size_t> train_;
    std::vector<std::size_t> val_;
};

}  // namespace cio

#endif  // CIO_TYPES_HPP
