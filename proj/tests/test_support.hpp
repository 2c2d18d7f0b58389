#ifndef CIO_TEST_SUPPORT_HPP
#define CIO_TEST_SUPPORT_HPP

#include <algorithm>
#include <optional>
#include <vector>

#include "cio/forward.hpp"
#include "cio/lp.hpp"

// Independent oracles used by the tests. These deliberately avoid the code
// paths they are checking: brute-force enumeration, dense grids, DFS.

namespace cio_test {

using cio::Digraph;
using cio::LinearProgram;
using cio::RowSense;
using cio::Vec;

inline bool gauss_solve(std::vector<Vec> A, Vec b, Vec& x) {
    const int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        if (std::abs(A[piv][col]) < 1e-10) return false;
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = A[r][col] / A[col][col];
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    x.assign(n, 0.0);
    for (int i = 0; i < n; ++i) x[i] = b[i] / A[i][i];
    return true;
}

/// Brute-force LP solve by enumerating basic solutions (intersections of n
/// hyperplanes drawn from rows and finite bounds). Only for small LPs whose
/// optimum is attained at a vertex (bounded feasible regions).
inline std::optional<double> enumerate_lp_optimum(const LinearProgram& lp) {
    const int n = lp.num_vars();
    std::vector<Vec> planes;
    Vec rhs;
    for (int i = 0; i < lp.num_rows(); ++i) {
        planes.push_back(lp.A[i]);
        rhs.push_back(lp.b[i]);
    }
    for (int j = 0; j < n; ++j) {
        Vec e(n, 0.0);
        e[j] = 1.0;
        if (lp.lower[j] != -cio::kInf) {
            planes.push_back(e);
            rhs.push_back(lp.lower[j]);
        }
        if (lp.upper[j] != cio::kInf) {
            planes.push_back(e);
            rhs.push_back(lp.upper[j]);
        }
    }
    const int m = static_cast<int>(planes.size());
    std::vector<int> pick(n);
    std::optional<double> best;
    std::vector<int> idx(n, 0);

    // iterate over all n-subsets of planes
    std::vector<int> comb(n);
    for (int i = 0; i < n; ++i) comb[i] = i;
    auto feasible = [&](const Vec& x) {
        for (int i = 0; i < lp.num_rows(); ++i) {
            const double v = cio::dot(lp.A[i], x) - lp.b[i];
            if (lp.row_sense[i] == RowSense::le && v > 1e-7) return false;
            if (lp.row_sense[i] == RowSense::ge && v < -1e-7) return false;
            if (lp.row_sense[i] == RowSense::eq && std::abs(v) > 1e-7) return false;
        }
        for (int j = 0; j < n; ++j) {
            if (x[j] < lp.lower[j] - 1e-7) return false;
            if (x[j] > lp.upper[j] + 1e-7) return false;
        }
        return true;
    };
    if (m < n) return std::nullopt;
    for (;;) {
        std::vector<Vec> A;
        Vec b;
        for (int i = 0; i < n; ++i) {
            A.push_back(planes[comb[i]]);
            b.push_back(rhs[comb[i]]);
        }
        Vec x;
        if (gauss_solve(A, b, x) && feasible(x)) {
            const double val = cio::dot(lp.c, x);
            if (!best) {
                best = val;
            } else if (lp.sense == cio::Sense::minimize) {
                best = std::min(*best, val);
            } else {
                best = std::max(*best, val);
            }
        }
        // next combination
        int i = n - 1;
        while (i >= 0 && comb[i] == m - n + i) --i;
        if (i < 0) break;
        ++comb[i];
        for (int k = i + 1; k < n; ++k) comb[k] = comb[k - 1] + 1;
    }
    return best;
}

/// All simple origin->destination paths as edge-indicator vectors (DFS).
inline void enumerate_simple_paths(const Digraph& g,
                                   const std::vector<std::vector<int>>& adj, int node,
                                   int destination, std::vector<char>& visited,
                                   Vec& current, std::vector<Vec>& out) {
    if (node == destination) {
        out.push_back(current);
        return;
    }
    for (int e : adj[node]) {
        const int next = g.edges[e].second;
        if (visited[next]) continue;
        visited[next] = 1;
        current[e] = 1.0;
        enumerate_simple_paths(g, adj, next, destination, visited, current, out);
        current[e] = 0.0;
        visited[next] = 0;
    }
}

inline std::vector<Vec> all_simple_paths(const Digraph& g, int origin, int destination) {
    std::vector<char> visited(g.num_nodes, 0);
    visited[origin] = 1;
    Vec current(g.num_edges(), 0.0);
    std::vector<Vec> out;
    const auto adj = g.out_edges();
    enumerate_simple_paths(g, adj, origin, destination, visited, current, out);
    return out;
}

/// Dense angular grid maximization of theta'x over a 2-D cap.
inline double cap_support_grid_2d(const Vec& x, const Vec& center, double alpha,
                                  int steps = 200000) {
    const double base = std::atan2(center[1], center[0]);
    double best = -1e300;
    for (int i = 0; i <= steps; ++i) {
        const double a = base - alpha + (2.0 * alpha) * i / steps;
        const double v = std::cos(a) * x[0] + std::sin(a) * x[1];
        best = std::max(best, v);
    }
    return best;
}

}  // namespace cio_test

#endif
