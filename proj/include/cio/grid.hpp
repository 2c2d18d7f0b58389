#ifndef CIO_GRID_HPP
#define CIO_GRID_HPP

#include <vector>

#include "cio/common.hpp"

namespace cio {

/// Directed graph; nodes are 0..num_nodes-1, edges carry a stable index used
/// as the coordinate of cost and flow vectors.
struct Digraph {
    int num_nodes = 0;
    std::vector<std::pair<int, int>> edges;  // (from, to)

    int num_edges() const { return static_cast<int>(edges.size()); }

    std::vector<std::vector<int>> out_edges() const {
        std::vector<std::vector<int>> out(num_nodes);
        for (int e = 0; e < num_edges(); ++e) out[edges[e].first].push_back(e);
        return out;
    }
    std::vector<std::vector<int>> in_edges() const {
        std::vector<std::vector<int>> in(num_nodes);
        for (int e = 0; e < num_edges(); ++e) in[edges[e].second].push_back(e);
        return in;
    }
};

/// rows x cols grid with both directions of every horizontal and vertical
/// adjacency. Node id of (r, c) is r*cols + c. Edge order: for each row-major
/// node, first the rightward edge, then leftward, then down, then up, skipping
/// edges that leave the grid. A 5x5 grid has 80 directed edges.
inline Digraph make_grid_digraph(int rows, int cols) {
    if (rows < 1 || cols < 1 || rows * cols < 2)
        throw Error("make_grid_digraph: grid must have at least 2 nodes");
    Digraph g;
    g.num_nodes = rows * cols;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int id = r * cols + c;
            if (c + 1 < cols) g.edges.emplace_back(id, id + 1);
            if (c - 1 >= 0) g.edges.emplace_back(id, id - 1);
            if (r + 1 < rows) g.edges.emplace_back(id, id + cols);
            if (r - 1 >= 0) g.edges.emplace_back(id, id - cols);
        }
    }
    return g;
}

inline int grid_edge_count(int rows, int cols) {
    return 2 * (rows * (cols - 1) + (rows - 1) * cols);
}

}  // namespace cio

#endif  // CIO_GRID_HPP
