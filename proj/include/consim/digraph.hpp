#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "consim/errors.hpp"
#include "consim/matrix.hpp"

namespace consim {

/// Weighted directed graph over n nodes. weight(i, j) is the weight of the
/// edge from node j into node i; the diagonal is forced to zero and
/// in-degrees are always recomputed from the weights.
class DirectedGraph {
 public:
  explicit DirectedGraph(std::size_t n) : n_(n), w_(n, std::vector<double>(n, 0.0)) {
    if (n == 0) throw DimensionMismatch("graph needs at least one node");
  }

  static DirectedGraph from_weights(std::vector<std::vector<double>> w) {
    DirectedGraph g(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i].size() != w.size()) throw DimensionMismatch("adjacency matrix must be square");
      for (std::size_t j = 0; j < w.size(); ++j) {
        if (!std::isfinite(w[i][j]) || w[i][j] < 0.0)
          throw ConfigError("edge weights must be finite and nonnegative");
      }
      w[i][i] = 0.0;
    }
    g.w_ = std::move(w);
    return g;
  }

  /// Adds an edge carrying node `from`'s output into node `to`.
  void add_edge(std::size_t from, std::size_t to, double weight) {
    if (from >= n_ || to >= n_) throw DimensionMismatch("edge endpoint out of range");
    if (from == to) throw ConfigError("self-loops are not allowed");
    if (!std::isfinite(weight) || weight <= 0.0)
      throw ConfigError("edge weight must be finite and positive");
    w_[to][from] = weight;
  }

  std::size_t n() const { return n_; }
  double weight(std::size_t i, std::size_t j) const { return w_[i][j]; }

  double in_degree(std::size_t i) const {
    double d = 0.0;
    for (std::size_t j = 0; j < n_; ++j) d += w_[i][j];
    return d;
  }

  std::vector<double> in_degrees() const {
    std::vector<double> d(n_);
    for (std::size_t i = 0; i < n_; ++i) d[i] = in_degree(i);
    return d;
  }

 private:
  std::size_t n_;
  std::vector<std::vector<double>> w_;  // w_[i][j] = a_ij
};

/// In-degree matrix minus adjacency; rows sum to zero by construction.
inline Matrix laplacian(const DirectedGraph& g) {
  const std::size_t n = g.n();
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    l(i, i) = g.in_degree(i);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) l(i, j) = -g.weight(i, j);
  }
  return l;
}

/// True iff some node has a directed path to every other node.
inline bool has_spanning_tree(const DirectedGraph& g) {
  const std::size_t n = g.n();
  for (std::size_t root = 0; root < n; ++root) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{root};
    seen[root] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
      const std::size_t j = stack.back();
      stack.pop_back();
      for (std::size_t i = 0; i < n; ++i) {
        if (!seen[i] && g.weight(i, j) > 0.0) {
          seen[i] = true;
          ++count;
          stack.push_back(i);
        }
      }
    }
    if (count == n) return true;
  }
  return false;
}

struct NodePartition {
  std::vector<std::size_t> with_neighbors;     // d_i != 0
  std::vector<std::size_t> without_neighbors;  // d_i == 0
};

inline NodePartition partition_nodes(const DirectedGraph& g) {
  NodePartition p;
  for (std::size_t i = 0; i < g.n(); ++i) {
    if (g.in_degree(i) > 0.0)
      p.with_neighbors.push_back(i);
    else
      p.without_neighbors.push_back(i);
  }
  return p;
}

namespace detail {

inline void check_delta(const DirectedGraph& g, const std::vector<std::vector<double>>& delta,
                        std::size_t m) {
  if (m == 0) throw DimensionMismatch("stage count must be positive");
  if (delta.size() != g.n()) throw DimensionMismatch("one delta row per node required");
  for (const auto& row : delta) {
    if (row.size() != m) throw DimensionMismatch("one delta entry per stage required");
    for (double d : row)
      if (!(d < 0.0)) throw ConfigError("delta entries must be negative");
  }
}

}  // namespace detail

/// Augmented Laplacian for the case where every node has a neighbor. The
/// n*m nodes are ordered stage-major: entry l*n + i is stage l of node i.
/// Rows sum to zero because the in-degree-normalized adjacency has unit
/// row sums.
inline Matrix build_augmented_laplacian_c1(const DirectedGraph& g,
                                           const std::vector<std::vector<double>>& delta,
                                           std::size_t m) {
  detail::check_delta(g, delta, m);
  const std::size_t n = g.n();
  const std::vector<double> deg = g.in_degrees();
  for (std::size_t i = 0; i < n; ++i)
    if (deg[i] == 0.0) throw ZeroInDegree("node without neighbors has no normalized row");

  Matrix lb(n * m, n * m);
  const auto at = [n](std::size_t stage, std::size_t node) { return stage * n + node; };
  for (std::size_t l = 0; l < m; ++l) {
    for (std::size_t i = 0; i < n; ++i) {
      lb(at(l, i), at(l, i)) += -delta[i][l];
      if (l + 1 < m) {
        lb(at(l, i), at(l + 1, i)) += delta[i][l];
      } else {
        for (std::size_t j = 0; j < n; ++j)
          if (g.weight(i, j) > 0.0)
            lb(at(l, i), at(0, j)) += delta[i][l] * g.weight(i, j) / deg[i];
      }
    }
  }
  return lb;
}

/// Augmented Laplacian for the case with a single node that has no
/// neighbors. Row and column 0 belong to that node's constant reference;
/// the remaining (n-1)*m rows are stage-major over the other nodes in
/// ascending index order. The first row is identically zero.
inline Matrix build_augmented_laplacian_c2(const DirectedGraph& g, std::size_t root,
                                           const std::vector<std::vector<double>>& delta,
                                           std::size_t m) {
  detail::check_delta(g, delta, m);
  const std::size_t n = g.n();
  if (n < 2) throw DimensionMismatch("need at least two nodes");
  if (root >= n) throw DimensionMismatch("root out of range");
  const std::vector<double> deg = g.in_degrees();
  if (deg[root] != 0.0) throw BadRoot("designated root has neighbors");
  for (std::size_t i = 0; i < n; ++i)
    if (i != root && deg[i] == 0.0) throw BadRoot("a second node has no neighbors");

  std::vector<std::size_t> pos(n, 0);  // node -> slot among non-root nodes
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (i != root) pos[i] = next++;

  const std::size_t size = (n - 1) * m + 1;
  Matrix lb(size, size);
  const auto at = [&](std::size_t stage, std::size_t node) {
    return 1 + stage * (n - 1) + pos[node];
  };
  for (std::size_t l = 0; l < m; ++l) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i == root) continue;
      lb(at(l, i), at(l, i)) += -delta[i][l];
      if (l + 1 < m) {
        lb(at(l, i), at(l + 1, i)) += delta[i][l];
      } else {
        for (std::size_t j = 0; j < n; ++j) {
          if (g.weight(i, j) <= 0.0) continue;
          const std::size_t col = (j == root) ? 0 : at(0, j);
          lb(at(l, i), col) += delta[i][l] * g.weight(i, j) / deg[i];
        }
      }
    }
  }
  return lb;
}

}  // namespace consim
