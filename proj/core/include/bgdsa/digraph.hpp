#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bgdsa/random.hpp"

namespace bgdsa {

/// Directed edge (from, to), nodes 0-based. Text formats (graph files,
/// reports) use 1-based node ids; conversion happens at the I/O boundary.
using Edge = std::pair<int, int>;

/// Immutable directed graph without self-loops. Neighbor lists are sorted
/// ascending; edges carry stable ids usable as indices into per-edge arrays.
class Digraph {
 public:
  /// Empty placeholder graph; useful for default-constructed parameter sets.
  Digraph() = default;
  Digraph(int n_nodes, std::span<const Edge> edges);
  Digraph(int n_nodes, std::initializer_list<Edge> edges)
      : Digraph(n_nodes, std::span<const Edge>(edges.begin(), edges.size())) {}

  int n_nodes() const { return n_nodes_; }
  int n_edges() const { return static_cast<int>(edges_.size()); }

  /// Edge id -> (from, to), ordered by (from, to).
  const std::vector<Edge>& edges() const { return edges_; }

  std::span<const int> out_neighbors(int i) const;
  std::span<const int> in_neighbors(int i) const;
  /// Edge ids aligned with out_neighbors(i).
  std::span<const int> out_edge_ids(int i) const;

  bool has_edge(int from, int to) const { return edge_id(from, to).has_value(); }
  std::optional<int> edge_id(int from, int to) const;

 private:
  void check_node(int i) const;

  int n_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> out_, in_, out_edge_ids_;
};

/// True iff every node reaches every other along directed edges
/// (single node counts as strongly connected). Iterative Tarjan SCC.
bool is_strongly_connected(const Digraph& g);

/// Samples each ordered pair (i,j), i != j, as an edge with probability
/// `density` and rejection-samples until strongly connected.
/// Throws after max_attempts failures.
Digraph random_strongly_connected(int n_nodes, double density, Rng& rng,
                                  int max_attempts = 1000);

}  // namespace bgdsa
