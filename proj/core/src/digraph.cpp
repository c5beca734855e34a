#include "bgdsa/digraph.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

namespace bgdsa {

Digraph::Digraph(int n_nodes, std::span<const Edge> edges) : n_nodes_(n_nodes) {
  if (n_nodes < 1)
    throw std::invalid_argument("digraph: node count must be positive, got " +
                                std::to_string(n_nodes));
  std::set<Edge> unique;
  for (const auto& [from, to] : edges) {
    if (from < 0 || from >= n_nodes || to < 0 || to >= n_nodes)
      throw std::invalid_argument("digraph: edge (" + std::to_string(from) + "," +
                                  std::to_string(to) + ") out of range for " +
                                  std::to_string(n_nodes) + " nodes");
    if (from == to)
      throw std::invalid_argument("digraph: self-loop at node " + std::to_string(from) +
                                  " not allowed (self-influence is implicit)");
    unique.insert({from, to});
  }
  edges_.assign(unique.begin(), unique.end());
  out_.resize(n_nodes_);
  in_.resize(n_nodes_);
  out_edge_ids_.resize(n_nodes_);
  for (int id = 0; id < static_cast<int>(edges_.size()); ++id) {
    const auto& [from, to] = edges_[id];
    out_[from].push_back(to);
    out_edge_ids_[from].push_back(id);
    in_[to].push_back(from);
  }
  for (auto& v : in_) std::sort(v.begin(), v.end());
  // out_ is already sorted: edges_ is ordered by (from, to).
}

void Digraph::check_node(int i) const {
  if (i < 0 || i >= n_nodes_)
    throw std::invalid_argument("digraph: node " + std::to_string(i) + " out of range");
}

std::span<const int> Digraph::out_neighbors(int i) const {
  check_node(i);
  return out_[i];
}

std::span<const int> Digraph::in_neighbors(int i) const {
  check_node(i);
  return in_[i];
}

std::span<const int> Digraph::out_edge_ids(int i) const {
  check_node(i);
  return out_edge_ids_[i];
}

std::optional<int> Digraph::edge_id(int from, int to) const {
  check_node(from);
  check_node(to);
  const auto& nbrs = out_[from];
  auto it = std::lower_bound(nbrs.begin(), nbrs.end(), to);
  if (it == nbrs.end() || *it != to) return std::nullopt;
  return out_edge_ids_[from][it - nbrs.begin()];
}

namespace {

// Iterative Tarjan; returns the number of strongly connected components.
int count_sccs(const Digraph& g) {
  const int n = g.n_nodes();
  std::vector<int> index(n, -1), lowlink(n, 0), stack;
  std::vector<char> on_stack(n, 0);
  int next_index = 0, sccs = 0;

  struct Frame {
    int node;
    std::size_t child;
  };
  std::vector<Frame> frames;

  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    frames.push_back({root, 0});
    index[root] = lowlink[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!frames.empty()) {
      auto& [v, child] = frames.back();
      auto nbrs = g.out_neighbors(v);
      if (child < nbrs.size()) {
        int w = nbrs[child++];
        if (index[w] == -1) {
          index[w] = lowlink[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = 1;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          lowlink[v] = std::min(lowlink[v], index[w]);
        }
      } else {
        if (lowlink[v] == index[v]) {
          ++sccs;
          int w;
          do {
            w = stack.back();
            stack.pop_back();
            on_stack[w] = 0;
          } while (w != v);
        }
        int done = v;
        frames.pop_back();
        if (!frames.empty())
          lowlink[frames.back().node] = std::min(lowlink[frames.back().node], lowlink[done]);
      }
    }
  }
  return sccs;
}

}  // namespace

bool is_strongly_connected(const Digraph& g) { return count_sccs(g) == 1; }

Digraph random_strongly_connected(int n_nodes, double density, Rng& rng, int max_attempts) {
  if (n_nodes < 1) throw std::invalid_argument("random digraph: node count must be positive");
  if (density <= 0.0 || density > 1.0)
    throw std::invalid_argument("random digraph: density must be in (0,1]");
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::vector<Edge> edges;
    for (int i = 0; i < n_nodes; ++i)
      for (int j = 0; j < n_nodes; ++j)
        if (i != j && u01(rng) < density) edges.push_back({i, j});
    Digraph g(n_nodes, edges);
    if (is_strongly_connected(g)) return g;
  }
  throw std::runtime_error("random digraph: no strongly connected sample in " +
                           std::to_string(max_attempts) + " attempts (density " +
                           std::to_string(density) + " too low?)");
}

}  // namespace bgdsa
