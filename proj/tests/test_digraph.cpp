#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "bgdsa/digraph.hpp"
#include "bgdsa/random.hpp"

using namespace bgdsa;

namespace {

// Reachability oracle: plain DFS from every node, independent of the SCC
// implementation under test.
bool oracle_strongly_connected(const Digraph& g) {
  const int n = g.n_nodes();
  for (int start = 0; start < n; ++start) {
    std::vector<bool> seen(n, false);
    std::vector<int> stack{start};
    seen[start] = true;
    int reached = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : g.out_neighbors(v)) {
        if (!seen[w]) {
          seen[w] = true;
          ++reached;
          stack.push_back(w);
        }
      }
    }
    if (reached != n) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("digraph") {

TEST_CASE("construction exposes sorted neighbor lists and stable edge ids") {
  const Digraph g(4, {{0, 1}, {2, 0}, {0, 2}, {1, 2}});
  CHECK(g.n_nodes() == 4);
  CHECK(g.n_edges() == 4);

  REQUIRE(g.out_neighbors(0).size() == 2);
  CHECK(g.out_neighbors(0)[0] == 1);
  CHECK(g.out_neighbors(0)[1] == 2);
  REQUIRE(g.in_neighbors(2).size() == 2);
  CHECK(g.in_neighbors(2)[0] == 0);
  CHECK(g.in_neighbors(2)[1] == 1);
  CHECK(g.out_neighbors(3).empty());
  CHECK(g.in_neighbors(3).empty());

  // Edge ids index edges() and align with out_neighbors order.
  for (int i = 0; i < g.n_nodes(); ++i) {
    for (std::size_t s = 0; s < g.out_neighbors(i).size(); ++s) {
      const int j = g.out_neighbors(i)[s];
      const int e = g.out_edge_ids(i)[s];
      CHECK(g.edges()[e] == Edge{i, j});
      CHECK(g.edge_id(i, j) == e);
    }
  }
  CHECK(g.has_edge(0, 1));
  CHECK_FALSE(g.has_edge(1, 0));
  CHECK_FALSE(g.edge_id(3, 0).has_value());
}

TEST_CASE("construction rejects bad input") {
  CHECK_THROWS_AS(Digraph(0, {}), std::invalid_argument);
  CHECK_THROWS_AS(Digraph(2, {{0, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(Digraph(2, {{-1, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(Digraph(2, {{1, 1}}), std::invalid_argument);
}

TEST_CASE("strong connectivity matches a DFS oracle") {
  const Digraph ring(3, {{0, 1}, {1, 2}, {2, 0}});
  const Digraph chain(3, {{0, 1}, {1, 2}});
  const Digraph split(4, {{0, 1}, {1, 0}, {2, 3}, {3, 2}});
  const Digraph single(1, {});

  for (const Digraph* g : {&ring, &chain, &split, &single}) {
    CHECK(is_strongly_connected(*g) == oracle_strongly_connected(*g));
  }
  CHECK(is_strongly_connected(ring));
  CHECK_FALSE(is_strongly_connected(chain));
  CHECK_FALSE(is_strongly_connected(split));
  CHECK(is_strongly_connected(single));
}

TEST_CASE("random generator returns strongly connected graphs deterministically") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 99ULL}) {
    Rng rng = make_rng(seed, 0);
    const Digraph g = random_strongly_connected(6, 0.4, rng);
    CHECK(g.n_nodes() == 6);
    CHECK(is_strongly_connected(g));
    CHECK(oracle_strongly_connected(g));
    for (const Edge& e : g.edges()) {
      CHECK(e.first != e.second);
      CHECK(e.first >= 0);
      CHECK(e.second < 6);
    }

    Rng rng2 = make_rng(seed, 0);
    const Digraph h = random_strongly_connected(6, 0.4, rng2);
    CHECK(g.edges() == h.edges());
  }

  Rng rng = make_rng(1, 0);
  CHECK_THROWS_AS(random_strongly_connected(0, 0.5, rng), std::invalid_argument);
  CHECK_THROWS_AS(random_strongly_connected(3, 0.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(random_strongly_connected(3, 1.5, rng), std::invalid_argument);
}

TEST_CASE("seed derivation separates streams") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(7, 3) == derive_seed(7, 3));
}

}  // TEST_SUITE
