#include <doctest.h>

#include <cmath>
#include <vector>

#include "bgdsa/design.hpp"

using namespace bgdsa;

namespace {

Digraph two_ring_graph() { return Digraph(2, {{0, 1}, {1, 0}}); }

DesignTarget target(std::initializer_list<double> values) {
  Vec phi(static_cast<int>(values.size()));
  int k = 0;
  for (double v : values) phi[k++] = v;
  return DesignTarget{phi};
}

// Expands Algorithm B's broadcaster-indexed weights onto the per-edge arrays
// and recomputes the stationary vector from scratch.
Vec forward_check_b(const Digraph& graph, const Vec& clock, const Vec& reception,
                    const Vec& gamma_per_node) {
  GossipParams params;
  params.graph = graph;
  params.clock_probs = clock;
  params.reception_probs = reception;
  params.mixing_weights = Vec(graph.n_edges());
  for (int e = 0; e < graph.n_edges(); ++e) {
    params.mixing_weights[e] = gamma_per_node[graph.edges()[e].first];
  }
  validate(params);
  return stationary_vector(mean_matrix(params));
}

}  // namespace

TEST_SUITE("design") {

TEST_CASE("target validation") {
  CHECK_NOTHROW(validate(target({0.5, 0.5})));
  CHECK_THROWS_AS(validate(target({0.5, 0.6})), std::invalid_argument);
  CHECK_THROWS_AS(validate(target({1.5, -0.5})), std::invalid_argument);
  CHECK_THROWS_AS(validate(target({1.0, 0.0})), std::invalid_argument);
  CHECK_THROWS_AS(validate(DesignTarget{Vec(0)}), std::invalid_argument);
}

TEST_CASE("clock design on the two-ring solves by hand") {
  const Digraph g = two_ring_graph();
  const Vec mixing = Vec::Constant(2, 0.5);
  const Vec reception = Vec::Ones(2);

  SUBCASE("uniform target gives the uniform clock") {
    const DesignResult result = algorithm_a(g, target({0.5, 0.5}), mixing, reception);
    REQUIRE(result.feasible);
    CHECK(result.values[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(result.values[1] == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("mass follows the broadcast frequency") {
    const DesignResult result = algorithm_a(g, target({2.0 / 3.0, 1.0 / 3.0}), mixing, reception);
    REQUIRE(result.feasible);
    CHECK(result.values[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(result.values[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(result.achieved_phi[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
    CHECK(result.residual < 1e-10);
  }
}

TEST_CASE("mixing design on the two-ring solves by hand") {
  const Digraph g = two_ring_graph();
  const Vec clock = Vec::Constant(2, 0.5);
  const Vec reception = Vec::Ones(2);

  const DesignResult result =
      algorithm_b(g, target({2.0 / 3.0, 1.0 / 3.0}), clock, reception, 0.9);
  REQUIRE(result.feasible);
  // Balance: p0 phi1 gamma0 = phi0 p1 gamma1 forces gamma0 = 2 gamma1; the
  // larger weight is pinned at the scale cap.
  CHECK(result.values[0] == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(result.values[1] == doctest::Approx(0.45).epsilon(1e-12));

  const Vec phi = forward_check_b(g, clock, reception, result.values);
  CHECK(phi[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("uniform target on a directed ring saturates every weight") {
  std::vector<Edge> edges;
  for (int i = 0; i < 6; ++i) edges.push_back({i, (i + 1) % 6});
  const Digraph g(6, edges);
  const Vec clock = Vec::Constant(6, 1.0 / 6);
  const Vec reception = Vec::Ones(6);

  const DesignResult result =
      algorithm_b(g, target({1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6}), clock,
                  reception, 0.99);
  REQUIRE(result.feasible);
  CHECK((result.values.array() - 0.99).abs().maxCoeff() < 1e-12);
}

TEST_CASE("designs round-trip on random graphs") {
  Rng rng = make_rng(71, 0);
  for (int t = 0; t < 10; ++t) {
    const Digraph g = random_strongly_connected(3 + t % 6, 0.45, rng);
    const int n = g.n_nodes();
    Vec phi(n);
    for (int i = 0; i < n; ++i) phi[i] = 0.2 + u01(rng);
    phi /= phi.sum();
    const DesignTarget tgt{phi};
    const Vec reception = Vec::Ones(g.n_edges());

    const DesignResult a =
        algorithm_a(g, tgt, Vec::Constant(g.n_edges(), 0.5), reception);
    REQUIRE(a.feasible);
    CHECK(std::abs(a.values.sum() - 1.0) < 1e-12);
    CHECK(a.values.minCoeff() > 0.0);
    CHECK((a.achieved_phi - phi).lpNorm<Eigen::Infinity>() < 1e-8);

    const DesignResult b = algorithm_b(g, tgt, Vec::Constant(n, 1.0 / n), reception);
    REQUIRE(b.feasible);
    CHECK(b.values.maxCoeff() == doctest::Approx(0.99).epsilon(1e-12));
    CHECK(b.values.minCoeff() > 0.0);
    CHECK((b.achieved_phi - phi).lpNorm<Eigen::Infinity>() < 1e-8);
    const Vec phi_forward = forward_check_b(g, Vec::Constant(n, 1.0 / n), reception, b.values);
    CHECK((phi_forward - phi).lpNorm<Eigen::Infinity>() < 1e-8);
  }
}

TEST_CASE("designs accept lossy edges") {
  Rng rng = make_rng(72, 0);
  const Digraph g = random_strongly_connected(5, 0.5, rng);
  Vec reception(g.n_edges());
  for (int e = 0; e < g.n_edges(); ++e) reception[e] = 0.4 + 0.5 * u01(rng);
  Vec phi(5);
  phi << 0.3, 0.15, 0.25, 0.1, 0.2;
  const DesignTarget tgt{phi};

  const DesignResult a = algorithm_a(g, tgt, Vec::Constant(g.n_edges(), 0.6), reception);
  REQUIRE(a.feasible);
  CHECK((a.achieved_phi - phi).lpNorm<Eigen::Infinity>() < 1e-8);

  const DesignResult b = algorithm_b(g, tgt, Vec::Constant(5, 0.2), reception);
  REQUIRE(b.feasible);
  CHECK((b.achieved_phi - phi).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("design argument checks") {
  const Digraph g = two_ring_graph();
  const Vec reception = Vec::Ones(2);
  const Vec mixing = Vec::Constant(2, 0.5);

  CHECK_THROWS_AS(algorithm_a(g, target({0.5, 0.3, 0.2}), mixing, reception),
                  std::invalid_argument);
  CHECK_THROWS_AS(algorithm_a(g, target({0.5, 0.5}), Vec::Constant(3, 0.5), reception),
                  std::invalid_argument);
  CHECK_THROWS_AS(algorithm_a(g, target({0.5, 0.5}), Vec::Constant(2, 1.0), reception),
                  std::invalid_argument);
  CHECK_THROWS_AS(algorithm_a(g, target({0.5, 0.5}), mixing, Vec::Constant(2, 0.0)),
                  std::invalid_argument);

  Vec bad_clock(2);
  bad_clock << 0.7, 0.7;
  CHECK_THROWS_AS(algorithm_b(g, target({0.5, 0.5}), bad_clock, reception),
                  std::invalid_argument);
  CHECK_THROWS_AS(algorithm_b(g, target({0.5, 0.5}), Vec::Constant(2, 0.5), reception, 1.5),
                  std::invalid_argument);

  const Digraph chain(2, {{0, 1}});
  CHECK_THROWS_AS(algorithm_a(chain, target({0.5, 0.5}), Vec::Constant(1, 0.5), Vec::Ones(1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(algorithm_b(chain, target({0.5, 0.5}), Vec::Constant(2, 0.5), Vec::Ones(1)),
                  std::invalid_argument);
}

TEST_CASE("weight-targeted design hits the requested ode weights") {
  const Digraph g = two_ring_graph();
  const Vec clock = Vec::Constant(2, 0.5);
  const Vec reception = Vec::Ones(2);
  Vec desired(2);
  desired << 3.0, 1.0;

  const WeightDesign wd =
      design_for_weights(g, desired, clock, reception, Variant::ACU, 0.9);
  REQUIRE(wd.design.feasible);

  // phi_target is proportional to w / dbar and sums to one.
  CHECK(std::abs(wd.phi_target.sum() - 1.0) < 1e-12);
  const Vec ratio = wd.phi_target.cwiseProduct(wd.d_bar).cwiseQuotient(desired);
  CHECK(std::abs(ratio[0] - ratio[1]) < 1e-12);

  // Forward check: realized weights phi_i dbar_i are proportional to the
  // request.
  GossipParams params;
  params.graph = g;
  params.clock_probs = clock;
  params.reception_probs = reception;
  params.mixing_weights = Vec(2);
  for (int e = 0; e < 2; ++e) {
    params.mixing_weights[e] = wd.design.values[g.edges()[e].first];
  }
  const Vec phi = stationary_vector(mean_matrix(params));
  const Vec dbar = expected_update_probs(params, Variant::ACU);
  const Vec weights = phi.cwiseProduct(dbar);
  CHECK(weights[0] / weights[1] == doctest::Approx(3.0).epsilon(1e-8));

  CHECK_THROWS_AS(design_for_weights(g, Vec::Zero(2), clock, reception, Variant::ACU),
                  std::invalid_argument);
}

TEST_CASE("rate-optimal stationary mass") {
  SUBCASE("two nodes by hand") {
    Vec dbar = Vec::Ones(2);
    Vec norms(2);
    norms << 1.0, 4.0;
    const Vec phi = optimal_phi_for_rate(dbar, norms);
    CHECK(phi[0] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(phi[1] == doctest::Approx(0.2).epsilon(1e-12));
  }
  SUBCASE("uniform inputs give the uniform vector") {
    const Vec phi = optimal_phi_for_rate(Vec::Constant(4, 0.7), Vec::Constant(4, 2.0));
    CHECK((phi.array() - 0.25).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("beats a fine grid search in two dimensions") {
    Vec dbar(2), norms(2);
    dbar << 0.9, 0.4;
    norms << 2.0, 1.0;
    const Vec phi = optimal_phi_for_rate(dbar, norms);
    const double best = rate_criterion(phi, dbar, norms);
    for (int k = 1; k < 10000; ++k) {
      Vec probe(2);
      probe << k * 1e-4, 1.0 - k * 1e-4;
      CHECK(rate_criterion(probe, dbar, norms) >= best - 1e-12);
    }
  }
  SUBCASE("beats a coarse grid search in three dimensions") {
    Vec dbar(3), norms(3);
    dbar << 0.5, 1.0, 0.75;
    norms << 1.0, 3.0, 0.5;
    const Vec phi = optimal_phi_for_rate(dbar, norms);
    const double best = rate_criterion(phi, dbar, norms);
    for (int a = 1; a < 100; ++a) {
      for (int b = 1; a + b < 100; ++b) {
        Vec probe(3);
        probe << a * 0.01, b * 0.01, 1.0 - 0.01 * (a + b);
        CHECK(rate_criterion(probe, dbar, norms) >= best - 1e-12);
      }
    }
  }
  SUBCASE("argument checks") {
    CHECK_THROWS_AS(optimal_phi_for_rate(Vec::Ones(2), Vec::Ones(3)), std::invalid_argument);
    Vec zero_norm(2);
    zero_norm << 1.0, 0.0;
    CHECK_THROWS_AS(optimal_phi_for_rate(Vec::Ones(2), zero_norm), std::invalid_argument);
    CHECK_THROWS_AS(rate_criterion(Vec::Ones(2), Vec::Ones(2), Vec::Ones(3)),
                    std::invalid_argument);
  }
}

}  // TEST_SUITE
