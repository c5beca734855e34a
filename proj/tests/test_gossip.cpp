#include <doctest.h>

#include <cmath>
#include <vector>

#include "bgdsa/gossip.hpp"

using namespace bgdsa;

namespace {

// Oracle: exact mean matrix by enumerating every broadcaster and every
// reception subset of its out-neighbors. Exponential in the out-degree, fine
// for the small graphs used here.
Mat enumerated_mean_matrix(const GossipParams& params) {
  const int n = params.graph.n_nodes();
  Mat mean = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const auto out = params.graph.out_neighbors(i);
    const int deg = static_cast<int>(out.size());
    for (int mask = 0; mask < (1 << deg); ++mask) {
      GossipEvent event;
      event.broadcaster = i;
      double prob = params.clock_probs[i];
      for (int s = 0; s < deg; ++s) {
        const double pr = params.reception(i, out[s]);
        if (mask & (1 << s)) {
          event.receivers.push_back(out[s]);
          prob *= pr;
        } else {
          prob *= 1.0 - pr;
        }
      }
      mean += prob * realization_matrices(params, event).A;
    }
  }
  return mean;
}

// Oracle: stationary row by repeated squaring of the mean matrix.
Vec power_iteration_row(Mat a, int squarings = 15) {
  for (int s = 0; s < squarings; ++s) a = a * a;
  return a.row(0).transpose();
}

GossipParams two_ring(double p1, double reception12, double gamma) {
  const Digraph g(2, {{0, 1}, {1, 0}});
  Vec clock(2);
  clock << p1, 1.0 - p1;
  GossipParams params = make_uniform_params(g, clock, 1.0, gamma);
  params.reception_probs[*g.edge_id(0, 1)] = reception12;
  return params;
}

}  // namespace

TEST_SUITE("gossip") {

TEST_CASE("validate rejects out-of-range parameters") {
  const Digraph g(2, {{0, 1}, {1, 0}});
  Vec clock(2);
  clock << 0.5, 0.5;

  CHECK_NOTHROW(validate(make_uniform_params(g, clock, 1.0, 0.5)));
  CHECK_THROWS_AS(validate(make_uniform_params(g, clock, 0.0, 0.5)), std::invalid_argument);
  CHECK_THROWS_AS(validate(make_uniform_params(g, clock, 1.1, 0.5)), std::invalid_argument);
  CHECK_THROWS_AS(validate(make_uniform_params(g, clock, 1.0, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(validate(make_uniform_params(g, clock, 1.0, 1.0)), std::invalid_argument);

  Vec bad_sum(2);
  bad_sum << 0.5, 0.6;
  CHECK_THROWS_AS(validate(make_uniform_params(g, bad_sum, 1.0, 0.5)), std::invalid_argument);
  Vec negative(2);
  negative << 1.2, -0.2;
  CHECK_THROWS_AS(validate(make_uniform_params(g, negative, 1.0, 0.5)), std::invalid_argument);
}

TEST_CASE("sample_event includes every out-neighbor when reception is certain") {
  const GossipParams params = two_ring(0.5, 1.0, 0.5);
  Rng rng = make_rng(11, 0);
  for (int k = 0; k < 1000; ++k) {
    const GossipEvent event = sample_event(params, rng);
    const auto out = params.graph.out_neighbors(event.broadcaster);
    REQUIRE(event.receivers.size() == out.size());
    for (std::size_t s = 0; s < out.size(); ++s) CHECK(event.receivers[s] == out[s]);
  }
}

TEST_CASE("sample_event broadcaster frequency matches the clock distribution") {
  const GossipParams params = two_ring(0.7, 1.0, 0.5);
  Rng rng = make_rng(12, 0);
  const int draws = 100000;
  int node0 = 0;
  for (int k = 0; k < draws; ++k) {
    if (sample_event(params, rng).broadcaster == 0) ++node0;
  }
  const double freq = static_cast<double>(node0) / draws;
  const double se = std::sqrt(0.7 * 0.3 / draws);
  CHECK(std::abs(freq - 0.7) < 3.0 * se);
}

TEST_CASE("sample_event on a single isolated node") {
  const Digraph g(1, {});
  Vec clock(1);
  clock << 1.0;
  GossipParams params{g, clock, Vec(0), Vec(0)};
  Rng rng = make_rng(13, 0);
  const GossipEvent event = sample_event(params, rng);
  CHECK(event.broadcaster == 0);
  CHECK(event.receivers.empty());
}

TEST_CASE("realization matrices blend receivers toward the broadcaster") {
  const GossipParams params = two_ring(0.5, 1.0, 0.6);
  GossipEvent event;
  event.broadcaster = 0;
  event.receivers = {1};
  const Realization real = realization_matrices(params, event);

  // Receiver keeps 1-gamma on itself and places gamma on the broadcaster.
  CHECK(real.A(0, 0) == doctest::Approx(1.0));
  CHECK(real.A(0, 1) == doctest::Approx(0.0));
  CHECK(real.A(1, 0) == doctest::Approx(0.6));
  CHECK(real.A(1, 1) == doctest::Approx(0.4));
  CHECK(real.d_auc[0] == 1.0);
  CHECK(real.d_auc[1] == 1.0);
  CHECK(real.d_acu[0] == 0.0);
  CHECK(real.d_acu[1] == 1.0);
}

TEST_CASE("realization with no receivers is the identity") {
  const GossipParams params = two_ring(0.5, 1.0, 0.6);
  GossipEvent event;
  event.broadcaster = 0;
  const Realization real = realization_matrices(params, event);
  CHECK(real.A.isIdentity(0.0));
  CHECK(real.d_auc[0] == 1.0);
  CHECK(real.d_auc[1] == 0.0);
  CHECK(real.d_acu.isZero(0.0));
}

TEST_CASE("realization rejects a receiver that is not an out-neighbor") {
  const Digraph g(3, {{0, 1}, {1, 2}, {2, 0}});
  Vec clock = Vec::Constant(3, 1.0 / 3);
  const GossipParams params = make_uniform_params(g, clock, 1.0, 0.5);
  GossipEvent event;
  event.broadcaster = 0;
  event.receivers = {2};
  CHECK_THROWS_AS(realization_matrices(params, event), std::invalid_argument);
}

TEST_CASE("sampled realizations are row stochastic") {
  Rng graph_rng = make_rng(21, 0);
  const Digraph g = random_strongly_connected(5, 0.5, graph_rng);
  Vec clock(5);
  clock << 0.1, 0.3, 0.2, 0.25, 0.15;
  const GossipParams params = make_uniform_params(g, clock, 0.8, 0.7);
  Rng rng = make_rng(21, 1);
  for (int k = 0; k < 2000; ++k) {
    const Realization real = realization_matrices(params, sample_event(params, rng));
    CHECK((real.A.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(real.A.minCoeff() >= 0.0);
    CHECK(real.A.maxCoeff() <= 1.0);
  }
}

TEST_CASE("mean matrix matches exact enumeration") {
  SUBCASE("symmetric two-ring") {
    const GossipParams params = two_ring(0.5, 1.0, 0.5);
    const Mat mean = mean_matrix(params);
    Mat expected(2, 2);
    expected << 0.75, 0.25, 0.25, 0.75;
    CHECK((mean - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((mean - enumerated_mean_matrix(params)).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("lossy edge halves the blend weight") {
    const GossipParams params = two_ring(0.5, 0.5, 0.5);
    const Mat mean = mean_matrix(params);
    // Broadcaster 0's realization row for node 1 averages to (0.25, 0.75).
    CHECK(mean(1, 0) == doctest::Approx(0.5 * 0.25));
    CHECK((mean - enumerated_mean_matrix(params)).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("random five-node graph") {
    Rng rng = make_rng(22, 0);
    const Digraph g = random_strongly_connected(5, 0.5, rng);
    Vec clock(5);
    clock << 0.3, 0.15, 0.2, 0.1, 0.25;
    GossipParams params = make_uniform_params(g, clock, 0.9, 0.4);
    for (int e = 0; e < g.n_edges(); ++e) {
      params.reception_probs[e] = 0.5 + 0.4 * (e % 3) / 2.0;
      params.mixing_weights[e] = 0.2 + 0.1 * (e % 5);
    }
    validate(params);
    CHECK((mean_matrix(params) - enumerated_mean_matrix(params)).cwiseAbs().maxCoeff() <
          1e-14);
  }
}

TEST_CASE("mean matrix rows sum to one") {
  Rng rng = make_rng(23, 0);
  for (int t = 0; t < 5; ++t) {
    const Digraph g = random_strongly_connected(4 + t, 0.5, rng);
    const Vec clock = Vec::Constant(g.n_nodes(), 1.0 / g.n_nodes());
    const GossipParams params = make_uniform_params(g, clock, 0.7, 0.6);
    const Mat mean = mean_matrix(params);
    CHECK((mean.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("stationary vector of a doubly stochastic mean matrix is uniform") {
  // Uniform directed ring: column sums equal row sums equal one.
  std::vector<Edge> edges;
  for (int i = 0; i < 10; ++i) edges.push_back({i, (i + 1) % 10});
  const Digraph g(10, edges);
  const Vec clock = Vec::Constant(10, 0.1);
  const GossipParams params = make_uniform_params(g, clock, 1.0, 0.5);
  const Mat mean = mean_matrix(params);
  CHECK((mean.colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
  const Vec phi = stationary_vector(mean);
  CHECK((phi.array() - 0.1).abs().maxCoeff() < 1e-12);
}

TEST_CASE("stationary vector solves the two-ring case by hand") {
  const GossipParams params = two_ring(2.0 / 3.0, 1.0, 0.5);
  const Vec phi = stationary_vector(mean_matrix(params));
  CHECK(phi[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(phi[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("stationary vector agrees with the power-iteration oracle") {
  Rng rng = make_rng(24, 0);
  for (int t = 0; t < 8; ++t) {
    const Digraph g = random_strongly_connected(3 + t, 0.5, rng);
    const int n = g.n_nodes();
    Vec clock(n);
    for (int i = 0; i < n; ++i) clock[i] = 1.0 + u01(rng);
    clock /= clock.sum();
    const GossipParams params = make_uniform_params(g, clock, 0.9, 0.5);
    const Mat mean = mean_matrix(params);
    const Vec phi = stationary_vector(mean);

    CHECK((phi - power_iteration_row(mean)).lpNorm<Eigen::Infinity>() < 1e-8);
    CHECK(std::abs(phi.sum() - 1.0) < 1e-12);
    CHECK(phi.minCoeff() > 0.0);
    CHECK((mean.transpose() * phi - phi).lpNorm<Eigen::Infinity>() < 1e-10);
  }
}

TEST_CASE("stationary vector rejects reducible matrices") {
  Mat reducible = Mat::Identity(2, 2);
  CHECK_THROWS_AS(stationary_vector(reducible), std::invalid_argument);
  Mat block(4, 4);
  block << 0.5, 0.5, 0, 0, 0.5, 0.5, 0, 0, 0, 0, 0.5, 0.5, 0, 0, 0.5, 0.5;
  CHECK_THROWS_AS(stationary_vector(block), std::invalid_argument);
}

TEST_CASE("update probabilities per variant") {
  SUBCASE("two-ring") {
    const GossipParams params = two_ring(0.5, 1.0, 0.5);
    const Vec acu = expected_update_probs(params, Variant::ACU);
    CHECK(acu[0] == doctest::Approx(0.5));
    CHECK(acu[1] == doctest::Approx(0.5));
    const Vec auc = expected_update_probs(params, Variant::AUC);
    CHECK(auc[0] == doctest::Approx(1.0));
    CHECK(auc[1] == doctest::Approx(1.0));
  }
  SUBCASE("hub with return edges") {
    const Digraph g(4, {{0, 1}, {0, 2}, {0, 3}, {1, 0}, {2, 0}, {3, 0}});
    Vec clock(4);
    clock << 0.4, 0.2, 0.2, 0.2;
    const GossipParams params = make_uniform_params(g, clock, 1.0, 0.5);
    const Vec acu = expected_update_probs(params, Variant::ACU);
    CHECK(acu[0] == doctest::Approx(0.6));
    for (int j = 1; j < 4; ++j) CHECK(acu[j] == doctest::Approx(0.4));
    const Vec auc = expected_update_probs(params, Variant::AUC);
    CHECK(auc[0] == doctest::Approx(1.0));
    for (int j = 1; j < 4; ++j) CHECK(auc[j] == doctest::Approx(0.6));
  }
}

TEST_CASE("decay series shrinks geometrically on the two-ring") {
  const GossipParams params = two_ring(0.5, 1.0, 0.5);
  const DecaySeries series = decay_estimate(params, 30, 1000, 31);

  CHECK(series.mean[0] <= 2.0);
  const LogLinearFit fit = fit_log_linear(series.mean);
  CHECK(fit.slope < 0.0);
  CHECK(fit.r_squared >= 0.95);

  // Nonincreasing up to Monte Carlo noise: paired successive differences
  // must not be significantly negative.
  for (int m = 0; m < 30; ++m) {
    CHECK(series.diff_mean[m] > -2.0 * series.diff_se[m] - 1e-12);
  }
}

TEST_CASE("running products along events stay row stochastic and contract") {
  const GossipParams params = two_ring(0.5, 1.0, 0.5);
  Rng rng = make_rng(32, 0);
  Mat product = Mat::Identity(2, 2);
  for (int k = 0; k < 200; ++k) {
    left_apply_event(product, params, sample_event(params, rng));
    CHECK((product.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
  }
  CHECK(consensus_row_spread(product) < 1e-6);
}

TEST_CASE("log-linear fit recovers an exact geometric series") {
  Vec series(20);
  for (int m = 0; m < 20; ++m) series[m] = 3.0 * std::pow(0.8, m);
  const LogLinearFit fit = fit_log_linear(series);
  CHECK(fit.slope == doctest::Approx(std::log(0.8)).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
}

}  // TEST_SUITE
