#include "bgdsa/gossip.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bgdsa {

const char* to_string(Variant v) { return v == Variant::AUC ? "AUC" : "ACU"; }

void validate(const GossipParams& params) {
  const int n = params.graph.n_nodes();
  const int m = params.graph.n_edges();
  if (params.clock_probs.size() != n)
    throw std::invalid_argument("gossip params: clock_probs has size " +
                                std::to_string(params.clock_probs.size()) + ", expected " +
                                std::to_string(n));
  for (int i = 0; i < n; ++i)
    if (!(params.clock_probs[i] > 0.0))
      throw std::invalid_argument("gossip params: clock probability of node " +
                                  std::to_string(i + 1) + " must be positive");
  if (std::abs(params.clock_probs.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("gossip params: clock probabilities sum to " +
                                std::to_string(params.clock_probs.sum()) + ", expected 1");
  if (params.reception_probs.size() != m || params.mixing_weights.size() != m)
    throw std::invalid_argument(
        "gossip params: per-edge arrays must match the edge count " + std::to_string(m));
  for (int e = 0; e < m; ++e) {
    const auto& [from, to] = params.graph.edges()[e];
    const std::string edge = "(" + std::to_string(from + 1) + "," + std::to_string(to + 1) + ")";
    const double p = params.reception_probs[e];
    const double g = params.mixing_weights[e];
    if (!(p > 0.0 && p <= 1.0))
      throw std::invalid_argument("gossip params: reception probability of edge " + edge +
                                  " must be in (0,1], got " + std::to_string(p));
    if (!(g > 0.0 && g < 1.0))
      throw std::invalid_argument("gossip params: mixing weight of edge " + edge +
                                  " must be in (0,1), got " + std::to_string(g));
  }
}

GossipParams make_uniform_params(Digraph graph, const Vec& clock_probs, double reception_prob,
                                 double mixing_weight) {
  const int m = graph.n_edges();
  GossipParams params{std::move(graph), clock_probs, Vec::Constant(m, reception_prob),
                      Vec::Constant(m, mixing_weight)};
  validate(params);
  return params;
}

GossipEvent sample_event(const GossipParams& params, Rng& rng) {
  const int n = params.graph.n_nodes();
  GossipEvent event;
  double u = u01(rng);
  double cum = 0.0;
  event.broadcaster = n - 1;  // guard against roundoff in the final bin
  for (int i = 0; i < n; ++i) {
    cum += params.clock_probs[i];
    if (u < cum) {
      event.broadcaster = i;
      break;
    }
  }
  auto nbrs = params.graph.out_neighbors(event.broadcaster);
  auto eids = params.graph.out_edge_ids(event.broadcaster);
  for (std::size_t k = 0; k < nbrs.size(); ++k)
    if (u01(rng) < params.reception_probs[eids[k]]) event.receivers.push_back(nbrs[k]);
  return event;
}

Realization realization_matrices(const GossipParams& params, const GossipEvent& event) {
  const int n = params.graph.n_nodes();
  const int i = event.broadcaster;
  if (i < 0 || i >= n) throw std::invalid_argument("realization: broadcaster out of range");
  Realization r{Mat::Identity(n, n), Vec::Zero(n), Vec::Zero(n)};
  r.d_auc[i] = 1.0;
  for (int j : event.receivers) {
    auto eid = params.graph.edge_id(i, j);
    if (!eid)
      throw std::invalid_argument("realization: receiver " + std::to_string(j + 1) +
                                  " is not an out-neighbor of broadcaster " +
                                  std::to_string(i + 1));
    const double gamma = params.mixing_weights[*eid];
    r.A(j, j) = 1.0 - gamma;
    r.A(j, i) = gamma;
    r.d_auc[j] = 1.0;
    r.d_acu[j] = 1.0;
  }
  return r;
}

Mat mean_matrix(const GossipParams& params) {
  const int n = params.graph.n_nodes();
  Mat a_bar = Mat::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    auto nbrs = params.graph.out_neighbors(i);
    auto eids = params.graph.out_edge_ids(i);
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      const int j = nbrs[k];
      const double w = params.clock_probs[i] * params.reception_probs[eids[k]] *
                       params.mixing_weights[eids[k]];
      a_bar(j, j) -= w;
      a_bar(j, i) += w;
    }
  }
  return a_bar;
}

namespace {

// Strong connectivity of the positive-entry pattern (diagonal excluded).
bool positive_pattern_strongly_connected(const Mat& a) {
  const int n = static_cast<int>(a.rows());
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && a(i, j) > 0.0) edges.push_back({i, j});
  return is_strongly_connected(Digraph(n, edges));
}

}  // namespace

Vec stationary_vector(const Mat& a_bar) {
  const int n = static_cast<int>(a_bar.rows());
  if (a_bar.cols() != n) throw std::invalid_argument("stationary_vector: matrix must be square");
  for (int i = 0; i < n; ++i)
    if (!(a_bar(i, i) > 0.0))
      throw std::invalid_argument("stationary_vector: matrix is not primitive (row " +
                                  std::to_string(i + 1) + " has nonpositive diagonal)");
  if (!positive_pattern_strongly_connected(a_bar))
    throw std::invalid_argument(
        "stationary_vector: positive-entry pattern is not strongly connected "
        "(matrix is reducible; mean matrix of a non-strongly-connected graph?)");

  Mat system = a_bar.transpose() - Mat::Identity(n, n);
  system.row(n - 1).setOnes();
  Vec rhs = Vec::Zero(n);
  rhs[n - 1] = 1.0;
  Eigen::FullPivLU<Mat> lu(system);
  if (!lu.isInvertible())
    throw std::runtime_error("stationary_vector: singular stationarity system");
  Vec phi = lu.solve(rhs);

  const double residual = (a_bar.transpose() * phi - phi).lpNorm<Eigen::Infinity>();
  if (residual > 1e-10)
    throw std::runtime_error("stationary_vector: residual " + std::to_string(residual) +
                             " exceeds 1e-10");
  for (int i = 0; i < n; ++i)
    if (!(phi[i] > 0.0))
      throw std::runtime_error("stationary_vector: nonpositive entry at node " +
                               std::to_string(i + 1));
  return phi;
}

Vec expected_update_probs(const GossipParams& params, Variant variant) {
  const int n = params.graph.n_nodes();
  Vec d_bar = Vec::Zero(n);
  for (int j = 0; j < n; ++j) {
    for (int i : params.graph.in_neighbors(j))
      d_bar[j] += params.clock_probs[i] * params.reception(i, j);
    if (variant == Variant::AUC) d_bar[j] += params.clock_probs[j];
    if (d_bar[j] > 1.0 + 1e-12)
      throw std::invalid_argument("update probability of node " + std::to_string(j + 1) +
                                  " evaluates to " + std::to_string(d_bar[j]) +
                                  " > 1; parameters are inconsistent");
  }
  return d_bar;
}

// The broadcaster is never a receiver, so its row is stable while the
// receiver rows blend.
void left_apply_event(Mat& product, const GossipParams& params, const GossipEvent& event) {
  const int i = event.broadcaster;
  for (int j : event.receivers) {
    const double gamma = params.mixing(i, j);
    product.row(j) = (1.0 - gamma) * product.row(j) + gamma * product.row(i);
  }
}

double consensus_row_spread(const Mat& product) {
  return (product.colwise().maxCoeff() - product.colwise().minCoeff()).maxCoeff();
}

DecaySeries decay_estimate(const GossipParams& params, int max_lag, int reps,
                           std::uint64_t seed) {
  if (max_lag < 0) throw std::invalid_argument("decay_estimate: max_lag must be >= 0");
  if (reps < 1) throw std::invalid_argument("decay_estimate: reps must be positive");
  if (!is_strongly_connected(params.graph))
    throw std::invalid_argument("decay_estimate: graph must be strongly connected");
  const int n = params.graph.n_nodes();
  const int n_lags = max_lag + 1;

  // Per-rep infinity-norm deviations, merged by rep index below so the
  // result does not depend on thread scheduling.
  std::vector<Vec> norms(reps);
  parallel_for(reps, [&](int rep) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(rep));
    std::vector<Mat> lag_products;
    lag_products.reserve(n_lags);
    Mat product = Mat::Identity(n, n);
    for (int lag = 0; lag < n_lags; ++lag) {
      left_apply_event(product, params, sample_event(params, rng));
      lag_products.push_back(product);
    }
    // Adaptive tail: run the product until its rows agree, yielding the
    // limit proxy Phi_k on this path.
    const int cap = 20 * n_lags + 2000;
    for (int extra = 0; extra < cap; ++extra) {
      if (extra % 16 == 0 && consensus_row_spread(product) < 1e-13) break;
      left_apply_event(product, params, sample_event(params, rng));
    }
    Vec& out = norms[rep];
    out.resize(n_lags);
    for (int lag = 0; lag < n_lags; ++lag)
      out[lag] = (lag_products[lag] - product).cwiseAbs().rowwise().sum().maxCoeff();
  });

  DecaySeries series;
  series.mean = Vec::Zero(n_lags);
  series.se = Vec::Zero(n_lags);
  series.diff_mean = Vec::Zero(std::max(0, max_lag));
  series.diff_se = Vec::Zero(std::max(0, max_lag));
  for (const Vec& v : norms) series.mean += v;
  series.mean /= reps;
  if (reps > 1) {
    for (const Vec& v : norms) series.se += (v - series.mean).cwiseAbs2();
    series.se = (series.se / (reps * (reps - 1.0))).cwiseSqrt();
  }
  for (int m = 0; m < max_lag; ++m) {
    double sum = 0.0, sumsq = 0.0;
    for (const Vec& v : norms) {
      const double d = v[m] - v[m + 1];
      sum += d;
      sumsq += d * d;
    }
    series.diff_mean[m] = sum / reps;
    if (reps > 1)
      series.diff_se[m] =
          std::sqrt(std::max(0.0, (sumsq - sum * sum / reps) / (reps * (reps - 1.0))));
  }
  return series;
}

LogLinearFit fit_log_linear(const Vec& series) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int count = 0;
  for (int i = 0; i < series.size(); ++i) {
    if (!(series[i] > 0.0)) continue;  // log undefined; skip
    const double x = i, y = std::log(series[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++count;
  }
  if (count < 2) throw std::invalid_argument("fit_log_linear: need at least 2 positive points");
  const double denom = count * sxx - sx * sx;
  LogLinearFit fit;
  fit.slope = (count * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / count;
  const double ss_tot = syy - sy * sy / count;
  double ss_res = 0.0;
  for (int i = 0; i < series.size(); ++i) {
    if (!(series[i] > 0.0)) continue;
    const double r = std::log(series[i]) - (fit.intercept + fit.slope * i);
    ss_res += r * r;
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace bgdsa
