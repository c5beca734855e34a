#include "bgdsa/rate.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "bgdsa/models.hpp"

namespace bgdsa {

namespace {

constexpr double kDecayBound = 1e-3;

void check_decay(const GossipParams& params, int tail_length, std::uint64_t seed) {
  // A cheap probe is enough: the decay bound is orders of magnitude above
  // the Monte Carlo noise of 200 replications.
  const int probe_reps = 200;
  const DecaySeries probe = decay_estimate(params, tail_length, probe_reps, seed);
  const double tail = probe.mean[tail_length];
  if (!(tail < kDecayBound)) {
    throw std::invalid_argument(
        "estimate_g: tail_length " + std::to_string(tail_length) +
        " is insufficient; estimated product decay there is " + std::to_string(tail) +
        " (needs < " + std::to_string(kDecayBound) + ")");
  }
}

}  // namespace

GEstimate estimate_g(const GossipParams& params, Variant variant, int tail_length,
                     int reps, std::uint64_t seed) {
  validate(params);
  if (tail_length < 1) throw std::invalid_argument("estimate_g: tail_length must be positive");
  if (reps < 2) throw std::invalid_argument("estimate_g: need at least 2 replications");
  if (!is_strongly_connected(params.graph))
    throw std::invalid_argument("estimate_g: graph must be strongly connected");
  check_decay(params, tail_length, derive_seed(seed, 0x646563ULL));

  const int n = params.graph.n_nodes();
  std::vector<Vec> samples(reps);
  parallel_for(reps, [&](int rep) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(rep));
    const GossipEvent tick = sample_event(params, rng);
    Vec d = Vec::Zero(n);
    for (int j : tick.receivers) d[j] = 1.0;
    if (variant == Variant::AUC) d[tick.broadcaster] = 1.0;

    // phi(k) is a row of the limiting product of realization matrices. For
    // AUC the product starts with the tick-k matrix itself, so phi and d are
    // dependent; for ACU it starts one tick later and is independent of d.
    Mat product = Mat::Identity(n, n);
    if (variant == Variant::AUC) left_apply_event(product, params, tick);
    for (int step = 0; step < tail_length; ++step) {
      left_apply_event(product, params, sample_event(params, rng));
    }
    samples[rep] = product.row(0).transpose().cwiseAbs2().cwiseProduct(d);
  });

  GEstimate est;
  est.tail_length = tail_length;
  est.reps = reps;
  est.g = Vec::Zero(n);
  est.se = Vec::Zero(n);
  for (const Vec& s : samples) est.g += s;
  est.g /= reps;
  for (const Vec& s : samples) est.se += (s - est.g).cwiseAbs2();
  est.se = (est.se / (reps * (reps - 1.0))).cwiseSqrt();
  return est;
}

int suggest_tail_length(const GossipParams& params, int max_lag, int reps,
                        std::uint64_t seed, double bound) {
  if (max_lag < 1) throw std::invalid_argument("suggest_tail_length: max_lag must be positive");
  const DecaySeries series = decay_estimate(params, max_lag, reps, seed);
  for (int m = 1; m <= max_lag; ++m) {
    if (series.mean[m] < bound) return m;
  }
  throw std::runtime_error(
      "suggest_tail_length: decay still " + std::to_string(series.mean[max_lag]) +
      " at lag " + std::to_string(max_lag));
}

SdeModel build_sde(const OdeSpec& spec, const Vec& x_star, const Vec& g,
                   const Vec& gains) {
  const int n = spec.model->n_agents();
  const int p = spec.model->dim();
  if (g.size() != n) throw std::invalid_argument("build_sde: g size must match agent count");
  if ((g.array() < 0.0).any() || (g.array() > 1.0).any())
    throw std::invalid_argument("build_sde: g entries must lie in [0, 1]");
  Vec v = gains;
  if (v.size() == 0) v = Vec::Ones(n);
  if (v.size() != n) throw std::invalid_argument("build_sde: gains size must match agent count");

  const double residual = ode_rhs(spec, x_star).lpNorm<Eigen::Infinity>();
  if (!(residual < 1e-8)) {
    throw std::invalid_argument("build_sde: x* is not an equilibrium (rhs norm " +
                                std::to_string(residual) + ")");
  }

  SdeModel sde;
  sde.x_star = x_star;
  sde.g = g;
  sde.J = ode_jacobian(spec, x_star);
  sde.Q = Mat::Zero(p, p);
  sde.R.reserve(n);
  for (int i = 0; i < n; ++i) {
    sde.R.push_back(spec.model->noise_cov(i, x_star));
    sde.Q += g[i] * v[i] * v[i] * sde.R.back();
  }
  sde.Q = 0.5 * (sde.Q + sde.Q.transpose().eval());

  const Eigen::EigenSolver<Mat> eig(sde.J);
  sde.hurwitz = (eig.eigenvalues().real().array() < 0.0).all();
  return sde;
}

Mat stationary_covariance(const SdeModel& sde) {
  if (!sde.hurwitz) {
    throw std::invalid_argument("stationary_covariance: J is not Hurwitz");
  }
  const int p = static_cast<int>(sde.J.rows());

  // vec(J S + S J^T) = (I (x) J + J (x) I) vec(S), column-major vec.
  Mat system = Mat::Zero(p * p, p * p);
  for (int c = 0; c < p; ++c) {
    system.block(c * p, c * p, p, p) += sde.J;
  }
  for (int c = 0; c < p; ++c) {
    for (int r = 0; r < p; ++r) {
      for (int k = 0; k < p; ++k) {
        system(c * p + r, k * p + r) += sde.J(c, k);
      }
    }
  }
  Vec rhs(p * p);
  for (int c = 0; c < p; ++c) rhs.segment(c * p, p) = -sde.Q.col(c);

  Eigen::FullPivLU<Mat> lu(system);
  if (!lu.isInvertible()) {
    throw std::runtime_error("stationary_covariance: singular Lyapunov system");
  }
  const Vec vec_s = lu.solve(rhs);
  Mat S(p, p);
  for (int c = 0; c < p; ++c) S.col(c) = vec_s.segment(c * p, p);
  S = 0.5 * (S + S.transpose().eval());

  const double residual =
      (sde.J * S + S * sde.J.transpose() + sde.Q).lpNorm<Eigen::Infinity>();
  if (residual > 1e-10 * sde.Q.lpNorm<Eigen::Infinity>() + 1e-14) {
    throw std::runtime_error("stationary_covariance: residual " + std::to_string(residual));
  }
  return S;
}

NormalizedErrorStats empirical_normalized_error(const Trace& trace, const Vec& x_star,
                                                double eps, double burn_in,
                                                int n_batches) {
  if (!(eps > 0.0)) throw std::invalid_argument("empirical_normalized_error: eps must be positive");
  if (!(burn_in >= 0.0) || !(burn_in < 1.0))
    throw std::invalid_argument("empirical_normalized_error: burn_in must lie in [0, 1)");
  if (n_batches < 2) throw std::invalid_argument("empirical_normalized_error: need >= 2 batches");
  const int total = static_cast<int>(trace.samples.size());
  const int first = static_cast<int>(std::ceil(burn_in * total));
  const int kept = total - first;
  if (kept < 100) {
    throw std::invalid_argument("empirical_normalized_error: only " + std::to_string(kept) +
                                " post-burn-in samples; need at least 100");
  }
  const int n = trace.n_nodes;
  const int p = trace.dim;
  if (x_star.size() != p) throw std::invalid_argument("empirical_normalized_error: x* dim mismatch");
  const double scale = 1.0 / std::sqrt(eps);

  // Overall pooled mean; covariances center on it so the per-batch statistic
  // is a plain average of outer products.
  Vec pooled_mean = Vec::Zero(p);
  std::vector<Vec> node_mean(n, Vec::Zero(p));
  for (int t = first; t < total; ++t) {
    for (int j = 0; j < n; ++j) {
      const Vec u = (trace.samples[t].state.row(j).transpose() - x_star) * scale;
      pooled_mean += u;
      node_mean[j] += u;
    }
  }
  pooled_mean /= static_cast<double>(kept) * n;
  for (Vec& m : node_mean) m /= kept;

  NormalizedErrorStats stats;
  stats.n_samples = kept;
  stats.n_batches = n_batches;
  stats.per_node.assign(n, Mat::Zero(p, p));
  stats.pooled = Mat::Zero(p, p);
  stats.pooled_se = Mat::Zero(p, p);

  std::vector<Mat> batch_stat(n_batches, Mat::Zero(p, p));
  std::vector<int> batch_count(n_batches, 0);
  for (int t = first; t < total; ++t) {
    const int b = std::min(n_batches - 1,
                           static_cast<int>((static_cast<std::int64_t>(t - first) * n_batches) / kept));
    for (int j = 0; j < n; ++j) {
      const Vec u = (trace.samples[t].state.row(j).transpose() - x_star) * scale;
      stats.per_node[j] += (u - node_mean[j]) * (u - node_mean[j]).transpose();
      const Mat outer = (u - pooled_mean) * (u - pooled_mean).transpose();
      batch_stat[b] += outer;
      stats.pooled += outer;
    }
    batch_count[b] += n;
  }
  for (Mat& c : stats.per_node) c /= std::max(1, kept - 1);
  stats.pooled /= static_cast<double>(kept) * n - 1.0;

  Mat batch_mean = Mat::Zero(p, p);
  for (int b = 0; b < n_batches; ++b) {
    if (batch_count[b] == 0)
      throw std::invalid_argument("empirical_normalized_error: empty batch; fewer samples than batches");
    batch_stat[b] /= batch_count[b];
    batch_mean += batch_stat[b];
  }
  batch_mean /= n_batches;
  for (int b = 0; b < n_batches; ++b) {
    stats.pooled_se += (batch_stat[b] - batch_mean).cwiseAbs2();
  }
  stats.pooled_se = (stats.pooled_se / (n_batches * (n_batches - 1.0))).cwiseSqrt();
  return stats;
}

}  // namespace bgdsa
