#include "bgdsa/design.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bgdsa {

namespace {

constexpr double kSumTol = 1e-12;
constexpr double kRankTol = 1e-10;
constexpr double kVerifyTol = 1e-8;

void check_reception(const Digraph& graph, const Vec& reception_probs) {
  if (reception_probs.size() != graph.n_edges()) {
    throw std::invalid_argument("design: reception probability count must match edge count");
  }
  for (Eigen::Index e = 0; e < reception_probs.size(); ++e) {
    if (!(reception_probs[e] > 0.0) || reception_probs[e] > 1.0) {
      throw std::invalid_argument("design: reception probabilities must lie in (0, 1]");
    }
  }
}

// Verifies a finished design by recomputing the stationary vector of its
// mean matrix. Fills achieved_phi and residual; returns the max deviation
// from the target.
double verify_design(const GossipParams& params, const DesignTarget& target,
                     DesignResult& result) {
  const Mat a_bar = mean_matrix(params);
  result.achieved_phi = stationary_vector(mean_matrix(params));
  result.residual =
      (a_bar.transpose() * result.achieved_phi - result.achieved_phi)
          .lpNorm<Eigen::Infinity>();
  return (result.achieved_phi - target.phi).lpNorm<Eigen::Infinity>();
}

}  // namespace

void validate(const DesignTarget& target) {
  if (target.phi.size() == 0) {
    throw std::invalid_argument("design target is empty");
  }
  if ((target.phi.array() <= 0.0).any()) {
    throw std::invalid_argument("design target must be strictly positive");
  }
  if (std::abs(target.phi.sum() - 1.0) > kSumTol) {
    throw std::invalid_argument("design target must sum to 1");
  }
}

DesignResult algorithm_a(const Digraph& graph, const DesignTarget& target,
                         const Vec& mixing_weights, const Vec& reception_probs) {
  validate(target);
  const int n = graph.n_nodes();
  if (target.phi.size() != n) {
    throw std::invalid_argument("design target size must match node count");
  }
  if (!is_strongly_connected(graph)) {
    throw std::invalid_argument("algorithm_a requires a strongly connected graph");
  }
  check_reception(graph, reception_probs);
  if (mixing_weights.size() != graph.n_edges()) {
    throw std::invalid_argument("algorithm_a: mixing weight count must match edge count");
  }
  for (Eigen::Index e = 0; e < mixing_weights.size(); ++e) {
    if (!(mixing_weights[e] > 0.0) || !(mixing_weights[e] < 1.0)) {
      throw std::invalid_argument("algorithm_a: mixing weights must lie in (0, 1)");
    }
  }

  // Stationarity of phi under the mean matrix reads, for every node k,
  //   p_k * sum_{j in out(k)} phi_j p_kj gamma_kj
  //     = sum_{i in in(k)} p_i phi_k p_ik gamma_ik.
  // With phi fixed this is linear in p. The n equations are dependent
  // (both sides telescope), so the last is replaced by sum p = 1.
  Mat system = Mat::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    for (std::size_t s = 0; s < graph.out_neighbors(k).size(); ++s) {
      const int j = graph.out_neighbors(k)[s];
      const int e = graph.out_edge_ids(k)[s];
      system(k, k) += target.phi[j] * reception_probs[e] * mixing_weights[e];
    }
    for (std::size_t s = 0; s < graph.in_neighbors(k).size(); ++s) {
      const int i = graph.in_neighbors(k)[s];
      const int e = *graph.edge_id(i, k);
      system(k, i) -= target.phi[k] * reception_probs[e] * mixing_weights[e];
    }
  }
  system.row(n - 1).setOnes();
  Vec rhs = Vec::Zero(n);
  rhs[n - 1] = 1.0;

  Eigen::FullPivLU<Mat> lu(system);
  lu.setThreshold(kRankTol * system.norm());
  DesignResult result;
  if (lu.rank() < n) {
    // Strong connectivity was checked above, so a kernel of dimension
    // above one means the balance system is numerically broken.
    throw std::runtime_error("algorithm_a: singular design system");
  }
  result.values = lu.solve(rhs);

  for (int k = 0; k < n; ++k) {
    if (!(result.values[k] > 0.0)) {
      result.offending.push_back(k);
    }
  }
  if (!result.offending.empty()) {
    result.feasible = false;
    return result;
  }

  GossipParams params;
  params.graph = graph;
  params.clock_probs = result.values;
  params.reception_probs = reception_probs;
  params.mixing_weights = mixing_weights;
  validate(params);
  const double err = verify_design(params, target, result);
  if (err > kVerifyTol) {
    throw std::runtime_error("algorithm_a: solution failed verification against the stationary vector");
  }
  result.feasible = true;
  return result;
}

DesignResult algorithm_b(const Digraph& graph, const DesignTarget& target,
                         const Vec& clock_probs, const Vec& reception_probs,
                         double scale_max) {
  validate(target);
  const int n = graph.n_nodes();
  if (target.phi.size() != n) {
    throw std::invalid_argument("design target size must match node count");
  }
  if (!is_strongly_connected(graph)) {
    throw std::invalid_argument("algorithm_b requires a strongly connected graph");
  }
  check_reception(graph, reception_probs);
  if (clock_probs.size() != n) {
    throw std::invalid_argument("algorithm_b: clock probability count must match node count");
  }
  if ((clock_probs.array() <= 0.0).any() ||
      std::abs(clock_probs.sum() - 1.0) > kSumTol) {
    throw std::invalid_argument("algorithm_b: clock probabilities must be positive and sum to 1");
  }
  if (!(scale_max > 0.0) || !(scale_max < 1.0)) {
    throw std::invalid_argument("algorithm_b: scale_max must lie in (0, 1)");
  }

  // With gamma_ij = g_i on every out-edge of i, stationarity reads
  //   g_k * p_k sum_{j in out(k)} phi_j p_kj
  //     = sum_{i in in(k)} g_i * p_i phi_k p_ik      for every k,
  // i.e. B g = 0 where B has zero column sums. Under strong connectivity
  // the kernel is one-dimensional and spanned by a positive vector.
  Mat system = Mat::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    for (std::size_t s = 0; s < graph.out_neighbors(k).size(); ++s) {
      const int j = graph.out_neighbors(k)[s];
      const int e = graph.out_edge_ids(k)[s];
      system(k, k) += clock_probs[k] * target.phi[j] * reception_probs[e];
    }
    for (std::size_t s = 0; s < graph.in_neighbors(k).size(); ++s) {
      const int i = graph.in_neighbors(k)[s];
      const int e = *graph.edge_id(i, k);
      system(k, i) -= clock_probs[i] * target.phi[k] * reception_probs[e];
    }
  }

  // Pin g_n = 1 and solve the first n-1 equations for the rest; the last
  // equation is implied by the zero column sums.
  Mat reduced = system.topLeftCorner(n - 1, n - 1);
  Vec rhs = -system.topRightCorner(n - 1, 1);
  Eigen::FullPivLU<Mat> lu(reduced);
  lu.setThreshold(kRankTol * std::max(1.0, reduced.norm()));
  DesignResult result;
  if (n > 1 && lu.rank() < n - 1) {
    throw std::runtime_error("algorithm_b: design system rank deficiency exceeds one");
  }
  Vec gamma(n);
  if (n > 1) gamma.head(n - 1) = lu.solve(rhs);
  gamma[n - 1] = 1.0;

  for (int k = 0; k < n; ++k) {
    if (!(gamma[k] > 0.0)) {
      result.offending.push_back(k);
    }
  }
  if (!result.offending.empty()) {
    result.feasible = false;
    return result;
  }

  // Any positive multiple works; normalize so the largest weight is
  // scale_max, keeping every gamma inside (0, 1).
  gamma *= scale_max / gamma.maxCoeff();
  result.values = gamma;

  GossipParams params;
  params.graph = graph;
  params.clock_probs = clock_probs;
  params.reception_probs = reception_probs;
  params.mixing_weights.resize(graph.n_edges());
  for (int i = 0; i < n; ++i) {
    for (int e : graph.out_edge_ids(i)) {
      params.mixing_weights[e] = gamma[i];
    }
  }
  validate(params);
  const double err = verify_design(params, target, result);
  if (err > kVerifyTol) {
    throw std::runtime_error("algorithm_b: solution failed verification against the stationary vector");
  }
  result.feasible = true;
  return result;
}

WeightDesign design_for_weights(const Digraph& graph, const Vec& desired_weights,
                                const Vec& clock_probs, const Vec& reception_probs,
                                Variant variant, double scale_max) {
  const int n = graph.n_nodes();
  if (desired_weights.size() != n) {
    throw std::invalid_argument("design_for_weights: weight count must match node count");
  }
  if ((desired_weights.array() <= 0.0).any()) {
    throw std::invalid_argument("design_for_weights: weights must be strictly positive");
  }

  // The ODE weight of node i is phi_i * dbar_i up to a common constant, so
  // the target stationary vector is w_i / dbar_i renormalized.
  GossipParams probe;
  probe.graph = graph;
  probe.clock_probs = clock_probs;
  probe.reception_probs = reception_probs;
  probe.mixing_weights = Vec::Constant(graph.n_edges(), 0.5);
  validate(probe);
  WeightDesign out;
  out.d_bar = expected_update_probs(probe, variant);
  Vec phi = desired_weights.array() / out.d_bar.array();
  phi /= phi.sum();
  out.phi_target = phi;
  out.design = algorithm_b(graph, DesignTarget{phi}, clock_probs,
                           reception_probs, scale_max);
  return out;
}

Vec optimal_phi_for_rate(const Vec& d_bar, const Vec& noise_norms) {
  if (d_bar.size() != noise_norms.size() || d_bar.size() == 0) {
    throw std::invalid_argument("optimal_phi_for_rate: size mismatch");
  }
  if ((d_bar.array() <= 0.0).any() || (noise_norms.array() <= 0.0).any()) {
    throw std::invalid_argument("optimal_phi_for_rate: inputs must be strictly positive");
  }
  Vec phi = (d_bar.array().square() * noise_norms.array()).inverse();
  return phi / phi.sum();
}

double rate_criterion(const Vec& phi, const Vec& d_bar, const Vec& noise_norms) {
  if (phi.size() != d_bar.size() || phi.size() != noise_norms.size()) {
    throw std::invalid_argument("rate_criterion: size mismatch");
  }
  return (phi.array().square() * d_bar.array().square() * noise_norms.array())
      .sum();
}

}  // namespace bgdsa
