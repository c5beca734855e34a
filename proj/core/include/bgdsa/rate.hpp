#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "bgdsa/engine.hpp"
#include "bgdsa/gossip.hpp"
#include "bgdsa/ode.hpp"

namespace bgdsa {

/// Monte Carlo estimate of the diffusion coefficients g_i, the stationary
/// second moment of phi_i(k) d_i(k), where phi(k) is the common row of the
/// limiting forward matrix product and d_i(k) the update indicator of node i
/// at the same tick. Entries lie in [0, 1].
struct GEstimate {
  Vec g;
  Vec se;
  int tail_length = 0;
  int reps = 0;
};

/// Per replication: sample the event at time k (d_i(k) per variant), then
/// multiply tail_length further realization matrices and read off a row of
/// the product as phi(k). AUC includes the tick-k matrix itself in the
/// product (d and phi share it); ACU starts the product at k+1. The decay of
/// the product towards its limit is prechecked at lag tail_length; a decayed
/// deviation above 1e-3 throws.
GEstimate estimate_g(const GossipParams& params, Variant variant, int tail_length,
                     int reps, std::uint64_t seed);

/// Smallest lag at which the estimated product decay drops below the bound,
/// scanned with decay_estimate on a doubling grid. Throws if the bound is
/// not reached by max_lag.
int suggest_tail_length(const GossipParams& params, int max_lag, int reps,
                        std::uint64_t seed, double bound = 5e-4);

/// Linear SDE du = J u dt + dw for the normalized error around x*, with
/// cov w(1) = Q = sum_i g_i R_i(x*).
struct SdeModel {
  Vec x_star;
  Mat J;                // Jacobian of the ODE rhs at x_star
  Mat Q;                // symmetric PSD diffusion covariance
  Vec g;                // per-node coefficients used in Q
  std::vector<Mat> R;   // per-node noise covariances at x_star
  bool hurwitz = false; // all eigenvalues of J have negative real part
};

/// Assembles the SDE at an equilibrium x* (residual ||rhs||_inf must be
/// below 1e-8). Per-agent gains scale the injected noise, so R_i enters Q
/// as gains_i^2 g_i R_i; pass empty gains for all-ones. A non-Hurwitz J is
/// flagged, not an error.
SdeModel build_sde(const OdeSpec& spec, const Vec& x_star, const Vec& g,
                   const Vec& gains = Vec());

/// Stationary covariance of the SDE: solves J S + S J^T + Q = 0 by Kronecker
/// vectorization. Requires hurwitz; residual checked against 1e-10 ||Q||_inf.
Mat stationary_covariance(const SdeModel& sde);

/// Sample covariance of the normalized error U = (X - x*) / sqrt(eps) over
/// the post-burn-in part of a trace. Batch-means standard errors account for
/// autocorrelation across retained samples.
struct NormalizedErrorStats {
  std::vector<Mat> per_node;  // p x p covariance per node
  Mat pooled;                 // p x p, pooled over nodes and samples
  Mat pooled_se;              // batch-means SE per entry of pooled
  int n_samples = 0;          // retained trace samples
  int n_batches = 0;
};

NormalizedErrorStats empirical_normalized_error(const Trace& trace, const Vec& x_star,
                                                double eps, double burn_in = 0.5,
                                                int n_batches = 20);

}  // namespace bgdsa
