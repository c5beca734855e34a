#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "bgdsa/digraph.hpp"
#include "bgdsa/random.hpp"

namespace bgdsa {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Variant { AUC, ACU };

const char* to_string(Variant v);

/// Broadcast-gossip network parameters. Per-edge arrays are indexed by
/// Digraph edge id.
///
/// mixing_weights holds gamma_ij: the weight a receiver j places on the
/// broadcaster i's state. The receiver's self-weight is 1 - gamma_ij.
struct GossipParams {
  Digraph graph;
  Vec clock_probs;       // p_i > 0, sums to 1
  Vec reception_probs;   // p_ij in (0,1], per edge id
  Vec mixing_weights;    // gamma_ij in (0,1), per edge id

  double reception(int from, int to) const { return reception_probs[*graph.edge_id(from, to)]; }
  double mixing(int from, int to) const { return mixing_weights[*graph.edge_id(from, to)]; }
};

/// Validates the GossipParams invariants; throws std::invalid_argument with
/// the offending entry on violation.
void validate(const GossipParams& params);

/// Convenience constructor with scalar reception probability and mixing
/// weight applied to every edge.
GossipParams make_uniform_params(Digraph graph, const Vec& clock_probs,
                                 double reception_prob, double mixing_weight);

/// One tick of the global virtual clock: who broadcast, who received.
/// Receivers are sorted ascending and are a subset of out(broadcaster).
struct GossipEvent {
  int broadcaster = 0;
  std::vector<int> receivers;
};

/// Realized matrices for one event: the row-stochastic mixing matrix A and
/// the update-indicator diagonals for both algorithm variants (d_auc marks
/// receivers plus the broadcaster, d_acu receivers only).
struct Realization {
  Mat A;
  Vec d_auc;
  Vec d_acu;
};

/// Draws the broadcaster from clock_probs and each out-neighbor
/// independently with its reception probability. One u01 draw per
/// out-neighbor regardless of the probability value, so event streams pair
/// across parameter sets sharing a topology and clock vector.
GossipEvent sample_event(const GossipParams& params, Rng& rng);

/// Builds A, d_auc, d_acu for an event. Row j of A for a receiver j is
/// (1-gamma_ij) at j and gamma_ij at the broadcaster column i; all other
/// rows are identity rows. Throws if a receiver is not an out-neighbor.
Realization realization_matrices(const GossipParams& params, const GossipEvent& event);

/// Closed-form mean matrix: A_bar = sum_i p_i A_bar^(i), where row j of
/// A_bar^(i) mixes with weight p_ij * gamma_ij (expectation over the
/// row-wise independent reception Bernoullis).
Mat mean_matrix(const GossipParams& params);

/// Unique left eigenvector of a primitive row-stochastic matrix for
/// eigenvalue 1, normalized to sum 1 (all entries positive). Solves
/// (A^T - I) phi = 0 with one equation replaced by 1^T phi = 1.
/// Primitivity precheck: positive diagonal and strongly connected
/// positive-entry pattern; violation or residual > 1e-10 throws.
Vec stationary_vector(const Mat& A_bar);

/// Per-node probability of performing an SA update at a tick.
/// ACU: dbar_j = sum_{i in in(j)} p_i p_ij. AUC adds the node's own
/// broadcast probability p_j. Values above 1 are rejected.
Vec expected_update_probs(const GossipParams& params, Variant variant);

/// Left-applies the event's mixing matrix to a running product in place:
/// product <- A(event) * product. Receiver rows blend toward the broadcaster
/// row; the broadcaster row itself is untouched.
void left_apply_event(Mat& product, const GossipParams& params, const GossipEvent& event);

/// Largest columnwise max-min gap; zero iff all rows agree (consensus of a
/// stochastic product).
double consensus_row_spread(const Mat& product);

/// Monte Carlo estimate of the mean deviation E|Phi(k+m|k) - Phi_k| of the
/// running backward product from its limit, per lag m = 0..max_lag
/// (infinity norm). One long product per replication serves as both the lag
/// samples and (after an adaptive tail) the limit proxy. diff_* fields
/// describe the paired successive differences e(m) - e(m+1).
struct DecaySeries {
  Vec mean;       // size max_lag+1
  Vec se;         // Monte Carlo standard error per lag
  Vec diff_mean;  // size max_lag, paired mean of e(m) - e(m+1) samples
  Vec diff_se;
};

DecaySeries decay_estimate(const GossipParams& params, int max_lag, int reps,
                           std::uint64_t seed);

/// Least-squares fit of log(y) against x; for checking geometric decay.
struct LogLinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

LogLinearFit fit_log_linear(const Vec& series);

}  // namespace bgdsa
