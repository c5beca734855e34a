#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bgdsa/gossip.hpp"
#include "bgdsa/models.hpp"

namespace bgdsa {

/// Stacked agent states: row j of X is agent j's state in R^p.
/// update_counts tallies each agent's own updates (Gamma_i); AUC counts the
/// broadcaster as updating, ACU does not.
struct NetworkState {
  Mat X;
  std::int64_t n = 0;
  std::vector<std::int64_t> update_counts;
};

NetworkState make_initial_state(int n_agents, int dim, const Mat& initial);

/// Recorded iterations of one run. Samples are strictly increasing in iter.
struct TraceSample {
  std::int64_t iter = 0;
  Mat state;  // N x p
};

struct Trace {
  std::vector<TraceSample> samples;
  int n_nodes = 0;
  int dim = 0;

  /// max_j || X^j - mean_k X^k ||_inf of one sample.
  static double disagreement(const Mat& state);
  /// Node-averaged squared distance to a reference point.
  static double mse(const Mat& state, const Vec& reference);
};

/// One AUC event: broadcaster and receivers take the SA step on their own
/// states; receivers then blend their updated state with the broadcaster's
/// updated state using the edge mixing weight.
NetworkState auc_event_step(const NetworkState& state, const GossipEvent& event,
                            const GossipParams& params, const ObservationModel& model,
                            const StepSizePolicy& policy, Rng& rng);

/// One ACU event: receivers first blend with the broadcaster's current
/// state, then take the SA step from the blended point. The broadcaster
/// does not update.
NetworkState acu_event_step(const NetworkState& state, const GossipEvent& event,
                            const GossipParams& params, const ObservationModel& model,
                            const StepSizePolicy& policy, Rng& rng);

NetworkState event_step(const NetworkState& state, const GossipEvent& event,
                        const GossipParams& params, const ObservationModel& model,
                        const StepSizePolicy& policy, Variant variant, Rng& rng);

/// Applies the same event through the stacked-matrix recursion
/// X' = A X + (A D or D0) diag(eps) F and cross-checks it against the
/// per-agent step replayed on a copy of the stream. Noise is drawn in
/// ascending agent order in both paths, so the draws coincide.
/// Throws on disagreement beyond tol.
NetworkState matrix_form_step(const NetworkState& state, const GossipEvent& event,
                              const GossipParams& params, const ObservationModel& model,
                              const StepSizePolicy& policy, Variant variant, Rng& rng,
                              double tol = 1e-12);

/// Thrown when the state magnitude passes the divergence bound (or turns
/// non-finite). Callers that treat divergence as an expected outcome catch
/// this specifically.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SimulationConfig {
  GossipParams params;
  ModelPtr model;
  StepSizePolicy policy = ConstantStep{0.01};
  Variant variant = Variant::AUC;
  std::int64_t n_iters = 0;
  std::uint64_t seed = 0;
  Mat initial_state;             // N x p; empty means all zeros
  std::int64_t trace_stride = 0; // 0: ceil(n_iters / 2000)
  double divergence_bound = 1e9;
};

/// Runs n_iters sampled events and records the initial state, every
/// trace_stride-th iteration, and the final state. Deterministic given the
/// seed. Throws on divergence past the configured bound and refuses graphs
/// that are not strongly connected.
Trace run_simulation(const SimulationConfig& config);

}  // namespace bgdsa
