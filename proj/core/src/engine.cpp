#include "bgdsa/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bgdsa {

NetworkState make_initial_state(int n_agents, int dim, const Mat& initial) {
  NetworkState state;
  if (initial.size() == 0) {
    state.X = Mat::Zero(n_agents, dim);
  } else {
    if (initial.rows() != n_agents || initial.cols() != dim)
      throw std::invalid_argument("initial state must be " + std::to_string(n_agents) + "x" +
                                  std::to_string(dim));
    state.X = initial;
  }
  state.update_counts.assign(n_agents, 0);
  return state;
}

double Trace::disagreement(const Mat& state) {
  Eigen::RowVectorXd center = state.colwise().mean();
  return (state.rowwise() - center).cwiseAbs().rowwise().maxCoeff().maxCoeff();
}

double Trace::mse(const Mat& state, const Vec& reference) {
  return (state.rowwise() - reference.transpose()).rowwise().squaredNorm().mean();
}

namespace {

void check_event(const GossipEvent& event, const GossipParams& params) {
  for (int j : event.receivers)
    if (!params.graph.has_edge(event.broadcaster, j))
      throw std::invalid_argument("event: receiver " + std::to_string(j + 1) +
                                  " is not an out-neighbor of broadcaster " +
                                  std::to_string(event.broadcaster + 1));
}

// In-place AUC/ACU event application. Noise draws happen in ascending agent
// index order over the updating set, which matrix_form_step relies on.
void apply_event(NetworkState& state, const GossipEvent& event, const GossipParams& params,
                 const ObservationModel& model, const StepSizePolicy& policy, Variant variant,
                 Rng& rng) {
  const int i = event.broadcaster;
  const std::int64_t n_next = state.n + 1;

  if (variant == Variant::AUC) {
    // Updating set in ascending order: receivers are sorted; splice i in.
    Eigen::RowVectorXd x_hat_bcaster;
    auto update_one = [&](int j) {
      state.update_counts[j] += 1;
      const double eps = step_size(policy, n_next, j, state.update_counts[j]);
      Vec f = model.sample(j, state.X.row(j).transpose(), rng);
      Eigen::RowVectorXd x_hat = state.X.row(j) + eps * f.transpose();
      if (j == i)
        x_hat_bcaster = x_hat;
      else
        state.X.row(j) = x_hat;  // blended with the broadcaster below
    };
    bool bcaster_done = false;
    for (int j : event.receivers) {
      if (!bcaster_done && i < j) {
        update_one(i);
        bcaster_done = true;
      }
      update_one(j);
    }
    if (!bcaster_done) update_one(i);
    for (int j : event.receivers) {
      const double gamma = params.mixing(i, j);
      state.X.row(j) = (1.0 - gamma) * state.X.row(j) + gamma * x_hat_bcaster;
    }
    state.X.row(i) = x_hat_bcaster;
  } else {
    for (int j : event.receivers) {
      const double gamma = params.mixing(i, j);
      state.X.row(j) = (1.0 - gamma) * state.X.row(j) + gamma * state.X.row(i);
    }
    for (int j : event.receivers) {
      state.update_counts[j] += 1;
      const double eps = step_size(policy, n_next, j, state.update_counts[j]);
      Vec f = model.sample(j, state.X.row(j).transpose(), rng);
      state.X.row(j) += eps * f.transpose();
    }
  }
  state.n = n_next;
}

}  // namespace

NetworkState auc_event_step(const NetworkState& state, const GossipEvent& event,
                            const GossipParams& params, const ObservationModel& model,
                            const StepSizePolicy& policy, Rng& rng) {
  check_event(event, params);
  NetworkState next = state;
  apply_event(next, event, params, model, policy, Variant::AUC, rng);
  return next;
}

NetworkState acu_event_step(const NetworkState& state, const GossipEvent& event,
                            const GossipParams& params, const ObservationModel& model,
                            const StepSizePolicy& policy, Rng& rng) {
  check_event(event, params);
  NetworkState next = state;
  apply_event(next, event, params, model, policy, Variant::ACU, rng);
  return next;
}

NetworkState event_step(const NetworkState& state, const GossipEvent& event,
                        const GossipParams& params, const ObservationModel& model,
                        const StepSizePolicy& policy, Variant variant, Rng& rng) {
  return variant == Variant::AUC ? auc_event_step(state, event, params, model, policy, rng)
                                 : acu_event_step(state, event, params, model, policy, rng);
}

NetworkState matrix_form_step(const NetworkState& state, const GossipEvent& event,
                              const GossipParams& params, const ObservationModel& model,
                              const StepSizePolicy& policy, Variant variant, Rng& rng,
                              double tol) {
  Rng replay = rng;  // same draws for the per-agent reference path
  NetworkState reference = event_step(state, event, params, model, policy, variant, replay);

  const Realization real = realization_matrices(params, event);
  const Vec& d = variant == Variant::AUC ? real.d_auc : real.d_acu;
  const std::int64_t n_next = state.n + 1;

  Mat y = variant == Variant::AUC ? state.X : real.A * state.X;
  Mat masked = Mat::Zero(state.X.rows(), state.X.cols());
  for (int j = 0; j < state.X.rows(); ++j) {
    if (d[j] == 0.0) continue;
    const double eps = step_size(policy, n_next, j, state.update_counts[j] + 1);
    Vec f = model.sample(j, y.row(j).transpose(), rng);
    masked.row(j) = eps * f.transpose();
  }

  NetworkState next = reference;
  next.X = real.A * state.X;
  if (variant == Variant::AUC)
    next.X += real.A * masked;
  else
    next.X += masked;

  const double gap = (next.X - reference.X).cwiseAbs().maxCoeff();
  if (gap > tol)
    throw std::runtime_error("matrix-form step disagrees with the per-agent step by " +
                             std::to_string(gap) + " (tol " + std::to_string(tol) + ")");
  return next;
}

Trace run_simulation(const SimulationConfig& config) {
  validate(config.params);
  if (!config.model) throw std::invalid_argument("simulation: observation model is required");
  const int n = config.params.graph.n_nodes();
  const int p = config.model->dim();
  if (config.model->n_agents() != n)
    throw std::invalid_argument("simulation: model has " +
                                std::to_string(config.model->n_agents()) + " agents, graph has " +
                                std::to_string(n) + " nodes");
  validate(config.policy, n);
  if (config.n_iters < 0) throw std::invalid_argument("simulation: n_iters must be >= 0");
  if (!is_strongly_connected(config.params.graph))
    throw std::invalid_argument("simulation: graph must be strongly connected");

  NetworkState state = make_initial_state(n, p, config.initial_state);
  std::int64_t stride = config.trace_stride;
  if (stride <= 0) stride = std::max<std::int64_t>(1, (config.n_iters + 1999) / 2000);

  Trace trace;
  trace.n_nodes = n;
  trace.dim = p;
  trace.samples.push_back({0, state.X});

  Rng rng = make_rng(config.seed, 0);
  for (std::int64_t iter = 1; iter <= config.n_iters; ++iter) {
    GossipEvent event = sample_event(config.params, rng);
    apply_event(state, event, config.params, *config.model, config.policy, config.variant, rng);
    const double magnitude = state.X.cwiseAbs().maxCoeff();
    if (!(magnitude <= config.divergence_bound))
      throw DivergenceError("simulation diverged at iteration " + std::to_string(iter) +
                               ": max |state| = " + std::to_string(magnitude) + " exceeds " +
                               std::to_string(config.divergence_bound));
    if (iter % stride == 0 || iter == config.n_iters) trace.samples.push_back({iter, state.X});
  }
  return trace;
}

}  // namespace bgdsa
