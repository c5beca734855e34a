#include "bgdsa/ode.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bgdsa {

OdeSpec make_ode_spec(const GossipParams& params, ModelPtr model, Variant variant,
                      const Vec& gains) {
  validate(params);
  if (!model) throw std::invalid_argument("ode spec: observation model is required");
  if (model->n_agents() != params.graph.n_nodes())
    throw std::invalid_argument("ode spec: model agent count differs from the graph");
  OdeSpec spec;
  spec.model = std::move(model);
  spec.dim = spec.model->dim();
  Vec phi = stationary_vector(mean_matrix(params));
  Vec d_bar = expected_update_probs(params, variant);
  spec.weights = phi.cwiseProduct(d_bar);
  if (gains.size() != 0) {
    if (gains.size() != spec.weights.size())
      throw std::invalid_argument("ode spec: gains size must equal the agent count");
    spec.weights = spec.weights.cwiseProduct(gains);
  }
  for (int i = 0; i < spec.weights.size(); ++i)
    if (!(spec.weights[i] > 0.0))
      throw std::invalid_argument("ode spec: weight of agent " + std::to_string(i + 1) +
                                  " must be positive");
  return spec;
}

Vec ode_rhs(const OdeSpec& spec, const Vec& x) {
  if (!spec.model) throw std::invalid_argument("ode rhs: spec has no model");
  if (spec.weights.size() != spec.model->n_agents()) {
    throw std::invalid_argument("ode rhs: weights do not match the model's agent count");
  }
  if (x.size() != spec.dim) throw std::invalid_argument("ode rhs: state dimension mismatch");
  if (!x.allFinite()) throw std::invalid_argument("ode rhs: state must be finite");
  Vec out = Vec::Zero(spec.dim);
  for (int i = 0; i < spec.weights.size(); ++i) out += spec.weights[i] * spec.model->mean(i, x);
  return out;
}

Mat ode_jacobian(const OdeSpec& spec, const Vec& x) {
  const int p = spec.dim;
  const double h = 1e-6 * std::max(1.0, x.norm());
  Mat jac(p, p);
  Vec probe = x;
  for (int k = 0; k < p; ++k) {
    probe[k] = x[k] + h;
    Vec fp = ode_rhs(spec, probe);
    probe[k] = x[k] - h;
    Vec fm = ode_rhs(spec, probe);
    probe[k] = x[k];
    jac.col(k) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

OdeTrajectory integrate(const OdeSpec& spec, const Vec& x0, double T, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");
  if (T < 0.0) throw std::invalid_argument("integrate: T must be >= 0");
  OdeTrajectory traj;
  Vec x = x0;
  traj.times.push_back(0.0);
  traj.states.push_back(x);
  const auto steps = static_cast<std::int64_t>(std::llround(T / dt));
  for (std::int64_t k = 1; k <= steps; ++k) {
    Vec k1 = ode_rhs(spec, x);
    Vec k2 = ode_rhs(spec, x + 0.5 * dt * k1);
    Vec k3 = ode_rhs(spec, x + 0.5 * dt * k2);
    Vec k4 = ode_rhs(spec, x + dt * k3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite())
      throw std::runtime_error("integrate: non-finite state at t = " + std::to_string(k * dt));
    traj.times.push_back(k * dt);
    traj.states.push_back(x);
  }
  return traj;
}

Vec equilibrium(const OdeSpec& spec, const Vec& x_init) {
  constexpr double kTol = 1e-10;
  constexpr int kMaxIters = 200;
  constexpr int kMaxHalvings = 30;

  Vec x = x_init;
  Vec rhs = ode_rhs(spec, x);
  for (int iter = 0; iter < kMaxIters; ++iter) {
    if (rhs.lpNorm<Eigen::Infinity>() < kTol) return x;
    Mat jac = ode_jacobian(spec, x);
    Vec step = jac.fullPivLu().solve(-rhs);
    if (!step.allFinite())
      throw std::runtime_error("equilibrium: singular Jacobian in Newton step");
    // Damping: halve until the residual decreases.
    double scale = 1.0;
    const double base = rhs.norm();
    for (int h = 0; h < kMaxHalvings; ++h) {
      Vec candidate = x + scale * step;
      Vec rhs_candidate = ode_rhs(spec, candidate);
      if (rhs_candidate.norm() < base) {
        x = candidate;
        rhs = rhs_candidate;
        break;
      }
      scale *= 0.5;
      if (h == kMaxHalvings - 1) {
        x += scale * step;  // accept the tiny step rather than stalling
        rhs = ode_rhs(spec, x);
      }
    }
  }
  if (rhs.lpNorm<Eigen::Infinity>() < kTol) return x;
  throw std::runtime_error(
      "equilibrium: no convergence within 200 Newton iterations; integrate toward the "
      "attractor first and restart from the trajectory endpoint");
}

}  // namespace bgdsa
