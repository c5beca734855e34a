#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bgdsa/models.hpp"

namespace bgdsa {

/// The deterministic mean dynamics dx/dt = sum_i w_i fbar^i(x), with
/// w_i = phi_i * dbar_i (optionally scaled by per-agent gains). Trajectories
/// of this ODE locate where the stochastic iterates settle.
struct OdeSpec {
  Vec weights;
  ModelPtr model;
  int dim = 1;
};

/// Builds the spec from network parameters: w_i = phi_i * dbar_i with phi
/// the stationary vector of the mean matrix and dbar the variant's update
/// probabilities. Optional per-agent gains multiply in as w_i *= v_i.
OdeSpec make_ode_spec(const GossipParams& params, ModelPtr model, Variant variant,
                      const Vec& gains = Vec());

Vec ode_rhs(const OdeSpec& spec, const Vec& x);

/// Central finite-difference Jacobian of ode_rhs, step 1e-6 * max(1, |x|).
Mat ode_jacobian(const OdeSpec& spec, const Vec& x);

struct OdeTrajectory {
  std::vector<double> times;
  std::vector<Vec> states;
};

/// Classical fixed-step RK4 from x0 over [0, T], sampled every dt.
/// Throws if the state leaves the finite range.
OdeTrajectory integrate(const OdeSpec& spec, const Vec& x0, double T, double dt);

/// Root of ode_rhs by damped Newton iteration with the finite-difference
/// Jacobian; converged when ||rhs||_inf < 1e-10. Throws after 200 iterations
/// with a hint to integrate toward the attractor first.
Vec equilibrium(const OdeSpec& spec, const Vec& x_init);

}  // namespace bgdsa
