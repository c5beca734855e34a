#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "bgdsa/gossip.hpp"
#include "bgdsa/random.hpp"

namespace bgdsa {

/// Per-agent stochastic observation F^i with closed-form mean field and
/// noise covariance. The mean and covariance are exposed explicitly because
/// the ODE/SDE analysis consumes them as ground truth.
class ObservationModel {
 public:
  virtual ~ObservationModel() = default;

  virtual int n_agents() const = 0;
  virtual int dim() const = 0;

  virtual Vec sample(int agent, const Vec& x, Rng& rng) const = 0;
  virtual Vec mean(int agent, const Vec& x) const = 0;
  virtual Mat noise_cov(int agent, const Vec& x) const = 0;

  /// Analytic Jacobian of the mean field where available; used as a
  /// cross-check against finite differences.
  virtual std::optional<Mat> mean_jacobian(int /*agent*/, const Vec& /*x*/) const {
    return std::nullopt;
  }
};

using ModelPtr = std::shared_ptr<const ObservationModel>;

/// Scalar estimation model: sample(i,x) = (m_i + sigma_i Z) - x, so the mean
/// field is m_i - x and the noise variance sigma_i^2. Requires sigma_i > 0;
/// use quadratic_gradient_model with zero noise for deterministic variants.
ModelPtr gaussian_mean_model(const Vec& means, const Vec& std_devs);

/// Noisy gradient of the quadratic 1/2 (x-c_i)^T Q_i (x-c_i):
/// mean(i,x) = -Q_i (x - c_i), plus zero-mean Gaussian noise with covariance
/// R_i (symmetric PSD; Q_i must be symmetric positive definite).
ModelPtr quadratic_gradient_model(std::vector<Vec> centers, std::vector<Mat> curvatures,
                                  std::vector<Mat> noise_covs);

/// Monte Carlo check for models without trusted closed forms: empirical
/// mean/covariance of sample(agent, x) with standard errors.
struct MomentEstimate {
  Vec mean;
  Vec mean_se;
  Mat cov;
  Mat cov_se;
  int draws = 0;
};

MomentEstimate estimate_moments(const ObservationModel& model, int agent, const Vec& x,
                                int draws, std::uint64_t seed);

// --- step-size policies ---

struct ConstantStep {
  double eps;  // >= 0; zero runs the pure gossip recursion
};
struct PerAgentConstantStep {
  double eps;
  Vec gains;  // v_i > 0, step of agent i is v_i * eps
};
struct TaperingStep {
  double a;  // eps_n = a / max(n, 1)
};
struct AsyncTaperingStep {
  double a;  // agent at its Gamma-th own update uses a / Gamma
};

using StepSizePolicy =
    std::variant<ConstantStep, PerAgentConstantStep, TaperingStep, AsyncTaperingStep>;

void validate(const StepSizePolicy& policy, int n_agents);

/// Step size for one agent update. global_n is the 1-based global iteration,
/// gamma_i the agent's own 1-based update ordinal (async policies).
double step_size(const StepSizePolicy& policy, std::int64_t global_n, int agent,
                 std::int64_t gamma_i);

}  // namespace bgdsa
