#include "bgdsa/models.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace bgdsa {

namespace {

void check_agent(int agent, int n) {
  if (agent < 0 || agent >= n)
    throw std::invalid_argument("observation model: agent " + std::to_string(agent) +
                                " out of range");
}

void check_dim(const Vec& x, int p, const char* what) {
  if (x.size() != p)
    throw std::invalid_argument(std::string(what) + ": state has dimension " +
                                std::to_string(x.size()) + ", model expects " + std::to_string(p));
}

class GaussianMeanModel final : public ObservationModel {
 public:
  GaussianMeanModel(Vec means, Vec std_devs)
      : means_(std::move(means)), std_devs_(std::move(std_devs)) {
    if (means_.size() != std_devs_.size())
      throw std::invalid_argument("gaussian mean model: means and std_devs sizes differ");
    if (means_.size() == 0)
      throw std::invalid_argument("gaussian mean model: need at least one agent");
    for (int i = 0; i < std_devs_.size(); ++i)
      if (!(std_devs_[i] > 0.0))
        throw std::invalid_argument("gaussian mean model: std_dev of agent " +
                                    std::to_string(i + 1) + " must be positive");
  }

  int n_agents() const override { return static_cast<int>(means_.size()); }
  int dim() const override { return 1; }

  Vec sample(int agent, const Vec& x, Rng& rng) const override {
    check_agent(agent, n_agents());
    check_dim(x, 1, "gaussian mean model");
    Vec out(1);
    out[0] = means_[agent] + std_devs_[agent] * normal01(rng) - x[0];
    return out;
  }

  Vec mean(int agent, const Vec& x) const override {
    check_agent(agent, n_agents());
    check_dim(x, 1, "gaussian mean model");
    Vec out(1);
    out[0] = means_[agent] - x[0];
    return out;
  }

  Mat noise_cov(int agent, const Vec&) const override {
    check_agent(agent, n_agents());
    Mat out(1, 1);
    out(0, 0) = std_devs_[agent] * std_devs_[agent];
    return out;
  }

  std::optional<Mat> mean_jacobian(int agent, const Vec&) const override {
    check_agent(agent, n_agents());
    return Mat::Constant(1, 1, -1.0);
  }

 private:
  Vec means_, std_devs_;
};

class QuadraticGradientModel final : public ObservationModel {
 public:
  QuadraticGradientModel(std::vector<Vec> centers, std::vector<Mat> curvatures,
                         std::vector<Mat> noise_covs)
      : centers_(std::move(centers)),
        curvatures_(std::move(curvatures)),
        noise_covs_(std::move(noise_covs)) {
    if (centers_.empty()) throw std::invalid_argument("quadratic model: need at least one agent");
    if (curvatures_.size() != centers_.size() || noise_covs_.size() != centers_.size())
      throw std::invalid_argument("quadratic model: per-agent array sizes differ");
    dim_ = static_cast<int>(centers_[0].size());
    noise_sqrts_.reserve(centers_.size());
    for (std::size_t i = 0; i < centers_.size(); ++i) {
      const std::string who = "agent " + std::to_string(i + 1);
      if (centers_[i].size() != dim_)
        throw std::invalid_argument("quadratic model: center of " + who + " has wrong dimension");
      check_spd(curvatures_[i], who);
      noise_sqrts_.push_back(psd_sqrt(noise_covs_[i], who));
    }
  }

  int n_agents() const override { return static_cast<int>(centers_.size()); }
  int dim() const override { return dim_; }

  Vec sample(int agent, const Vec& x, Rng& rng) const override {
    Vec out = mean(agent, x);
    Vec z(dim_);
    for (int k = 0; k < dim_; ++k) z[k] = normal01(rng);
    out += noise_sqrts_[agent] * z;
    return out;
  }

  Vec mean(int agent, const Vec& x) const override {
    check_agent(agent, n_agents());
    check_dim(x, dim_, "quadratic model");
    return -curvatures_[agent] * (x - centers_[agent]);
  }

  Mat noise_cov(int agent, const Vec&) const override {
    check_agent(agent, n_agents());
    return noise_covs_[agent];
  }

  std::optional<Mat> mean_jacobian(int agent, const Vec&) const override {
    check_agent(agent, n_agents());
    return -curvatures_[agent];
  }

 private:
  static void check_spd(const Mat& q, const std::string& who) {
    if (q.rows() != q.cols()) throw std::invalid_argument("quadratic model: curvature of " + who +
                                                          " is not square");
    if (!q.isApprox(q.transpose(), 1e-10))
      throw std::invalid_argument("quadratic model: curvature of " + who + " is not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(q);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw std::invalid_argument("quadratic model: curvature of " + who +
                                  " is not positive definite");
  }

  // Symmetric square root, tolerating PSD-singular covariances (e.g. zero
  // noise); small negative eigenvalues beyond roundoff are rejected.
  static Mat psd_sqrt(const Mat& r, const std::string& who) {
    if (r.rows() != r.cols() || !r.isApprox(r.transpose(), 1e-10))
      throw std::invalid_argument("quadratic model: noise covariance of " + who +
                                  " is not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(r);
    Vec ev = es.eigenvalues();
    const double tol = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    for (int k = 0; k < ev.size(); ++k) {
      if (ev[k] < -tol)
        throw std::invalid_argument("quadratic model: noise covariance of " + who +
                                    " is not positive semidefinite");
      ev[k] = std::sqrt(std::max(0.0, ev[k]));
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  }

  std::vector<Vec> centers_;
  std::vector<Mat> curvatures_;
  std::vector<Mat> noise_covs_;
  std::vector<Mat> noise_sqrts_;
  int dim_ = 0;
};

}  // namespace

ModelPtr gaussian_mean_model(const Vec& means, const Vec& std_devs) {
  return std::make_shared<GaussianMeanModel>(means, std_devs);
}

ModelPtr quadratic_gradient_model(std::vector<Vec> centers, std::vector<Mat> curvatures,
                                  std::vector<Mat> noise_covs) {
  return std::make_shared<QuadraticGradientModel>(std::move(centers), std::move(curvatures),
                                                  std::move(noise_covs));
}

MomentEstimate estimate_moments(const ObservationModel& model, int agent, const Vec& x, int draws,
                                std::uint64_t seed) {
  if (draws < 2) throw std::invalid_argument("estimate_moments: need at least 2 draws");
  const int p = model.dim();
  Rng rng = make_rng(seed, 0);
  Mat samples(draws, p);
  for (int k = 0; k < draws; ++k) samples.row(k) = model.sample(agent, x, rng).transpose();

  MomentEstimate est;
  est.draws = draws;
  est.mean = samples.colwise().mean().transpose();
  Mat centered = samples.rowwise() - est.mean.transpose();
  est.cov = centered.transpose() * centered / (draws - 1.0);
  est.mean_se = (est.cov.diagonal() / draws).cwiseSqrt();
  // SE of each covariance entry from the sample variance of the per-draw
  // cross products.
  est.cov_se = Mat::Zero(p, p);
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) {
      Vec prod = centered.col(a).cwiseProduct(centered.col(b));
      const double mu = prod.mean();
      est.cov_se(a, b) = std::sqrt((prod.array() - mu).square().sum() /
                                   (draws - 1.0) / draws);
    }
  return est;
}

void validate(const StepSizePolicy& policy, int n_agents) {
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ConstantStep>) {
          if (!(p.eps >= 0.0)) throw std::invalid_argument("step policy: eps must be >= 0");
        } else if constexpr (std::is_same_v<T, PerAgentConstantStep>) {
          if (!(p.eps > 0.0)) throw std::invalid_argument("step policy: eps must be positive");
          if (p.gains.size() != n_agents)
            throw std::invalid_argument("step policy: gains size must equal the agent count");
          for (int i = 0; i < p.gains.size(); ++i)
            if (!(p.gains[i] > 0.0))
              throw std::invalid_argument("step policy: gain of agent " + std::to_string(i + 1) +
                                          " must be positive");
        } else {
          if (!(p.a > 0.0)) throw std::invalid_argument("step policy: a must be positive");
        }
      },
      policy);
}

double step_size(const StepSizePolicy& policy, std::int64_t global_n, int agent,
                 std::int64_t gamma_i) {
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ConstantStep>) {
          return p.eps;
        } else if constexpr (std::is_same_v<T, PerAgentConstantStep>) {
          return p.eps * p.gains[agent];
        } else if constexpr (std::is_same_v<T, TaperingStep>) {
          return p.a / static_cast<double>(std::max<std::int64_t>(global_n, 1));
        } else {
          return p.a / static_cast<double>(std::max<std::int64_t>(gamma_i, 1));
        }
      },
      policy);
}

}  // namespace bgdsa
