#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bgdsa/gossip.hpp"

namespace bgdsa {

/// Target stationary vector for the mean gossip matrix. Entries must be
/// strictly positive and sum to 1 within 1e-12.
struct DesignTarget {
  Vec phi;
};

void validate(const DesignTarget& target);

/// Outcome of a design solve. When the linear system yields nonpositive
/// entries the target is infeasible; `offending` lists the nodes (0-based)
/// with nonpositive values as the certificate.
struct DesignResult {
  bool feasible = false;
  Vec values;           // clock probabilities p (Algorithm A) or
                        // broadcaster mixing weights gamma_i (Algorithm B)
  std::vector<int> offending;
  Vec achieved_phi;     // stationary vector recomputed from the design
  double residual = 0.0;  // || phi A_bar - phi ||_inf at the achieved phi
};

/// Algorithm A: mixing weights and reception probabilities fixed, solve the
/// stationarity system for clock probabilities p (one redundant equation is
/// replaced by 1^T p = 1). Verifies the result against the eigen-oracle:
/// stationary_vector(mean_matrix(.)) must match the target within 1e-8.
DesignResult algorithm_a(const Digraph& graph, const DesignTarget& target,
                         const Vec& mixing_weights, const Vec& reception_probs);

/// Algorithm B: clock probabilities fixed, solve for broadcaster-indexed
/// mixing weights (gamma_ij = gamma_i for every out-edge of i). The system
/// has a one-dimensional null space under strong connectivity; the positive
/// null vector is rescaled so max_i gamma_i = scale_max.
DesignResult algorithm_b(const Digraph& graph, const DesignTarget& target,
                         const Vec& clock_probs, const Vec& reception_probs,
                         double scale_max = 0.99);

/// Targets ODE weights directly: given desired w_i > 0 and fixed clock
/// probabilities, sets phi_k proportional to w_k / dbar_k (dbar from the
/// variant) and runs Algorithm B.
struct WeightDesign {
  DesignResult design;
  Vec phi_target;
  Vec d_bar;
};

WeightDesign design_for_weights(const Digraph& graph, const Vec& desired_weights,
                                const Vec& clock_probs, const Vec& reception_probs,
                                Variant variant, double scale_max = 0.99);

/// Minimizer of sum_i phi_i^2 dbar_i^2 ||R_i|| over the probability simplex:
/// phi*_i proportional to dbar_i^-2 ||R_i||^-1.
Vec optimal_phi_for_rate(const Vec& d_bar, const Vec& noise_norms);

/// The surrogate objective sum_i phi_i^2 dbar_i^2 ||R_i|| minimized above.
double rate_criterion(const Vec& phi, const Vec& d_bar, const Vec& noise_norms);

}  // namespace bgdsa
