#pragma once

#include <vector>

#include "mile/problem.hpp"
#include "mile/types.hpp"

namespace mile {

struct BcaConfig {
  int max_outer_iterations = 500;
  double loglik_tolerance = 1e-8;
  // On the max-norm change of the joint (theta, Z) iterate.
  double param_tolerance = 1e-8;
};

// Log-likelihood after the initial point and after every accepted half
// step (Z step, then theta step, per outer iteration). Non-decreasing by
// construction.
struct BcaTrace {
  std::vector<double> half_step_loglik;
};

// Alternates an exact latent update with an exact parameter update until
// the log-likelihood or the iterate stalls. Uses the problem's update_z /
// profile_theta when present; otherwise falls back to coordinate-wise
// golden-section over the latent sampling box and damped Newton on
// grad_theta. The initial latent vector is clamped into the open domain
// first; an infeasible initial value raises std::invalid_argument.
FitResult block_coordinate_ascent(const IdealLikelihoodProblem& problem,
                                  std::vector<double> theta0, std::vector<double> z0,
                                  const BcaConfig& cfg = {}, BcaTrace* trace = nullptr);

}  // namespace mile
