#include "mile/categorical_opt.hpp"

#include <chrono>
#include <stdexcept>

namespace mile {

FitResult stepwise_categorical_opt(const IdealLikelihoodProblem& problem,
                                   std::vector<int> labels0, int max_sweeps,
                                   CategoricalSweepStats* stats) {
  const auto start = std::chrono::steady_clock::now();
  const LatentSpace& space = problem.latent_space();
  if (!space.is_categorical()) {
    throw std::invalid_argument("stepwise_categorical_opt: categorical latent space required");
  }
  if (!problem.has_profile_theta()) {
    throw std::invalid_argument("stepwise_categorical_opt: problem must provide profile_theta");
  }
  const std::size_t n = space.dimension();
  const int k = space.n_categories();
  if (labels0.size() != n) {
    throw std::invalid_argument("stepwise_categorical_opt: label vector dimension mismatch");
  }

  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = static_cast<double>(labels0[i]);
  if (!space.contains(z)) {
    throw std::domain_error("stepwise_categorical_opt: initial labels out of range");
  }

  CategoricalSweepStats local;
  CategoricalSweepStats& st = stats != nullptr ? *stats : local;

  auto profiled_loglik = [&](const std::vector<double>& labels,
                             std::vector<double>* theta_out) -> double {
    auto prof = problem.profile_theta(labels);
    if (!prof.has_value()) return kInfeasibleLogLik;
    const double ll = problem.log_ideal_likelihood(*prof, labels);
    if (theta_out != nullptr) *theta_out = std::move(*prof);
    return is_feasible_loglik(ll) ? ll : kInfeasibleLogLik;
  };

  std::vector<double> theta;
  double current = profiled_loglik(z, &theta);

  bool converged = false;
  while (st.sweeps < max_sweeps) {
    ++st.sweeps;
    bool improved = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (int label = 0; label < k; ++label) {
        if (label == static_cast<int>(z[i])) continue;
        ++st.candidates_tried;
        const double kept = z[i];
        z[i] = static_cast<double>(label);
        std::vector<double> cand_theta;
        const double cand = profiled_loglik(z, &cand_theta);
        if (!is_feasible_loglik(cand)) ++st.infeasible_candidates;
        if (cand > current) {
          current = cand;
          theta = std::move(cand_theta);
          ++st.moves_accepted;
          improved = true;
        } else {
          z[i] = kept;
        }
      }
    }
    if (!improved) {
      converged = true;
      break;
    }
  }

  if (!is_feasible_loglik(current)) {
    throw std::runtime_error("stepwise_categorical_opt: no feasible labeling encountered");
  }

  FitResult out{ParameterVector(theta, problem.param_domain_ptr()),
                LatentVector(z, problem.latent_space_ptr()),
                current,
                st.sweeps,
                converged,
                0.0};
  out.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace mile
