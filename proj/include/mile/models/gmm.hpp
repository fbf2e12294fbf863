#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "mile/categorical_opt.hpp"
#include "mile/problem.hpp"
#include "mile/rng.hpp"
#include "mile/types.hpp"

namespace mile::models {

// Univariate K-component Gaussian mixture with the component membership
// of each observation as the latent block. Dataset must have exactly one
// observation per individual. Parameter layout:
//   theta = [mu_1..mu_K, var_1..var_K, pi_1..pi_K],
// with the weights required to sum to one (checked at evaluation).
class Gmm final : public IdealLikelihoodProblem {
 public:
  Gmm(const GroupedDataset& data, int k = 3);

  std::shared_ptr<const DomainSpec> param_domain_ptr() const override { return domain_; }
  std::shared_ptr<const LatentSpace> latent_space_ptr() const override { return space_; }

  double log_ideal_likelihood(std::span<const double> theta,
                              std::span<const double> z) const override;
  // Hard assignment maximizing each observation's component density.
  bool has_update_z() const override { return true; }
  std::vector<double> update_z(std::span<const double> theta,
                               std::span<const double> z_current) const override;
  // Per-labeling maximum likelihood: component means/variances (variance
  // floored at 1e-6) and weights = cluster shares. Labelings with an
  // empty or singleton cluster are infeasible.
  bool has_profile_theta() const override { return true; }
  std::optional<std::vector<double>> profile_theta(std::span<const double> z) const override;

  std::vector<Interval> param_sampling_box() const override;

  int k() const { return k_; }
  std::size_t n() const { return x_.size(); }
  const std::vector<double>& observations() const { return x_; }

  double marginal_loglik(std::span<const double> theta) const;

  struct EmOptions {
    double tolerance = 1e-8;
    int max_iterations = 500;
  };
  struct EmResult {
    std::vector<double> theta;
    std::vector<int> labels;  // argmax responsibility at the last step
    int iterations = 0;
    bool converged = false;
    std::vector<double> marginal_trace;
  };
  // Standard EM on the mixture likelihood. Means start at K random
  // distinct data points, variances at the pooled variance, weights
  // uniform.
  EmResult em_fit(SeededGenerator& gen, const EmOptions& opts) const;
  EmResult em_fit(SeededGenerator& gen) const { return em_fit(gen, EmOptions()); }

  struct MileReport {
    FitResult fit;
    EmResult em;  // the run that seeded the label sweep
    CategoricalSweepStats sweep;
  };
  // Label sweep (stepwise_categorical_opt) started from the EM hard
  // assignment; never scores below it.
  MileReport fit_mile(SeededGenerator& gen, const EmOptions& em_opts, int max_sweeps = 100) const;
  MileReport fit_mile(SeededGenerator& gen) const { return fit_mile(gen, EmOptions()); }

  static std::pair<GroupedDataset, std::vector<double>> simulate(
      const std::vector<double>& means, const std::vector<double>& variances,
      const std::vector<double>& weights, std::size_t n, SeededGenerator& gen);

 private:
  int k_ = 0;
  std::vector<double> x_;
  std::shared_ptr<const DomainSpec> domain_;
  std::shared_ptr<const LatentSpace> space_;
};

// Share of agreeing labels under the best relabeling of `estimate`
// (maximum over all K! label permutations).
double label_accuracy(std::span<const double> estimate, std::span<const double> truth, int k);

// Reorders the components of a [mu, var, pi] block by ascending mean, so
// estimates from different runs line up column-wise.
std::vector<double> canonicalize_components(std::span<const double> theta, int k);

}  // namespace mile::models
