#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "mile/bca.hpp"
#include "mile/problem.hpp"
#include "mile/rng.hpp"
#include "mile/types.hpp"

namespace mile::models {

// Gaussian observations with an exponentially decaying mean,
// x_ij ~ N(exp(-r z_i), 1), and a log-Cauchy(mu, 1) prior on each latent
// z_i > 0. Parameter block is the location mu; r is a fixed constant.
class LogCauchy final : public IdealLikelihoodProblem {
 public:
  explicit LogCauchy(const GroupedDataset& data, double decay_rate = 0.05);

  std::shared_ptr<const DomainSpec> param_domain_ptr() const override { return domain_; }
  std::shared_ptr<const LatentSpace> latent_space_ptr() const override { return space_; }

  double log_ideal_likelihood(std::span<const double> theta,
                              std::span<const double> z) const override;
  bool has_grad_theta() const override { return true; }
  std::vector<double> grad_theta(std::span<const double> theta,
                                 std::span<const double> z) const override;
  bool has_grad_z() const override { return true; }
  std::vector<double> grad_z(std::span<const double> theta,
                             std::span<const double> z) const override;
  bool has_profile_theta() const override { return true; }
  std::optional<std::vector<double>> profile_theta(std::span<const double> z) const override;
  bool has_update_z() const override { return true; }
  std::vector<double> update_z(std::span<const double> theta,
                               std::span<const double> z_current) const override;

  std::vector<Interval> param_sampling_box() const override { return {{-2.0, 5.0}}; }
  std::vector<Interval> latent_sampling_box() const override;

  double decay_rate() const { return r_; }
  std::size_t n() const { return sum_.size(); }
  std::size_t m() const { return m_; }

  struct LatentUpdate {
    std::vector<double> z;
    // Individuals whose per-coordinate objective had no interior
    // stationary maximum; their coordinate was pushed to the low edge of
    // the search grid.
    std::vector<std::size_t> edge_individuals;
  };
  // Coordinate-wise exact maximization over z_i > 0 given mu: stationary
  // points are bracketed on a 16-node log-spaced grid over (1e-4, 200]
  // and resolved by safeguarded Newton; among the local maxima (plus the
  // current value) the best by per-individual log-likelihood wins.
  LatentUpdate update_latents(double mu, std::span<const double> z_current) const;

  struct MileReport {
    FitResult fit;
    std::vector<std::size_t> edge_individuals;  // union over iterations
  };
  MileReport fit(const BcaConfig& cfg = {}, BcaTrace* trace = nullptr) const;

  struct MomResult {
    double mu = 0.0;
    std::vector<double> z;                  // NaN for excluded individuals
    std::vector<std::size_t> excluded;      // individuals with mean outside (0,1)
  };
  // Moment inversion: z_i = -ln(x-bar_i)/r for individuals whose sample
  // mean lies in (0,1); mu = median of ln z_i over the rest. Throws
  // std::runtime_error when every individual is excluded.
  MomResult mom_fit() const;

  static std::pair<GroupedDataset, std::vector<double>> simulate(double mu, std::size_t n,
                                                                 std::size_t m, double decay_rate,
                                                                 SeededGenerator& gen);

 private:
  double per_individual_loglik(std::size_t i, double mu, double z) const;
  double per_individual_score(std::size_t i, double mu, double z) const;
  double per_individual_score_deriv(std::size_t i, double mu, double z) const;
  double starting_mu() const;

  double r_ = 0.05;
  std::size_t m_ = 0;
  std::vector<double> sum_;     // per-individual sum of observations
  std::vector<double> sumsq_;   // per-individual sum of squares
  std::shared_ptr<const DomainSpec> domain_;
  std::shared_ptr<const LatentSpace> space_;
};

}  // namespace mile::models
