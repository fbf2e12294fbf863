#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "mile/bca.hpp"
#include "mile/problem.hpp"
#include "mile/rng.hpp"
#include "mile/types.hpp"

namespace mile::models {

// Binary observations x_ij ~ Bernoulli(z_i) with a symmetric Beta(theta,
// theta) prior on each individual's success probability. Parameter block
// is the single concentration theta > 0; latent block is Z in (0,1)^N.
class BetaBernoulli final : public IdealLikelihoodProblem {
 public:
  explicit BetaBernoulli(const GroupedDataset& data);

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

  std::vector<Interval> param_sampling_box() const override { return {{0.5, 20.0}}; }
  std::vector<Interval> latent_sampling_box() const override;

  // Per-coordinate maximizer (theta + s - 1) / (2 theta + M - 2), clamped
  // into (0, 1). Requires 2 theta + M - 2 > 0.
  static double zhat(double theta, double successes, std::size_t m);

  std::size_t n() const { return s_.size(); }
  std::size_t m() const { return m_; }
  const std::vector<double>& successes() const { return s_; }

  // Joint maximization by coordinate ascent from theta0.
  FitResult fit(const BcaConfig& cfg = {}, double theta0 = 2.0, BcaTrace* trace = nullptr) const;

  // Log of the integrated (Beta-Binomial) likelihood, up to a constant.
  double marginal_loglik(double theta) const;

  struct EmOptions {
    double theta0 = 2.0;
    double tolerance = 1e-8;
    int max_iterations = 500;
  };
  struct EmResult {
    double theta = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> marginal_trace;  // marginal loglik after each update
  };
  // Classical EM on the integrated likelihood; posterior for individual i
  // is Beta(theta + s_i, theta - s_i + M).
  EmResult em_fit(const EmOptions& opts) const;
  EmResult em_fit() const { return em_fit(EmOptions()); }

  static std::pair<GroupedDataset, std::vector<double>> simulate(double theta, std::size_t n,
                                                                 std::size_t m,
                                                                 SeededGenerator& gen);

 private:
  // Root of 2(psi(2t) - psi(t)) + c = 0; nullopt when c >= -2 ln 2 (the
  // likelihood then increases in theta without bound).
  std::optional<double> solve_concentration(double c) const;

  std::size_t m_ = 0;
  std::vector<double> s_;
  std::shared_ptr<const DomainSpec> domain_;
  std::shared_ptr<const LatentSpace> space_;
};

}  // namespace mile::models
