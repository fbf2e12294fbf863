#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mile/types.hpp"

namespace mile {

class SeededGenerator;

// A joint log-likelihood l(theta, Z) to be maximized over parameters and
// latent coordinates simultaneously. Implementations bind their dataset at
// construction and must be safe to evaluate concurrently. Evaluations
// outside the domain return kInfeasibleLogLik, never NaN.
class IdealLikelihoodProblem {
 public:
  virtual ~IdealLikelihoodProblem() = default;

  virtual std::shared_ptr<const DomainSpec> param_domain_ptr() const = 0;
  virtual std::shared_ptr<const LatentSpace> latent_space_ptr() const = 0;
  const DomainSpec& param_domain() const { return *param_domain_ptr(); }
  const LatentSpace& latent_space() const { return *latent_space_ptr(); }

  virtual double log_ideal_likelihood(std::span<const double> theta,
                                      std::span<const double> z) const = 0;

  virtual bool has_grad_theta() const { return false; }
  virtual std::vector<double> grad_theta(std::span<const double> theta,
                                         std::span<const double> z) const;

  virtual bool has_grad_z() const { return false; }
  virtual std::vector<double> grad_z(std::span<const double> theta,
                                     std::span<const double> z) const;

  // Exact argmax over theta with Z held fixed; nullopt when the profile
  // does not exist (degenerate configuration).
  virtual bool has_profile_theta() const { return false; }
  virtual std::optional<std::vector<double>> profile_theta(std::span<const double> z) const;

  // Exact (or numerically resolved) argmax over Z with theta held fixed.
  virtual bool has_update_z() const { return false; }
  virtual std::vector<double> update_z(std::span<const double> theta,
                                       std::span<const double> z_current) const;

  // Boxes the optimizers may draw random interior points from. Defaults to
  // the domain itself; override when a bound is infinite.
  virtual std::vector<Interval> param_sampling_box() const;
  virtual std::vector<Interval> latent_sampling_box() const;
};

struct ValidationCheck {
  std::string name;      // e.g. "grad_theta[0] vs finite difference"
  std::string location;  // point at which the check ran
  double magnitude = 0.0;
  bool passed = false;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_passed() const;
  std::size_t failure_count() const;
};

// Compares analytic gradients against central finite differences and
// profile_theta output against random competitor parameters, at `points`
// random interior points. Collects failures instead of throwing.
ValidationReport validate_problem(const IdealLikelihoodProblem& problem, SeededGenerator& gen,
                                  int points = 100, double grad_rel_tol = 1e-6,
                                  double profile_slack = 1e-8);

}  // namespace mile
