#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "mile/cube_search.hpp"
#include "mile/problem.hpp"
#include "mile/rng.hpp"
#include "mile/types.hpp"

namespace mile::models {

// Poisson counts on a shared time grid with a per-individual change point
// z_i: the log rate is b1 (t - z_i) + a before the break and
// b2 (t - z_i) + a after it (continuous at t = z_i). Break locations are
// scaled Beta: z_i / T ~ Beta(alpha, beta). Parameter layout:
//   theta = [alpha, beta, b1, b2, a].
class SegmentedPoisson final : public IdealLikelihoodProblem {
 public:
  explicit SegmentedPoisson(const GroupedDataset& data);

  std::shared_ptr<const DomainSpec> param_domain_ptr() const override { return domain_; }
  std::shared_ptr<const LatentSpace> latent_space_ptr() const override { return space_; }

  double log_ideal_likelihood(std::span<const double> theta,
                              std::span<const double> z) const override;
  bool has_grad_theta() const override { return true; }
  std::vector<double> grad_theta(std::span<const double> theta,
                                 std::span<const double> z) const override;
  // Piecewise derivative; kinks sit on the time grid, so finite-difference
  // checks must keep z away from grid points.
  bool has_grad_z() const override { return true; }
  std::vector<double> grad_z(std::span<const double> theta,
                             std::span<const double> z) const override;
  bool has_profile_theta() const override { return true; }
  std::optional<std::vector<double>> profile_theta(std::span<const double> z) const override;

  std::vector<Interval> param_sampling_box() const override {
    return {{0.8, 12.0}, {0.8, 12.0}, {-2.0, 2.0}, {-2.0, 2.0}, {-1.0, 2.0}};
  }
  std::vector<Interval> latent_sampling_box() const override;

  std::size_t n() const { return n_; }
  std::size_t m() const { return t_.size(); }
  double horizon() const { return horizon_; }

  struct ProfileDiagnostics {
    bool seg1_empty = false;  // no observation before any break; b1 kept as-is
    bool seg2_empty = false;
    bool rates_converged = false;
    bool shape_solved = false;
  };
  std::optional<std::vector<double>> profile_with_diagnostics(std::span<const double> z,
                                                              ProfileDiagnostics* diag) const;

  // Joint maximization: cube search over the break vector with the
  // parameter block profiled out per candidate.
  FitResult fit_mile(SeededGenerator& gen, const CubeSearchConfig& cfg = {},
                     CubeSearchTrace* trace = nullptr) const;

  static std::pair<GroupedDataset, std::vector<double>> simulate(double alpha, double beta,
                                                                 double b1, double b2, double a,
                                                                 std::size_t n, std::size_t m,
                                                                 double horizon,
                                                                 SeededGenerator& gen);

 private:
  // First grid index with t >= z (the segment split).
  std::size_t split_index(double z) const;

  // Accumulates sum(rate), sum(rate*dt), sum(rate*dt^2) over grid slots
  // [from, to) with rate = exp(b*(t_j - z) + a). Uniform grids take a
  // multiply-only geometric recurrence instead of per-slot exp.
  void rate_sums(double b, double a, double z, std::size_t from, std::size_t to, double& sr,
                 double& srdt, double& srdt2) const;

  std::size_t n_ = 0;
  std::vector<double> t_;
  double horizon_ = 1.0;
  bool uniform_grid_ = false;
  double grid_step_ = 0.0;
  std::vector<double> x_;    // row-major counts
  std::vector<double> px_;   // per-individual prefix sums of x, m+1 each
  std::vector<double> pxt_;  // per-individual prefix sums of x*t, m+1 each
  std::shared_ptr<const DomainSpec> domain_;
  std::shared_ptr<const LatentSpace> space_;
};

}  // namespace mile::models
