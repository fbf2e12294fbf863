#pragma once

#include <functional>
#include <span>
#include <vector>

#include "mile/problem.hpp"
#include "mile/types.hpp"

namespace mile {

struct FdHessianOptions {
  // Per-coordinate step: step_scale * max(1, |x_k|). Default is
  // cbrt(machine epsilon).
  double step_scale = 6.0554544523933429e-6;
  // Threshold on the scaled gradient max-norm above which the evaluation
  // point is flagged as non-stationary.
  double stationarity_tol = 1e-4;
};

// Negative Hessian of the joint log-likelihood at (theta, z), estimated by
// central finite differences and symmetrized, partitioned into parameter /
// latent blocks. Throws std::runtime_error when an evaluation goes
// infeasible (point too close to a domain edge).
struct ObservedInformation {
  std::size_t p = 0;  // parameter block size
  std::size_t q = 0;  // latent block size
  std::vector<double> i11;  // p x p, row-major
  std::vector<double> i12;  // p x q
  std::vector<double> i22;  // q x q
  double scaled_grad_norm = 0.0;  // max-norm of available gradients / (1 + |ll|)
  bool stationary = true;
};

ObservedInformation observed_information(const IdealLikelihoodProblem& problem,
                                         std::span<const double> theta,
                                         std::span<const double> z,
                                         const FdHessianOptions& opts = {});

// Parameter covariance accounting for latent estimation:
// (I11 - I12 I22^{-1} I12^T)^{-1}. Throws std::runtime_error when I22 or
// the Schur complement is not positive definite.
std::vector<double> conditional_param_cov(const ObservedInformation& info);

// Parameter covariance treating the latent block as known: I11^{-1}.
std::vector<double> given_z_param_cov(const ObservedInformation& info);

// True when A - B + ridge*I is positive semidefinite (A, B symmetric,
// p x p row-major).
bool covariance_dominates(std::span<const double> a, std::span<const double> b, std::size_t p,
                          double ridge = 1e-10);

// Delete-one-individual jackknife covariance of a parameter estimate.
// `refit` maps (reduced dataset, full-data estimate as warm start) to the
// reduced-data estimate. Output is p x p row-major, scaled by (N-1)/N.
std::vector<double> jackknife_cov(
    const GroupedDataset& data,
    const std::function<std::vector<double>(const GroupedDataset&, std::span<const double>)>&
        refit,
    std::span<const double> theta_full);

}  // namespace mile
