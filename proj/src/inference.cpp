#include "mile/inference.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace mile {

namespace {

using Matrix = Eigen::MatrixXd;
using Eigen::Map;

double eval_or_throw(const IdealLikelihoodProblem& problem, std::span<const double> theta,
                     std::span<const double> z) {
  const double ll = problem.log_ideal_likelihood(theta, z);
  if (!is_feasible_loglik(ll)) {
    throw std::runtime_error(
        "observed_information: log-likelihood not finite at a finite-difference "
        "evaluation point; move the estimate away from the domain boundary");
  }
  return ll;
}

}  // namespace

ObservedInformation observed_information(const IdealLikelihoodProblem& problem,
                                         std::span<const double> theta,
                                         std::span<const double> z,
                                         const FdHessianOptions& opts) {
  const std::size_t p = theta.size();
  const std::size_t q = z.size();
  const std::size_t n = p + q;

  // Work on the concatenated point; coordinate k < p is a parameter.
  std::vector<double> x(n);
  std::copy(theta.begin(), theta.end(), x.begin());
  std::copy(z.begin(), z.end(), x.begin() + static_cast<std::ptrdiff_t>(p));

  std::vector<double> h(n);
  for (std::size_t k = 0; k < n; ++k) {
    h[k] = opts.step_scale * std::max(1.0, std::abs(x[k]));
  }

  auto eval_at = [&](const std::vector<double>& pt) {
    return eval_or_throw(problem, std::span<const double>(pt.data(), p),
                         std::span<const double>(pt.data() + p, q));
  };

  const double ll0 = eval_at(x);

  // ll(x +/- h_k e_k), reused by both the diagonal and the cross terms.
  std::vector<double> f_plus(n);
  std::vector<double> f_minus(n);
  {
    std::vector<double> pt = x;
    for (std::size_t k = 0; k < n; ++k) {
      const double save = pt[k];
      pt[k] = save + h[k];
      f_plus[k] = eval_at(pt);
      pt[k] = save - h[k];
      f_minus[k] = eval_at(pt);
      pt[k] = save;
    }
  }

  Matrix hess(n, n);
  {
    std::vector<double> pt = x;
    for (std::size_t k = 0; k < n; ++k) {
      hess(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) =
          (f_plus[k] - 2.0 * ll0 + f_minus[k]) / (h[k] * h[k]);
      for (std::size_t l = k + 1; l < n; ++l) {
        const double sk = pt[k];
        const double sl = pt[l];
        pt[k] = sk + h[k];
        pt[l] = sl + h[l];
        const double fpp = eval_at(pt);
        pt[l] = sl - h[l];
        const double fpm = eval_at(pt);
        pt[k] = sk - h[k];
        const double fmm = eval_at(pt);
        pt[l] = sl + h[l];
        const double fmp = eval_at(pt);
        pt[k] = sk;
        pt[l] = sl;
        const double v = (fpp - fpm - fmp + fmm) / (4.0 * h[k] * h[l]);
        hess(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = v;
        hess(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) = v;
      }
    }
  }

  ObservedInformation info;
  info.p = p;
  info.q = q;
  info.i11.resize(p * p);
  info.i12.resize(p * q);
  info.i22.resize(q * q);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      info.i11[i * p + j] = -hess(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    for (std::size_t j = 0; j < q; ++j) {
      info.i12[i * q + j] =
          -hess(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p + j));
    }
  }
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t j = 0; j < q; ++j) {
      info.i22[i * q + j] =
          -hess(static_cast<Eigen::Index>(p + i), static_cast<Eigen::Index>(p + j));
    }
  }

  // Stationarity diagnostic from whatever analytic gradients exist; fall
  // back to the already-computed central differences otherwise.
  double gmax = 0.0;
  std::vector<double> grad(n);
  for (std::size_t k = 0; k < n; ++k) {
    grad[k] = (f_plus[k] - f_minus[k]) / (2.0 * h[k]);
  }
  if (problem.has_grad_theta()) {
    const std::vector<double> gt = problem.grad_theta(theta, z);
    std::copy(gt.begin(), gt.end(), grad.begin());
  }
  if (problem.has_grad_z()) {
    const std::vector<double> gz = problem.grad_z(theta, z);
    std::copy(gz.begin(), gz.end(), grad.begin() + static_cast<std::ptrdiff_t>(p));
  }
  for (std::size_t k = 0; k < n; ++k) {
    gmax = std::max(gmax, std::abs(grad[k]));
  }
  info.scaled_grad_norm = gmax / (1.0 + std::abs(ll0));
  info.stationary = info.scaled_grad_norm <= opts.stationarity_tol;
  return info;
}

std::vector<double> conditional_param_cov(const ObservedInformation& info) {
  const auto p = static_cast<Eigen::Index>(info.p);
  const auto q = static_cast<Eigen::Index>(info.q);
  Map<const Matrix> i11(info.i11.data(), p, p);
  Map<const Matrix> i12t(info.i12.data(), q, p);  // row-major p x q == col-major q x p
  Map<const Matrix> i22(info.i22.data(), q, q);

  Matrix schur;
  if (q == 0) {
    schur = i11;
  } else {
    Eigen::LLT<Matrix> llt22(i22);
    if (llt22.info() != Eigen::Success) {
      throw std::runtime_error(
          "conditional_param_cov: latent information block is not positive definite");
    }
    // i12t holds I12^T, so solve(i12t) = I22^{-1} I12^T.
    schur = i11 - i12t.transpose() * llt22.solve(Matrix(i12t));
  }
  Eigen::LLT<Matrix> llt(schur);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(
        "conditional_param_cov: Schur complement is not positive definite");
  }
  Matrix cov = llt.solve(Matrix::Identity(p, p));
  std::vector<double> out(info.p * info.p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      out[static_cast<std::size_t>(i) * info.p + static_cast<std::size_t>(j)] = cov(i, j);
    }
  }
  return out;
}

std::vector<double> given_z_param_cov(const ObservedInformation& info) {
  const auto p = static_cast<Eigen::Index>(info.p);
  Map<const Matrix> i11(info.i11.data(), p, p);
  const Matrix dense = i11;
  Eigen::LLT<Matrix> llt(dense);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(
        "given_z_param_cov: parameter information block is not positive definite");
  }
  Matrix cov = llt.solve(Matrix::Identity(p, p));
  std::vector<double> out(info.p * info.p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      out[static_cast<std::size_t>(i) * info.p + static_cast<std::size_t>(j)] = cov(i, j);
    }
  }
  return out;
}

bool covariance_dominates(std::span<const double> a, std::span<const double> b, std::size_t p,
                          double ridge) {
  if (a.size() != p * p || b.size() != p * p) {
    throw std::invalid_argument("covariance_dominates: matrix size mismatch");
  }
  Matrix d(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          a[i * p + j] - b[i * p + j];
    }
  }
  // Symmetrize before the eigen-decomposition; inputs come from separate
  // numeric pipelines.
  Matrix sym = 0.5 * (d + d.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("covariance_dominates: eigendecomposition failed");
  }
  return es.eigenvalues().minCoeff() >= -ridge;
}

std::vector<double> jackknife_cov(
    const GroupedDataset& data,
    const std::function<std::vector<double>(const GroupedDataset&, std::span<const double>)>&
        refit,
    std::span<const double> theta_full) {
  const std::size_t n = data.n_individuals();
  if (n < 2) {
    throw std::invalid_argument("jackknife_cov: need at least two individuals");
  }
  const std::size_t p = theta_full.size();

  std::vector<std::vector<double>> leave_one(n);
  for (std::size_t i = 0; i < n; ++i) {
    GroupedDataset reduced = data.without_individual(i);
    leave_one[i] = refit(reduced, theta_full);
    if (leave_one[i].size() != p) {
      throw std::runtime_error("jackknife_cov: refit returned wrong parameter dimension");
    }
  }

  std::vector<double> mean(p, 0.0);
  for (const auto& est : leave_one) {
    for (std::size_t k = 0; k < p; ++k) mean[k] += est[k];
  }
  for (std::size_t k = 0; k < p; ++k) mean[k] /= static_cast<double>(n);

  std::vector<double> cov(p * p, 0.0);
  for (const auto& est : leave_one) {
    for (std::size_t a = 0; a < p; ++a) {
      const double da = est[a] - mean[a];
      for (std::size_t b = 0; b < p; ++b) {
        cov[a * p + b] += da * (est[b] - mean[b]);
      }
    }
  }
  const double scale = static_cast<double>(n - 1) / static_cast<double>(n);
  for (auto& v : cov) v *= scale;
  return cov;
}

}  // namespace mile
