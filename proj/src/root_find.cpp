#include "mile/root_find.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mile {

namespace {

double safeguarded_root(const std::function<double(double)>& f,
                        const std::function<double(double)>* df, ScalarRootConfig cfg) {
  double lo = cfg.lower, hi = cfg.upper;
  if (!(lo < hi)) throw std::invalid_argument("solve_scalar_root: empty bracket");
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (std::isnan(flo) || std::isnan(fhi) || flo * fhi > 0.0) {
    throw std::invalid_argument("solve_scalar_root: no sign change over bracket");
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < cfg.max_iterations; ++it) {
    double fx = f(x);
    if (std::fabs(fx) <= cfg.tolerance || hi - lo <= cfg.tolerance) return x;
    if (std::isnan(fx)) {
      x = 0.5 * (lo + x);  // retreat toward the finite lower end
      continue;
    }
    // Maintain the bracket.
    if ((fx < 0.0) == (flo < 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
      fhi = fx;
    }
    double next = std::numeric_limits<double>::quiet_NaN();
    if (df != nullptr) {
      const double d = (*df)(x);
      if (std::isfinite(d) && d != 0.0) {
        const double candidate = x - fx / d;
        if (candidate > lo && candidate < hi) next = candidate;
      }
    }
    if (std::isnan(next)) next = 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

}  // namespace

double solve_scalar_root(const std::function<double(double)>& f,
                         const std::function<double(double)>& df, ScalarRootConfig cfg) {
  return safeguarded_root(f, &df, cfg);
}

double solve_scalar_root(const std::function<double(double)>& f, ScalarRootConfig cfg) {
  return safeguarded_root(f, nullptr, cfg);
}

std::optional<std::pair<double, double>> expand_bracket(const std::function<double(double)>& f,
                                                        double lo, double hi, double lo_limit,
                                                        double hi_limit, int max_expansions) {
  if (!(lo < hi)) throw std::invalid_argument("expand_bracket: empty seed interval");
  double flo = f(lo), fhi = f(hi);
  for (int i = 0; i < max_expansions; ++i) {
    if (!std::isnan(flo) && !std::isnan(fhi) && flo * fhi <= 0.0) return std::make_pair(lo, hi);
    bool moved = false;
    if (lo > lo_limit) {
      lo = std::max(lo_limit, lo / 4.0);
      flo = f(lo);
      moved = true;
    }
    if (hi < hi_limit) {
      hi = std::min(hi_limit, hi * 4.0);
      fhi = f(hi);
      moved = true;
    }
    if (!moved) break;
  }
  if (!std::isnan(flo) && !std::isnan(fhi) && flo * fhi <= 0.0) return std::make_pair(lo, hi);
  return std::nullopt;
}

std::vector<double> damped_newton(
    const std::function<std::vector<double>(const std::vector<double>&)>& f,
    const std::function<std::vector<double>(const std::vector<double>&)>& jac,
    std::vector<double> x0, DampedNewtonConfig cfg) {
  const std::size_t n = x0.size();
  auto residual_norm = [](const std::vector<double>& r) {
    double m = 0.0;
    for (double v : r) {
      if (std::isnan(v)) return std::numeric_limits<double>::infinity();
      m = std::max(m, std::fabs(v));
    }
    return m;
  };

  std::vector<double> x = std::move(x0);
  std::vector<double> fx = f(x);
  if (fx.size() != n) throw std::invalid_argument("damped_newton: residual dimension mismatch");
  double norm = residual_norm(fx);

  for (int it = 0; it < cfg.max_iterations; ++it) {
    if (norm <= cfg.tolerance) return x;
    const std::vector<double> j = jac(x);
    if (j.size() != n * n) throw std::invalid_argument("damped_newton: jacobian shape mismatch");
    Eigen::MatrixXd J(n, n);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) J(r, c) = j[r * n + c];
    }
    Eigen::VectorXd rhs(n);
    for (std::size_t r = 0; r < n; ++r) rhs(r) = -fx[r];
    Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
    if (!lu.isInvertible()) throw std::runtime_error("damped_newton: singular jacobian");
    Eigen::VectorXd step = lu.solve(rhs);

    double scale = 1.0;
    bool accepted = false;
    for (int h = 0; h <= cfg.max_halvings; ++h) {
      std::vector<double> trial(n);
      for (std::size_t r = 0; r < n; ++r) trial[r] = x[r] + scale * step(r);
      std::vector<double> ft = f(trial);
      const double tnorm = residual_norm(ft);
      if (tnorm < norm) {
        x = std::move(trial);
        fx = std::move(ft);
        norm = tnorm;
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) {
      throw std::runtime_error("damped_newton: step rejected after max halvings (residual " +
                               std::to_string(norm) + ")");
    }
  }
  if (norm <= cfg.tolerance) return x;
  throw std::runtime_error("damped_newton: no convergence after max iterations (residual " +
                           std::to_string(norm) + ")");
}

}  // namespace mile
