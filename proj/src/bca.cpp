#include "mile/bca.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mile/root_find.hpp"

namespace mile {

namespace {

// Golden-section maximum of g over [lo, hi], ~1e-10 relative interval.
double golden_max(const std::function<double(double)>& g, double lo, double hi) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double gc = g(c), gd = g(d);
  for (int it = 0; it < 200 && (b - a) > 1e-11 * (1.0 + std::fabs(a) + std::fabs(b)); ++it) {
    if (gc >= gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - kInvPhi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + kInvPhi * (b - a);
      gd = g(d);
    }
  }
  return 0.5 * (a + b);
}

std::vector<double> fallback_update_z(const IdealLikelihoodProblem& p,
                                      const std::vector<double>& theta, std::vector<double> z) {
  const auto box = p.latent_sampling_box();
  for (std::size_t i = 0; i < z.size(); ++i) {
    auto g = [&](double v) {
      const double old = z[i];
      z[i] = v;
      const double ll = p.log_ideal_likelihood(theta, z);
      z[i] = old;
      return ll;
    };
    const double cand = golden_max(g, box[i].lower, box[i].upper);
    if (g(cand) > g(z[i])) z[i] = cand;
  }
  return z;
}

std::vector<double> fallback_profile_theta(const IdealLikelihoodProblem& p,
                                           std::vector<double> theta,
                                           const std::vector<double>& z) {
  const DomainSpec& dom = p.param_domain();
  const std::size_t n = theta.size();
  auto residual = [&](const std::vector<double>& t) -> std::vector<double> {
    if (!dom.contains(t)) {
      return std::vector<double>(n, std::numeric_limits<double>::infinity());
    }
    return p.grad_theta(t, z);
  };
  auto jacobian = [&](const std::vector<double>& t) {
    std::vector<double> J(n * n);
    std::vector<double> tp = t;
    for (std::size_t c = 0; c < n; ++c) {
      const double h = 6.0554544523933429e-6 * std::max(1.0, std::fabs(t[c]));
      tp[c] = t[c] + h;
      const auto up = p.grad_theta(tp, z);
      tp[c] = t[c] - h;
      const auto dn = p.grad_theta(tp, z);
      tp[c] = t[c];
      for (std::size_t r = 0; r < n; ++r) J[r * n + c] = (up[r] - dn[r]) / (2.0 * h);
    }
    return J;
  };
  DampedNewtonConfig cfg;
  cfg.tolerance = 1e-9;
  return damped_newton(residual, jacobian, std::move(theta), cfg);
}

}  // namespace

FitResult block_coordinate_ascent(const IdealLikelihoodProblem& problem,
                                  std::vector<double> theta0, std::vector<double> z0,
                                  const BcaConfig& cfg, BcaTrace* trace) {
  const auto start = std::chrono::steady_clock::now();
  auto domain = problem.param_domain_ptr();
  auto space = problem.latent_space_ptr();

  domain->check(theta0);
  if (z0.size() != space->dimension()) {
    throw std::invalid_argument("block_coordinate_ascent: latent dimension mismatch");
  }
  space->clamp(z0);

  const bool own_z_step = problem.has_update_z();
  const bool own_theta_step = problem.has_profile_theta();
  if (!own_z_step && space->is_categorical()) {
    throw std::invalid_argument(
        "block_coordinate_ascent: categorical latent space needs the problem's update_z");
  }
  if (!own_theta_step && !problem.has_grad_theta()) {
    throw std::invalid_argument(
        "block_coordinate_ascent: problem provides neither profile_theta nor grad_theta");
  }

  std::vector<double> theta = std::move(theta0);
  std::vector<double> z = std::move(z0);
  double ll = problem.log_ideal_likelihood(theta, z);
  if (!is_feasible_loglik(ll)) {
    throw std::invalid_argument("block_coordinate_ascent: initial point is infeasible");
  }
  if (trace != nullptr) trace->half_step_loglik.push_back(ll);

  auto max_abs_delta = [](const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
  };

  FitResult out{ParameterVector(theta, domain), LatentVector(z, space), ll, 0, false, 0.0};
  for (int it = 1; it <= cfg.max_outer_iterations; ++it) {
    const double ll_prev = ll;
    const std::vector<double> theta_prev = theta;
    const std::vector<double> z_prev = z;

    // Latent block.
    std::vector<double> z_next =
        own_z_step ? problem.update_z(theta, z) : fallback_update_z(problem, theta, z);
    space->clamp(z_next);
    double ll_next = problem.log_ideal_likelihood(theta, z_next);
    if (ll_next >= ll) {
      z = std::move(z_next);
      ll = ll_next;
    }
    if (trace != nullptr) trace->half_step_loglik.push_back(ll);

    // Parameter block.
    if (own_theta_step) {
      auto prof = problem.profile_theta(z);
      if (prof.has_value()) {
        ll_next = problem.log_ideal_likelihood(*prof, z);
        if (ll_next >= ll) {
          theta = std::move(*prof);
          ll = ll_next;
        }
      }
    } else {
      auto t_next = fallback_profile_theta(problem, theta, z);
      ll_next = problem.log_ideal_likelihood(t_next, z);
      if (ll_next >= ll) {
        theta = std::move(t_next);
        ll = ll_next;
      }
    }
    if (trace != nullptr) trace->half_step_loglik.push_back(ll);

    out.iterations = it;
    const double delta = std::max(max_abs_delta(theta, theta_prev), max_abs_delta(z, z_prev));
    if (std::fabs(ll - ll_prev) < cfg.loglik_tolerance || delta < cfg.param_tolerance) {
      out.converged = true;
      break;
    }
  }

  out.theta_hat = ParameterVector(theta, domain);
  out.z_hat = LatentVector(z, space);
  out.loglik = ll;
  out.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace mile
