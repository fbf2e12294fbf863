#include "mile/problem.hpp"

#include <cmath>
#include <stdexcept>

#include "mile/rng.hpp"

namespace mile {

std::vector<double> IdealLikelihoodProblem::grad_theta(std::span<const double>,
                                                       std::span<const double>) const {
  throw std::logic_error("grad_theta not provided by this problem");
}

std::vector<double> IdealLikelihoodProblem::grad_z(std::span<const double>,
                                                   std::span<const double>) const {
  throw std::logic_error("grad_z not provided by this problem");
}

std::optional<std::vector<double>> IdealLikelihoodProblem::profile_theta(
    std::span<const double>) const {
  throw std::logic_error("profile_theta not provided by this problem");
}

std::vector<double> IdealLikelihoodProblem::update_z(std::span<const double>,
                                                     std::span<const double>) const {
  throw std::logic_error("update_z not provided by this problem");
}

std::vector<Interval> IdealLikelihoodProblem::param_sampling_box() const {
  const DomainSpec& d = param_domain();
  std::vector<Interval> box;
  box.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& c = d.coord(i);
    if (!std::isfinite(c.lower) || !std::isfinite(c.upper)) {
      throw std::logic_error("param_sampling_box: domain of " + c.name +
                             " is unbounded; problem must override the sampling box");
    }
    box.push_back({c.lower, c.upper});
  }
  return box;
}

std::vector<Interval> IdealLikelihoodProblem::latent_sampling_box() const {
  const LatentSpace& s = latent_space();
  if (s.is_categorical()) {
    throw std::logic_error("latent_sampling_box: latent space is categorical");
  }
  std::vector<Interval> box;
  box.reserve(s.dimension());
  for (std::size_t i = 0; i < s.dimension(); ++i) {
    const auto& b = s.bounds(i);
    if (!std::isfinite(b.lower) || !std::isfinite(b.upper)) {
      throw std::logic_error(
          "latent_sampling_box: unbounded latent domain; problem must override the sampling box");
    }
    box.push_back(b);
  }
  return box;
}

bool ValidationReport::all_passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

std::size_t ValidationReport::failure_count() const {
  std::size_t n = 0;
  for (const auto& c : checks) {
    if (!c.passed) ++n;
  }
  return n;
}

namespace {

double fd_step(double x) { return 6.0554544523933429e-6 * std::max(1.0, std::fabs(x)); }

// Central difference along coordinate k of ll(theta, z).
double central_diff(const IdealLikelihoodProblem& p, std::vector<double> theta,
                    std::vector<double> z, bool wrt_theta, std::size_t k) {
  double* x = wrt_theta ? &theta[k] : &z[k];
  const double h = fd_step(*x);
  const double x0 = *x;
  *x = x0 + h;
  const double up = p.log_ideal_likelihood(theta, z);
  *x = x0 - h;
  const double dn = p.log_ideal_likelihood(theta, z);
  return (up - dn) / (2.0 * h);
}

}  // namespace

ValidationReport validate_problem(const IdealLikelihoodProblem& problem, SeededGenerator& gen,
                                  int points, double grad_rel_tol, double profile_slack) {
  ValidationReport report;
  const auto theta_box = problem.param_sampling_box();
  const bool categorical = problem.latent_space().is_categorical();
  std::vector<Interval> z_box;
  if (!categorical) z_box = problem.latent_sampling_box();
  const std::size_t zdim = problem.latent_space().dimension();

  for (int pt = 0; pt < points; ++pt) {
    const std::string where = "point " + std::to_string(pt);
    std::vector<double> theta(theta_box.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
      theta[i] = gen.uniform(theta_box[i].lower, theta_box[i].upper);
    }
    std::vector<double> z(zdim);
    if (categorical) {
      for (auto& v : z) {
        v = static_cast<double>(gen.below(problem.latent_space().n_categories()));
      }
    } else {
      for (std::size_t i = 0; i < zdim; ++i) {
        z[i] = gen.uniform(z_box[i].lower, z_box[i].upper);
      }
    }

    if (problem.has_grad_theta()) {
      const auto g = problem.grad_theta(theta, z);
      for (std::size_t k = 0; k < g.size(); ++k) {
        const double fd = central_diff(problem, theta, z, true, k);
        const double rel = std::fabs(g[k] - fd) / std::max(1.0, std::fabs(g[k]));
        report.checks.push_back({"grad_theta[" + std::to_string(k) + "] vs finite difference",
                                 where, rel, rel < grad_rel_tol});
      }
    }
    if (!categorical && problem.has_grad_z()) {
      const auto g = problem.grad_z(theta, z);
      for (std::size_t k = 0; k < g.size(); ++k) {
        const double fd = central_diff(problem, theta, z, false, k);
        const double rel = std::fabs(g[k] - fd) / std::max(1.0, std::fabs(g[k]));
        report.checks.push_back({"grad_z[" + std::to_string(k) + "] vs finite difference", where,
                                 rel, rel < grad_rel_tol});
      }
    }
    if (problem.has_profile_theta()) {
      const auto prof = problem.profile_theta(z);
      if (prof.has_value()) {
        const double at_profile = problem.log_ideal_likelihood(*prof, z);
        double best_rival = problem.log_ideal_likelihood(theta, z);
        for (int rival = 0; rival < 4; ++rival) {
          std::vector<double> t2(theta.size());
          for (std::size_t i = 0; i < t2.size(); ++i) {
            t2[i] = gen.uniform(theta_box[i].lower, theta_box[i].upper);
          }
          best_rival = std::max(best_rival, problem.log_ideal_likelihood(t2, z));
        }
        const double gap = best_rival - at_profile;  // positive means profile lost
        report.checks.push_back(
            {"profile_theta dominates sampled rivals", where, gap, gap <= profile_slack});
      }
    }
  }
  return report;
}

}  // namespace mile
