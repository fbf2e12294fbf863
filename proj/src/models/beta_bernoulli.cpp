#include "mile/models/beta_bernoulli.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mile/root_find.hpp"
#include "mile/specfn.hpp"

namespace mile::models {

using specfn::digamma;
using specfn::log_gamma;
using specfn::trigamma;

namespace {
constexpr double kTwoLogTwo = 1.3862943611198906;
}

BetaBernoulli::BetaBernoulli(const GroupedDataset& data) : m_(data.obs_per_individual()) {
  const std::size_t n = data.n_individuals();
  s_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (double v : data.individual(i)) {
      if (v != 0.0 && v != 1.0) {
        throw std::invalid_argument("BetaBernoulli: observations must be 0 or 1");
      }
      s += v;
    }
    s_[i] = s;
  }
  domain_ = std::make_shared<DomainSpec>(std::vector<CoordBounds>{
      {"theta", 0.0, std::numeric_limits<double>::infinity()}});
  space_ = std::make_shared<LatentSpace>(LatentSpace::continuous_box(n, Interval{0.0, 1.0}));
}

std::vector<Interval> BetaBernoulli::latent_sampling_box() const {
  return std::vector<Interval>(s_.size(), Interval{0.05, 0.95});
}

double BetaBernoulli::log_ideal_likelihood(std::span<const double> theta,
                                           std::span<const double> z) const {
  if (!domain_->contains(theta) || !space_->contains(z)) return kInfeasibleLogLik;
  const double t = theta[0];
  const double n = static_cast<double>(s_.size());
  double ll = n * (log_gamma(2.0 * t) - 2.0 * log_gamma(t));
  const double md = static_cast<double>(m_);
  for (std::size_t i = 0; i < s_.size(); ++i) {
    ll += (t + s_[i] - 1.0) * std::log(z[i]) + (t - s_[i] + md - 1.0) * std::log1p(-z[i]);
  }
  return std::isfinite(ll) ? ll : kInfeasibleLogLik;
}

std::vector<double> BetaBernoulli::grad_theta(std::span<const double> theta,
                                              std::span<const double> z) const {
  const double t = theta[0];
  const double n = static_cast<double>(s_.size());
  double sum_logs = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    sum_logs += std::log(z[i]) + std::log1p(-z[i]);
  }
  return {2.0 * n * (digamma(2.0 * t) - digamma(t)) + sum_logs};
}

std::vector<double> BetaBernoulli::grad_z(std::span<const double> theta,
                                          std::span<const double> z) const {
  const double t = theta[0];
  const double md = static_cast<double>(m_);
  std::vector<double> g(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    g[i] = (t + s_[i] - 1.0) / z[i] - (t - s_[i] + md - 1.0) / (1.0 - z[i]);
  }
  return g;
}

double BetaBernoulli::zhat(double theta, double successes, std::size_t m) {
  const double denom = 2.0 * theta + static_cast<double>(m) - 2.0;
  if (!(denom > 0.0)) {
    throw std::domain_error("BetaBernoulli::zhat: 2 theta + M - 2 must be positive");
  }
  const double z = (theta + successes - 1.0) / denom;
  return std::clamp(z, kBoundaryEps, 1.0 - kBoundaryEps);
}

std::vector<double> BetaBernoulli::update_z(std::span<const double> theta,
                                            std::span<const double>) const {
  std::vector<double> z(s_.size());
  for (std::size_t i = 0; i < s_.size(); ++i) z[i] = zhat(theta[0], s_[i], m_);
  return z;
}

std::optional<double> BetaBernoulli::solve_concentration(double c) const {
  // 2(psi(2t) - psi(t)) decreases from +inf to 2 ln 2, so a root exists
  // iff c < -2 ln 2.
  if (!(c < -kTwoLogTwo)) return std::nullopt;
  auto f = [c](double t) { return 2.0 * (digamma(2.0 * t) - digamma(t)) + c; };
  auto df = [](double t) { return 4.0 * trigamma(2.0 * t) - 2.0 * trigamma(t); };
  auto bracket = expand_bracket(f, 1e-3, 1e4, 1e-12, 1e12);
  if (!bracket.has_value()) return std::nullopt;
  ScalarRootConfig cfg;
  cfg.lower = bracket->first;
  cfg.upper = bracket->second;
  cfg.tolerance = 1e-10;
  return solve_scalar_root(f, df, cfg);
}

std::optional<std::vector<double>> BetaBernoulli::profile_theta(std::span<const double> z) const {
  double mean_logs = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    mean_logs += std::log(z[i]) + std::log1p(-z[i]);
  }
  mean_logs /= static_cast<double>(z.size());
  auto root = solve_concentration(mean_logs);
  if (!root.has_value()) return std::nullopt;
  return std::vector<double>{*root};
}

FitResult BetaBernoulli::fit(const BcaConfig& cfg, double theta0, BcaTrace* trace) const {
  std::vector<double> z0 = update_z(std::vector<double>{theta0}, {});
  return block_coordinate_ascent(*this, {theta0}, std::move(z0), cfg, trace);
}

double BetaBernoulli::marginal_loglik(double theta) const {
  if (!(theta > 0.0)) throw std::domain_error("marginal_loglik: theta must be positive");
  const double md = static_cast<double>(m_);
  const double n = static_cast<double>(s_.size());
  double ll = -n * (2.0 * log_gamma(theta) - log_gamma(2.0 * theta));
  for (double s : s_) {
    ll += log_gamma(theta + s) + log_gamma(theta + md - s) - log_gamma(2.0 * theta + md);
  }
  return ll;
}

BetaBernoulli::EmResult BetaBernoulli::em_fit(const EmOptions& opts) const {
  const double md = static_cast<double>(m_);
  const double n = static_cast<double>(s_.size());
  EmResult out;
  double theta = opts.theta0;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    // E-step: posterior expectations of log z and log(1-z) under
    // Beta(theta + s_i, theta - s_i + M).
    double c = 0.0;
    const double norm = digamma(2.0 * theta + md);
    for (double s : s_) {
      c += digamma(theta + s) + digamma(theta - s + md) - 2.0 * norm;
    }
    c /= n;
    auto next = solve_concentration(c);
    if (!next.has_value()) {
      throw std::runtime_error("BetaBernoulli::em_fit: update equation has no root");
    }
    const double delta = std::fabs(*next - theta);
    theta = *next;
    out.iterations = it;
    out.marginal_trace.push_back(marginal_loglik(theta));
    if (delta < opts.tolerance) {
      out.converged = true;
      break;
    }
  }
  out.theta = theta;
  return out;
}

std::pair<GroupedDataset, std::vector<double>> BetaBernoulli::simulate(double theta,
                                                                       std::size_t n,
                                                                       std::size_t m,
                                                                       SeededGenerator& gen) {
  if (!(theta > 0.0)) throw std::invalid_argument("simulate: theta must be positive");
  std::vector<double> z(n);
  std::vector<double> values(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = gen.beta(theta, theta);
    z[i] = std::clamp(z[i], kBoundaryEps, 1.0 - kBoundaryEps);
    for (std::size_t j = 0; j < m; ++j) {
      values[i * m + j] = static_cast<double>(gen.bernoulli(z[i]));
    }
  }
  return {GroupedDataset(n, m, std::move(values)), std::move(z)};
}

}  // namespace mile::models
