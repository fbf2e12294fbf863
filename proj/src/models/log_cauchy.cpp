#include "mile/models/log_cauchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mile/root_find.hpp"

namespace mile::models {

namespace {

constexpr double kGridLo = 1e-4;
constexpr double kGridHi = 200.0;
constexpr int kGridNodes = 16;

double median_of(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

LogCauchy::LogCauchy(const GroupedDataset& data, double decay_rate)
    : r_(decay_rate), m_(data.obs_per_individual()) {
  if (!(r_ > 0.0)) throw std::invalid_argument("LogCauchy: decay rate must be positive");
  const std::size_t n = data.n_individuals();
  sum_.resize(n);
  sumsq_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0, q = 0.0;
    for (double v : data.individual(i)) {
      s += v;
      q += v * v;
    }
    sum_[i] = s;
    sumsq_[i] = q;
  }
  domain_ = std::make_shared<DomainSpec>(std::vector<CoordBounds>{
      {"mu", -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()}});
  space_ = std::make_shared<LatentSpace>(
      LatentSpace::continuous_box(n, Interval{0.0, std::numeric_limits<double>::infinity()}));
}

std::vector<Interval> LogCauchy::latent_sampling_box() const {
  return std::vector<Interval>(sum_.size(), Interval{0.5, 60.0});
}

double LogCauchy::per_individual_loglik(std::size_t i, double mu, double z) const {
  const double u = std::log(z) - mu;
  const double w = std::exp(-r_ * z);
  return -std::log(z) - std::log1p(u * u) -
         0.5 * (sumsq_[i] - 2.0 * w * sum_[i] + static_cast<double>(m_) * w * w);
}

double LogCauchy::per_individual_score(std::size_t i, double mu, double z) const {
  const double u = std::log(z) - mu;
  const double w = std::exp(-r_ * z);
  return -1.0 / z - 2.0 * u / ((1.0 + u * u) * z) +
         r_ * w * (static_cast<double>(m_) * w - sum_[i]);
}

double LogCauchy::per_individual_score_deriv(std::size_t i, double mu, double z) const {
  const double u = std::log(z) - mu;
  const double one_u2 = 1.0 + u * u;
  const double w = std::exp(-r_ * z);
  const double z2 = z * z;
  return 1.0 / z2 - 2.0 * (1.0 - u * u) / (z2 * one_u2 * one_u2) + 2.0 * u / (one_u2 * z2) -
         r_ * r_ * w * (2.0 * static_cast<double>(m_) * w - sum_[i]);
}

double LogCauchy::log_ideal_likelihood(std::span<const double> theta,
                                       std::span<const double> z) const {
  if (!domain_->contains(theta) || !space_->contains(z)) return kInfeasibleLogLik;
  double ll = 0.0;
  for (std::size_t i = 0; i < sum_.size(); ++i) {
    ll += per_individual_loglik(i, theta[0], z[i]);
  }
  return std::isfinite(ll) ? ll : kInfeasibleLogLik;
}

std::vector<double> LogCauchy::grad_theta(std::span<const double> theta,
                                          std::span<const double> z) const {
  double g = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double u = std::log(z[i]) - theta[0];
    g += 2.0 * u / (1.0 + u * u);
  }
  return {g};
}

std::vector<double> LogCauchy::grad_z(std::span<const double> theta,
                                      std::span<const double> z) const {
  std::vector<double> g(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    g[i] = per_individual_score(i, theta[0], z[i]);
  }
  return g;
}

LogCauchy::LatentUpdate LogCauchy::update_latents(double mu,
                                                  std::span<const double> z_current) const {
  LatentUpdate out;
  out.z.resize(sum_.size());

  // Shared log-spaced grid of Newton seeds.
  std::vector<double> grid(kGridNodes);
  const double step = (std::log(kGridHi) - std::log(kGridLo)) / (kGridNodes - 1);
  for (int g = 0; g < kGridNodes; ++g) grid[g] = std::exp(std::log(kGridLo) + g * step);

  for (std::size_t i = 0; i < sum_.size(); ++i) {
    std::vector<double> nodes = grid;
    if (!z_current.empty() && z_current[i] > kGridLo && z_current[i] < kGridHi) {
      nodes.push_back(z_current[i]);
      std::sort(nodes.begin(), nodes.end());
    }
    std::vector<double> f(nodes.size());
    for (std::size_t g = 0; g < nodes.size(); ++g) f[g] = per_individual_score(i, mu, nodes[g]);

    std::vector<double> candidates;
    bool found_max = false;
    for (std::size_t g = 0; g + 1 < nodes.size(); ++g) {
      // Descending sign change brackets a local maximum of the
      // per-individual objective.
      if (f[g] > 0.0 && f[g + 1] <= 0.0) {
        auto fn = [&](double z) { return per_individual_score(i, mu, z); };
        auto dfn = [&](double z) { return per_individual_score_deriv(i, mu, z); };
        ScalarRootConfig cfg;
        cfg.lower = nodes[g];
        cfg.upper = nodes[g + 1];
        cfg.tolerance = 1e-10;
        candidates.push_back(solve_scalar_root(fn, dfn, cfg));
        found_max = true;
      }
    }
    if (f.back() > 0.0) candidates.push_back(nodes.back());  // still rising at the cap
    if (!found_max && candidates.empty()) {
      // No interior stationary maximum; the objective climbs toward the
      // lower domain edge.
      candidates.push_back(kGridLo);
      out.edge_individuals.push_back(i);
    }
    if (!z_current.empty()) candidates.push_back(z_current[i]);

    double best_z = candidates.front();
    double best_ll = per_individual_loglik(i, mu, best_z);
    for (std::size_t c = 1; c < candidates.size(); ++c) {
      const double ll = per_individual_loglik(i, mu, candidates[c]);
      if (ll > best_ll) {
        best_ll = ll;
        best_z = candidates[c];
      }
    }
    out.z[i] = best_z;
  }
  return out;
}

std::vector<double> LogCauchy::update_z(std::span<const double> theta,
                                        std::span<const double> z_current) const {
  return update_latents(theta[0], z_current).z;
}

std::optional<std::vector<double>> LogCauchy::profile_theta(std::span<const double> z) const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double zi : z) {
    const double l = std::log(zi);
    lo = std::min(lo, l);
    hi = std::max(hi, l);
  }
  if (!(std::isfinite(lo) && std::isfinite(hi))) return std::nullopt;
  if (hi - lo < 1e-14) return std::vector<double>{lo};

  auto objective = [&](double mu) {
    double s = 0.0;
    for (double zi : z) {
      const double u = std::log(zi) - mu;
      s -= std::log1p(u * u);
    }
    return s;
  };
  auto score = [&](double mu) {
    double s = 0.0;
    for (double zi : z) {
      const double u = std::log(zi) - mu;
      s += 2.0 * u / (1.0 + u * u);
    }
    return s;
  };
  auto score_deriv = [&](double mu) {
    double s = 0.0;
    for (double zi : z) {
      const double u = std::log(zi) - mu;
      const double d = 1.0 + u * u;
      s += 2.0 * (u * u - 1.0) / (d * d);
    }
    return s;
  };

  // The location likelihood can be multimodal: scan, then polish each
  // descending sign change and keep the best.
  constexpr int kScan = 128;
  double best_mu = std::numeric_limits<double>::quiet_NaN();
  double best_obj = -std::numeric_limits<double>::infinity();
  double prev_mu = lo;
  double prev_f = score(lo);
  for (int k = 1; k <= kScan; ++k) {
    const double mu = lo + (hi - lo) * k / kScan;
    const double fk = score(mu);
    if (prev_f > 0.0 && fk <= 0.0) {
      ScalarRootConfig cfg;
      cfg.lower = prev_mu;
      cfg.upper = mu;
      cfg.tolerance = 1e-12;
      const double root = solve_scalar_root(score, score_deriv, cfg);
      const double obj = objective(root);
      if (obj > best_obj) {
        best_obj = obj;
        best_mu = root;
      }
    }
    prev_mu = mu;
    prev_f = fk;
  }
  if (!std::isfinite(best_mu)) {
    // Score is positive at min log z and negative at max log z, so the
    // scan can only miss through ties; fall back to the midpoint.
    best_mu = 0.5 * (lo + hi);
  }
  return std::vector<double>{best_mu};
}

double LogCauchy::starting_mu() const {
  std::vector<double> logs;
  for (std::size_t i = 0; i < sum_.size(); ++i) {
    const double mean = sum_[i] / static_cast<double>(m_);
    if (mean > 0.0 && mean < 1.0) logs.push_back(std::log(-std::log(mean) / r_));
  }
  return logs.empty() ? 0.0 : median_of(std::move(logs));
}

LogCauchy::MileReport LogCauchy::fit(const BcaConfig& cfg, BcaTrace* trace) const {
  const double mu0 = starting_mu();
  std::vector<double> z0(sum_.size());
  for (std::size_t i = 0; i < sum_.size(); ++i) {
    const double mean = sum_[i] / static_cast<double>(m_);
    z0[i] = (mean > 0.0 && mean < 1.0) ? std::clamp(-std::log(mean) / r_, kGridLo, kGridHi)
                                       : std::exp(mu0);
  }
  FitResult fit = block_coordinate_ascent(*this, {mu0}, std::move(z0), cfg, trace);
  std::vector<std::size_t> edges =
      update_latents(fit.theta_hat[0], fit.z_hat.span()).edge_individuals;
  return MileReport{std::move(fit), std::move(edges)};
}

LogCauchy::MomResult LogCauchy::mom_fit() const {
  MomResult out;
  out.z.assign(sum_.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<double> logs;
  for (std::size_t i = 0; i < sum_.size(); ++i) {
    const double mean = sum_[i] / static_cast<double>(m_);
    if (mean > 0.0 && mean < 1.0) {
      out.z[i] = -std::log(mean) / r_;
      logs.push_back(std::log(out.z[i]));
    } else {
      out.excluded.push_back(i);
    }
  }
  if (logs.empty()) {
    throw std::runtime_error("LogCauchy::mom_fit: every individual mean lies outside (0,1)");
  }
  out.mu = median_of(std::move(logs));
  return out;
}

std::pair<GroupedDataset, std::vector<double>> LogCauchy::simulate(double mu, std::size_t n,
                                                                   std::size_t m,
                                                                   double decay_rate,
                                                                   SeededGenerator& gen) {
  if (!(decay_rate > 0.0)) throw std::invalid_argument("simulate: decay rate must be positive");
  std::vector<double> z(n);
  std::vector<double> values(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = gen.log_cauchy(mu, 1.0);
    const double level = std::exp(-decay_rate * z[i]);
    for (std::size_t j = 0; j < m; ++j) {
      values[i * m + j] = gen.normal(level, 1.0);
    }
  }
  return {GroupedDataset(n, m, std::move(values)), std::move(z)};
}

}  // namespace mile::models
