#include "mile/models/segmented_poisson.hpp"

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

// Rates and shapes are boxed to keep exp() and the digamma system sane.
constexpr double kRateBound = 60.0;
constexpr double kShapeLo = 1e-3;
constexpr double kShapeHi = 1e6;

double log_beta_fn(double a, double b) {
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

}  // namespace

SegmentedPoisson::SegmentedPoisson(const GroupedDataset& data)
    : n_(data.n_individuals()), horizon_(data.horizon()) {
  if (!data.has_timestamps()) {
    throw std::invalid_argument("SegmentedPoisson: dataset needs a timestamp grid");
  }
  const auto ts = data.timestamps();
  t_.assign(ts.begin(), ts.end());
  const auto all = data.all_values();
  x_.assign(all.begin(), all.end());
  for (double v : x_) {
    if (v < 0.0 || v != std::floor(v)) {
      throw std::invalid_argument("SegmentedPoisson: observations must be nonnegative counts");
    }
  }
  const std::size_t m = t_.size();
  if (m > 1) {
    grid_step_ = (t_.back() - t_.front()) / static_cast<double>(m - 1);
    uniform_grid_ = true;
    for (std::size_t j = 0; j + 1 < m; ++j) {
      if (std::fabs(t_[j + 1] - t_[j] - grid_step_) > 1e-9 * horizon_) {
        uniform_grid_ = false;
        break;
      }
    }
  }
  px_.assign(n_ * (m + 1), 0.0);
  pxt_.assign(n_ * (m + 1), 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double acc_x = 0.0, acc_xt = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      acc_x += x_[i * m + j];
      acc_xt += x_[i * m + j] * t_[j];
      px_[i * (m + 1) + j + 1] = acc_x;
      pxt_[i * (m + 1) + j + 1] = acc_xt;
    }
  }
  const double inf = std::numeric_limits<double>::infinity();
  domain_ = std::make_shared<DomainSpec>(std::vector<CoordBounds>{{"alpha", 0.0, inf},
                                                                  {"beta", 0.0, inf},
                                                                  {"beta1", -inf, inf},
                                                                  {"beta2", -inf, inf},
                                                                  {"a", -inf, inf}});
  space_ = std::make_shared<LatentSpace>(
      LatentSpace::continuous_box(n_, Interval{0.0, horizon_}));
}

std::vector<Interval> SegmentedPoisson::latent_sampling_box() const {
  return std::vector<Interval>(n_, Interval{0.02 * horizon_, 0.98 * horizon_});
}

std::size_t SegmentedPoisson::split_index(double z) const {
  return static_cast<std::size_t>(
      std::lower_bound(t_.begin(), t_.end(), z) - t_.begin());
}

void SegmentedPoisson::rate_sums(double b, double a, double z, std::size_t from, std::size_t to,
                                 double& sr, double& srdt, double& srdt2) const {
  if (from >= to) return;
  if (uniform_grid_) {
    double dt = t_[from] - z;
    double r = std::exp(b * dt + a);
    const double rho = std::exp(b * grid_step_);
    for (std::size_t j = from; j < to; ++j) {
      sr += r;
      srdt += r * dt;
      srdt2 += r * dt * dt;
      r *= rho;
      dt += grid_step_;
    }
    return;
  }
  for (std::size_t j = from; j < to; ++j) {
    const double dt = t_[j] - z;
    const double r = std::exp(b * dt + a);
    sr += r;
    srdt += r * dt;
    srdt2 += r * dt * dt;
  }
}

double SegmentedPoisson::log_ideal_likelihood(std::span<const double> theta,
                                              std::span<const double> z) const {
  if (!domain_->contains(theta) || !space_->contains(z)) return kInfeasibleLogLik;
  const double alpha = theta[0], beta = theta[1], b1 = theta[2], b2 = theta[3], a = theta[4];
  const std::size_t m = t_.size();
  const double lb = log_beta_fn(alpha, beta);
  double ll = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    const double w = z[i] / horizon_;
    ll += (alpha - 1.0) * std::log(w) + (beta - 1.0) * std::log1p(-w) - lb -
          std::log(horizon_);
    const std::size_t split = split_index(z[i]);
    // sum_j x_j log(rate_j) = b (sum x t - z sum x) + a sum x per segment.
    const double* px = px_.data() + i * (m + 1);
    const double* pxt = pxt_.data() + i * (m + 1);
    const double sx1 = px[split], sxt1 = pxt[split];
    const double sx2 = px[m] - sx1, sxt2 = pxt[m] - sxt1;
    ll += b1 * (sxt1 - z[i] * sx1) + b2 * (sxt2 - z[i] * sx2) + a * (sx1 + sx2);
    double sr = 0.0, srdt = 0.0, srdt2 = 0.0;
    rate_sums(b1, a, z[i], 0, split, sr, srdt, srdt2);
    rate_sums(b2, a, z[i], split, m, sr, srdt, srdt2);
    ll -= sr;
  }
  return std::isfinite(ll) ? ll : kInfeasibleLogLik;
}

std::vector<double> SegmentedPoisson::grad_theta(std::span<const double> theta,
                                                 std::span<const double> z) const {
  const double alpha = theta[0], beta = theta[1], b1 = theta[2], b2 = theta[3], a = theta[4];
  const std::size_t m = t_.size();
  const double nd = static_cast<double>(n_);
  double g_alpha = -nd * (digamma(alpha) - digamma(alpha + beta));
  double g_beta = -nd * (digamma(beta) - digamma(alpha + beta));
  double g_b1 = 0.0, g_b2 = 0.0, g_a = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    const double w = z[i] / horizon_;
    g_alpha += std::log(w);
    g_beta += std::log1p(-w);
    const std::size_t split = split_index(z[i]);
    const double* row = x_.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) {
      const double dt = t_[j] - z[i];
      const double slope = j < split ? b1 : b2;
      const double resid = row[j] - std::exp(slope * dt + a);
      if (j < split) {
        g_b1 += resid * dt;
      } else {
        g_b2 += resid * dt;
      }
      g_a += resid;
    }
  }
  return {g_alpha, g_beta, g_b1, g_b2, g_a};
}

std::vector<double> SegmentedPoisson::grad_z(std::span<const double> theta,
                                             std::span<const double> z) const {
  const double alpha = theta[0], beta = theta[1], b1 = theta[2], b2 = theta[3], a = theta[4];
  const std::size_t m = t_.size();
  std::vector<double> g(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    double gi = (alpha - 1.0) / z[i] - (beta - 1.0) / (horizon_ - z[i]);
    const std::size_t split = split_index(z[i]);
    const double* row = x_.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) {
      const double dt = t_[j] - z[i];
      const double slope = j < split ? b1 : b2;
      const double resid = row[j] - std::exp(slope * dt + a);
      gi -= slope * resid;
    }
    g[i] = gi;
  }
  return g;
}

std::optional<std::vector<double>> SegmentedPoisson::profile_theta(
    std::span<const double> z) const {
  return profile_with_diagnostics(z, nullptr);
}

std::optional<std::vector<double>> SegmentedPoisson::profile_with_diagnostics(
    std::span<const double> z, ProfileDiagnostics* diag) const {
  const std::size_t m = t_.size();
  ProfileDiagnostics local;
  ProfileDiagnostics& d = diag != nullptr ? *diag : local;

  // Newton block for the rate parameters (b1, b2, a), one scalar update
  // per parameter per pass over the data. Data-side segment sums depend
  // only on z, so they come out of the iteration loop.
  std::vector<std::size_t> split(n_);
  std::vector<double> sx1(n_), sxd1(n_), sx2(n_), sxd2(n_);
  std::size_t count1 = 0;
  double sum_x = 0.0, sum_x1 = 0.0, sum_xd1 = 0.0, sum_xd2 = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    split[i] = split_index(z[i]);
    count1 += split[i];
    const double* px = px_.data() + i * (m + 1);
    const double* pxt = pxt_.data() + i * (m + 1);
    sx1[i] = px[split[i]];
    sxd1[i] = pxt[split[i]] - z[i] * sx1[i];
    sx2[i] = px[m] - sx1[i];
    sxd2[i] = (pxt[m] - pxt[split[i]]) - z[i] * sx2[i];
    sum_x += px[m];
    sum_x1 += sx1[i];
    sum_xd1 += sxd1[i];
    sum_xd2 += sxd2[i];
  }
  (void)sum_x1;
  d.seg1_empty = count1 == 0;
  d.seg2_empty = count1 == n_ * m;

  double b1 = 0.0, b2 = 0.0;
  double a = std::log(std::max(sum_x / static_cast<double>(n_ * m), 1e-3));
  bool converged = false;
  for (int it = 0; it < 200; ++it) {
    double sr1 = 0.0, srdt1 = 0.0, d1 = 0.0;
    double sr2 = 0.0, srdt2 = 0.0, d2 = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      rate_sums(b1, a, z[i], 0, split[i], sr1, srdt1, d1);
      rate_sums(b2, a, z[i], split[i], m, sr2, srdt2, d2);
    }
    const double a1 = sum_xd1 - srdt1;
    const double a2 = sum_xd2 - srdt2;
    const double aa = sum_x - (sr1 + sr2);
    const double da = sr1 + sr2;
    double step = 0.0;
    if (d1 > 0.0) {
      const double s = a1 / d1;
      b1 += s;
      step = std::max(step, std::fabs(s));
    }
    if (d2 > 0.0) {
      const double s = a2 / d2;
      b2 += s;
      step = std::max(step, std::fabs(s));
    }
    if (da > 0.0) {
      const double s = aa / da;
      a += s;
      step = std::max(step, std::fabs(s));
    }
    if (!std::isfinite(b1) || !std::isfinite(b2) || !std::isfinite(a) ||
        std::fabs(b1) > kRateBound || std::fabs(b2) > kRateBound || std::fabs(a) > kRateBound) {
      return std::nullopt;
    }
    if (step < 1e-8) {
      converged = true;
      break;
    }
  }
  d.rates_converged = converged;
  if (!converged) return std::nullopt;

  // Shape block: psi(alpha) - psi(alpha+beta) = mean log(z/T) and the
  // mirrored equation, solved in log space.
  double c1 = 0.0, c2 = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    c1 += std::log(z[i] / horizon_);
    c2 += std::log1p(-z[i] / horizon_);
  }
  c1 /= static_cast<double>(n_);
  c2 /= static_cast<double>(n_);

  auto residual = [&](const std::vector<double>& u) -> std::vector<double> {
    const double alpha = std::exp(u[0]), beta = std::exp(u[1]);
    if (alpha < kShapeLo || alpha > kShapeHi || beta < kShapeLo || beta > kShapeHi) {
      const double inf = std::numeric_limits<double>::infinity();
      return {inf, inf};
    }
    return {digamma(alpha) - digamma(alpha + beta) - c1,
            digamma(beta) - digamma(alpha + beta) - c2};
  };
  auto jacobian = [&](const std::vector<double>& u) -> std::vector<double> {
    const double alpha = std::exp(u[0]), beta = std::exp(u[1]);
    const double tg_ab = trigamma(alpha + beta);
    return {alpha * (trigamma(alpha) - tg_ab), -beta * tg_ab,
            -alpha * tg_ab, beta * (trigamma(beta) - tg_ab)};
  };

  // Moment starting point on the scaled breaks.
  double mean = 0.0, var = 0.0;
  for (std::size_t i = 0; i < n_; ++i) mean += z[i] / horizon_;
  mean /= static_cast<double>(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    const double dv = z[i] / horizon_ - mean;
    var += dv * dv;
  }
  var = std::max(var / static_cast<double>(n_), 1e-12);
  mean = std::clamp(mean, 1e-6, 1.0 - 1e-6);
  double conc = mean * (1.0 - mean) / var - 1.0;
  if (!(conc > 0.0)) conc = 1.0;
  std::vector<double> u0 = {std::log(std::clamp(mean * conc, 1e-2, 1e3)),
                            std::log(std::clamp((1.0 - mean) * conc, 1e-2, 1e3))};
  DampedNewtonConfig ncfg;
  ncfg.tolerance = 1e-10;
  std::vector<double> u;
  try {
    u = damped_newton(residual, jacobian, std::move(u0), ncfg);
  } catch (const std::runtime_error&) {
    return std::nullopt;
  }
  d.shape_solved = true;
  return std::vector<double>{std::exp(u[0]), std::exp(u[1]), b1, b2, a};
}

FitResult SegmentedPoisson::fit_mile(SeededGenerator& gen, const CubeSearchConfig& cfg,
                                     CubeSearchTrace* trace) const {
  return random_cube_search(*this, cfg, gen, trace);
}

std::pair<GroupedDataset, std::vector<double>> SegmentedPoisson::simulate(
    double alpha, double beta, double b1, double b2, double a, std::size_t n, std::size_t m,
    double horizon, SeededGenerator& gen) {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw std::invalid_argument("simulate: alpha, beta must be positive");
  }
  std::vector<double> t(m);
  for (std::size_t j = 0; j < m; ++j) {
    t[j] = (static_cast<double>(j) + 0.5) * horizon / static_cast<double>(m);
  }
  std::vector<double> z(n);
  std::vector<double> values(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    double w = gen.beta(alpha, beta);
    w = std::clamp(w, kBoundaryEps, 1.0 - kBoundaryEps);
    z[i] = w * horizon;
    for (std::size_t j = 0; j < m; ++j) {
      const double slope = t[j] < z[i] ? b1 : b2;
      values[i * m + j] = static_cast<double>(gen.poisson(std::exp(slope * (t[j] - z[i]) + a)));
    }
  }
  return {GroupedDataset(n, std::move(t), horizon, std::move(values)), std::move(z)};
}

}  // namespace mile::models
