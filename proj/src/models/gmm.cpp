#include "mile/models/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mile::models {

namespace {

constexpr double kVarianceFloor = 1e-6;
constexpr double kLogTwoPi = 1.8378770664093453;
constexpr double kWeightSumTol = 1e-8;

double log_normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (kLogTwoPi + std::log(var) + d * d / var);
}

}  // namespace

Gmm::Gmm(const GroupedDataset& data, int k) : k_(k) {
  if (data.obs_per_individual() != 1) {
    throw std::invalid_argument("Gmm: dataset must have one observation per individual");
  }
  if (k_ < 2) throw std::invalid_argument("Gmm: need at least two components");
  const auto all = data.all_values();
  x_.assign(all.begin(), all.end());
  if (x_.size() < static_cast<std::size_t>(2 * k_)) {
    throw std::invalid_argument("Gmm: need at least 2K observations");
  }

  std::vector<CoordBounds> coords;
  const double inf = std::numeric_limits<double>::infinity();
  for (int c = 0; c < k_; ++c) coords.push_back({"mu_" + std::to_string(c + 1), -inf, inf});
  for (int c = 0; c < k_; ++c) coords.push_back({"var_" + std::to_string(c + 1), 0.0, inf});
  for (int c = 0; c < k_; ++c) coords.push_back({"pi_" + std::to_string(c + 1), 0.0, 1.0});
  domain_ = std::make_shared<DomainSpec>(std::move(coords));
  space_ = std::make_shared<LatentSpace>(LatentSpace::categorical(x_.size(), k_));
}

std::vector<Interval> Gmm::param_sampling_box() const {
  const auto [lo, hi] = std::minmax_element(x_.begin(), x_.end());
  std::vector<Interval> box;
  for (int c = 0; c < k_; ++c) box.push_back({*lo, *hi});
  for (int c = 0; c < k_; ++c) box.push_back({0.05, 5.0});
  for (int c = 0; c < k_; ++c) box.push_back({0.05, 0.95});
  return box;
}

double Gmm::log_ideal_likelihood(std::span<const double> theta, std::span<const double> z) const {
  if (!domain_->contains(theta) || !space_->contains(z)) return kInfeasibleLogLik;
  const double* mu = theta.data();
  const double* var = theta.data() + k_;
  const double* pi = theta.data() + 2 * k_;
  double pi_sum = 0.0;
  for (int c = 0; c < k_; ++c) pi_sum += pi[c];
  if (std::fabs(pi_sum - 1.0) > kWeightSumTol) return kInfeasibleLogLik;
  double ll = 0.0;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    const int c = static_cast<int>(z[i]);
    ll += std::log(pi[c]) + log_normal_pdf(x_[i], mu[c], var[c]);
  }
  return std::isfinite(ll) ? ll : kInfeasibleLogLik;
}

std::vector<double> Gmm::update_z(std::span<const double> theta, std::span<const double>) const {
  const double* mu = theta.data();
  const double* var = theta.data() + k_;
  const double* pi = theta.data() + 2 * k_;
  std::vector<double> z(x_.size());
  for (std::size_t i = 0; i < x_.size(); ++i) {
    int best = 0;
    double best_ll = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < k_; ++c) {
      const double ll = std::log(pi[c]) + log_normal_pdf(x_[i], mu[c], var[c]);
      if (ll > best_ll) {
        best_ll = ll;
        best = c;
      }
    }
    z[i] = static_cast<double>(best);
  }
  return z;
}

std::optional<std::vector<double>> Gmm::profile_theta(std::span<const double> z) const {
  std::vector<double> count(k_, 0.0), sum(k_, 0.0), sumsq(k_, 0.0);
  for (std::size_t i = 0; i < x_.size(); ++i) {
    const int c = static_cast<int>(z[i]);
    if (c < 0 || c >= k_) return std::nullopt;
    count[c] += 1.0;
    sum[c] += x_[i];
    sumsq[c] += x_[i] * x_[i];
  }
  std::vector<double> theta(3 * k_);
  for (int c = 0; c < k_; ++c) {
    if (count[c] < 2.0) return std::nullopt;  // empty or singleton cluster
    const double mean = sum[c] / count[c];
    const double var = std::max(sumsq[c] / count[c] - mean * mean, kVarianceFloor);
    theta[c] = mean;
    theta[k_ + c] = var;
    theta[2 * k_ + c] = count[c] / static_cast<double>(x_.size());
  }
  return theta;
}

double Gmm::marginal_loglik(std::span<const double> theta) const {
  const double* mu = theta.data();
  const double* var = theta.data() + k_;
  const double* pi = theta.data() + 2 * k_;
  double ll = 0.0;
  for (double x : x_) {
    double acc = 0.0;
    for (int c = 0; c < k_; ++c) {
      acc += pi[c] * std::exp(log_normal_pdf(x, mu[c], var[c]));
    }
    ll += std::log(acc);
  }
  return ll;
}

Gmm::EmResult Gmm::em_fit(SeededGenerator& gen, const EmOptions& opts) const {
  const std::size_t n = x_.size();
  EmResult out;
  out.theta.assign(3 * k_, 0.0);
  double* mu = out.theta.data();
  double* var = out.theta.data() + k_;
  double* pi = out.theta.data() + 2 * k_;

  // Means at K random distinct data points (distinct values when the
  // sample permits), pooled variance, uniform weights.
  std::vector<double> chosen;
  for (int attempt = 0; attempt < 200 && chosen.size() < static_cast<std::size_t>(k_);
       ++attempt) {
    const double v = x_[gen.below(n)];
    if (std::find(chosen.begin(), chosen.end(), v) == chosen.end()) chosen.push_back(v);
  }
  while (chosen.size() < static_cast<std::size_t>(k_)) chosen.push_back(x_[gen.below(n)]);
  const double total_mean = std::accumulate(x_.begin(), x_.end(), 0.0) / static_cast<double>(n);
  double pooled = 0.0;
  for (double x : x_) pooled += (x - total_mean) * (x - total_mean);
  pooled = std::max(pooled / static_cast<double>(n), kVarianceFloor);
  for (int c = 0; c < k_; ++c) {
    mu[c] = chosen[c];
    var[c] = pooled;
    pi[c] = 1.0 / k_;
  }

  std::vector<double> resp(n * k_);
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opts.max_iterations; ++it) {
    // E step.
    for (std::size_t i = 0; i < n; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < k_; ++c) {
        resp[i * k_ + c] = std::log(pi[c]) + log_normal_pdf(x_[i], mu[c], var[c]);
        mx = std::max(mx, resp[i * k_ + c]);
      }
      double denom = 0.0;
      for (int c = 0; c < k_; ++c) {
        resp[i * k_ + c] = std::exp(resp[i * k_ + c] - mx);
        denom += resp[i * k_ + c];
      }
      for (int c = 0; c < k_; ++c) resp[i * k_ + c] /= denom;
    }
    // M step.
    for (int c = 0; c < k_; ++c) {
      double w = 0.0, wx = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        w += resp[i * k_ + c];
        wx += resp[i * k_ + c] * x_[i];
      }
      const double mean = wx / w;
      double wvar = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        wvar += resp[i * k_ + c] * (x_[i] - mean) * (x_[i] - mean);
      }
      mu[c] = mean;
      var[c] = std::max(wvar / w, kVarianceFloor);
      pi[c] = w / static_cast<double>(n);
    }
    const double ll = marginal_loglik(out.theta);
    out.iterations = it;
    out.marginal_trace.push_back(ll);
    if (std::fabs(ll - prev_ll) < opts.tolerance) {
      out.converged = true;
      break;
    }
    prev_ll = ll;
  }

  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    int best = 0;
    for (int c = 1; c < k_; ++c) {
      if (resp[i * k_ + c] > resp[i * k_ + best]) best = c;
    }
    out.labels[i] = best;
  }
  return out;
}

Gmm::MileReport Gmm::fit_mile(SeededGenerator& gen, const EmOptions& em_opts,
                              int max_sweeps) const {
  EmResult em = em_fit(gen, em_opts);
  CategoricalSweepStats sweep;
  FitResult fit = stepwise_categorical_opt(*this, em.labels, max_sweeps, &sweep);
  return MileReport{std::move(fit), std::move(em), sweep};
}

std::pair<GroupedDataset, std::vector<double>> Gmm::simulate(const std::vector<double>& means,
                                                             const std::vector<double>& variances,
                                                             const std::vector<double>& weights,
                                                             std::size_t n, SeededGenerator& gen) {
  const std::size_t k = means.size();
  if (variances.size() != k || weights.size() != k || k < 2) {
    throw std::invalid_argument("Gmm::simulate: component vectors must share a size >= 2");
  }
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("Gmm::simulate: weights must be positive");
    wsum += w;
  }
  if (std::fabs(wsum - 1.0) > 1e-9) {
    throw std::invalid_argument("Gmm::simulate: weights must sum to one");
  }
  std::vector<double> labels(n);
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = gen.uniform01();
    double acc = 0.0;
    std::size_t c = k - 1;
    for (std::size_t j = 0; j < k; ++j) {
      acc += weights[j];
      if (u < acc) {
        c = j;
        break;
      }
    }
    labels[i] = static_cast<double>(c);
    values[i] = gen.normal(means[c], std::sqrt(variances[c]));
  }
  return {GroupedDataset(n, 1, std::move(values)), std::move(labels)};
}

double label_accuracy(std::span<const double> estimate, std::span<const double> truth, int k) {
  if (estimate.size() != truth.size() || estimate.empty()) {
    throw std::invalid_argument("label_accuracy: size mismatch");
  }
  if (k < 1 || k > 8) throw std::invalid_argument("label_accuracy: supported for 1 <= K <= 8");
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0.0;
  do {
    std::size_t agree = 0;
    for (std::size_t i = 0; i < estimate.size(); ++i) {
      const int e = static_cast<int>(estimate[i]);
      const int t = static_cast<int>(truth[i]);
      if (e < 0 || e >= k || t < 0 || t >= k) {
        throw std::invalid_argument("label_accuracy: label out of range");
      }
      if (perm[e] == t) ++agree;
    }
    best = std::max(best, static_cast<double>(agree) / static_cast<double>(estimate.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<double> canonicalize_components(std::span<const double> theta, int k) {
  if (k < 1 || theta.size() != static_cast<std::size_t>(3 * k)) {
    throw std::invalid_argument("canonicalize_components: expected 3K parameters");
  }
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return theta[static_cast<std::size_t>(a)] <
                                              theta[static_cast<std::size_t>(b)]; });
  std::vector<double> out(theta.size());
  const auto kk = static_cast<std::size_t>(k);
  for (std::size_t j = 0; j < kk; ++j) {
    const auto src = static_cast<std::size_t>(order[j]);
    out[j] = theta[src];
    out[kk + j] = theta[kk + src];
    out[2 * kk + j] = theta[2 * kk + src];
  }
  return out;
}

}  // namespace mile::models
