#include "mile/rng.hpp"

#include <cmath>
#include <stdexcept>

#include "mile/specfn.hpp"

namespace mile {

namespace {

constexpr std::uint64_t kWeylIncrement = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer; full avalanche, bijective.
std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

}  // namespace

SeededGenerator::SeededGenerator(std::uint64_t seed) : state_(seed) {}

std::uint64_t SeededGenerator::next_u64() {
  state_ += kWeylIncrement;
  return mix64(state_);
}

double SeededGenerator::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededGenerator::uniform(double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("uniform: empty interval");
  return lo + (hi - lo) * uniform01();
}

double SeededGenerator::normal(double mean, double sd) {
  // Marsaglia polar method; the pair's second member is discarded so that
  // copies of the generator stay exactly one 64-bit counter apart.
  double u, v, s;
  do {
    u = 2.0 * uniform01() - 1.0;
    v = 2.0 * uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  return mean + sd * u * std::sqrt(-2.0 * std::log(s) / s);
}

double SeededGenerator::gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) throw std::invalid_argument("gamma: shape, scale > 0");
  // Marsaglia-Tsang squeeze; shapes below 1 are boosted through
  // G(a) = G(a+1) U^{1/a}.
  if (shape < 1.0) {
    double u = uniform01();
    while (u == 0.0) u = uniform01();
    return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return scale * d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return scale * d * v;
  }
}

double SeededGenerator::beta(double a, double b) {
  const double g1 = gamma(a, 1.0);
  const double g2 = gamma(b, 1.0);
  const double sum = g1 + g2;
  if (sum <= 0.0) return 0.5;  // both gammas underflowed; a,b tiny
  return g1 / sum;
}

double SeededGenerator::cauchy(double location, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("cauchy: scale > 0");
  double u;
  do {
    u = uniform01();
  } while (u == 0.0 || u == 0.5);  // avoid the poles of tan
  return location + scale * std::tan(3.14159265358979323846 * (u - 0.5));
}

double SeededGenerator::log_cauchy(double location, double scale) {
  return std::exp(cauchy(location, scale));
}

long SeededGenerator::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw std::invalid_argument("poisson: mean >= 0");
  if (mean == 0.0) return 0;
  if (mean < 30.0) {
    // Inversion by sequential search.
    const double l = std::exp(-mean);
    long k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform01();
    } while (p > l);
    return k - 1;
  }
  // Hormann's PTRS transformed rejection.
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    double u = uniform01() - 0.5;
    double v = uniform01();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<long>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
    const double rhs = -mean + k * std::log(mean) - specfn::log_gamma(k + 1.0);
    if (lhs <= rhs) return static_cast<long>(k);
  }
}

int SeededGenerator::bernoulli(double p) {
  if (!(p >= 0.0) || !(p <= 1.0)) throw std::invalid_argument("bernoulli: p in [0,1]");
  return uniform01() < p ? 1 : 0;
}

std::uint64_t SeededGenerator::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("below: n must be positive");
  // Rejection to kill modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t r;
  do {
    r = next_u64();
  } while (r >= limit);
  return r % n;
}

SeededGenerator derive_replicate_generator(std::uint64_t master_seed,
                                           std::uint64_t replicate_index) {
  return derive_substream(master_seed, replicate_index, 0);
}

SeededGenerator derive_substream(std::uint64_t master_seed, std::uint64_t replicate_index,
                                 std::uint64_t stream) {
  std::uint64_t s = mix64(master_seed ^ 0x7F4A7C15D1B54A32ULL);
  s = mix64(s ^ (replicate_index * kWeylIncrement + 0x452821E638D01377ULL));
  s = mix64(s ^ (stream * 0xD1342543DE82EF95ULL + 0x9216D5D98979FB1BULL));
  return SeededGenerator(s);
}

}  // namespace mile
