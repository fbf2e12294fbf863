#include "mile/specfn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mile::specfn {

namespace {

void require_positive(double x, const char* fn) {
  if (!std::isfinite(x) || x <= 0.0) {
    throw std::domain_error(std::string(fn) + ": argument must be finite and > 0, got " +
                            std::to_string(x));
  }
}

constexpr double kHalfLogTwoPi = 0.91893853320467274178;

// All three functions shift the argument above this threshold by the
// recurrence and evaluate a Bernoulli-number asymptotic tail there.
constexpr double kAsymptoticCutoff = 6.0;

// B_{2n} / (2n (2n-1)), n = 1..8, for the Stirling series of log_gamma.
constexpr double kLogGammaTail[] = {
    1.0 / 12.0,     -1.0 / 360.0,       1.0 / 1260.0, -1.0 / 1680.0,
    1.0 / 1188.0,   -691.0 / 360360.0,  1.0 / 156.0,  -3617.0 / 122400.0,
};

// B_{2n} / (2n), n = 1..8, for the digamma series.
constexpr double kDigammaTail[] = {
    1.0 / 12.0,   -1.0 / 120.0,       1.0 / 252.0, -1.0 / 240.0,
    1.0 / 132.0,  -691.0 / 32760.0,   1.0 / 12.0,  -3617.0 / 8160.0,
};

// B_{2n}, n = 1..8, for the trigamma series.
constexpr double kTrigammaTail[] = {
    1.0 / 6.0,  -1.0 / 30.0,      1.0 / 42.0, -1.0 / 30.0,
    5.0 / 66.0, -691.0 / 2730.0,  7.0 / 6.0,  -3617.0 / 510.0,
};

}  // namespace

double log_gamma(double x) {
  require_positive(x, "log_gamma");
  // ln Gamma(x) = ln Gamma(x + k) - ln(x (x+1) ... (x+k-1))
  double shift_log = 0.0;
  while (x < kAsymptoticCutoff) {
    shift_log += std::log(x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double tail = 0.0;
  double p = inv;
  for (double c : kLogGammaTail) {
    tail += c * p;
    p *= inv2;
  }
  return (x - 0.5) * std::log(x) - x + kHalfLogTwoPi + tail - shift_log;
}

double digamma(double x) {
  require_positive(x, "digamma");
  // psi(x) = psi(x + k) - sum_{j=0}^{k-1} 1/(x + j)
  double shift = 0.0;
  while (x < kAsymptoticCutoff) {
    shift += 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double tail = 0.0;
  double p = inv2;
  for (double c : kDigammaTail) {
    tail += c * p;
    p *= inv2;
  }
  return std::log(x) - 0.5 * inv - tail - shift;
}

double trigamma(double x) {
  require_positive(x, "trigamma");
  // psi'(x) = psi'(x + k) + sum_{j=0}^{k-1} 1/(x + j)^2
  double shift = 0.0;
  while (x < kAsymptoticCutoff) {
    shift += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  double tail = 0.0;
  double p = inv * inv2;
  for (double c : kTrigammaTail) {
    tail += c * p;
    p *= inv2;
  }
  return inv + 0.5 * inv2 + tail + shift;
}

}  // namespace mile::specfn
