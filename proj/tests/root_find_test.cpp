#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mile/root_find.hpp"
#include "mile/specfn.hpp"

using namespace mile;
using mile::specfn::digamma;
using mile::specfn::trigamma;

namespace {

// Bisection-only reference solver, independent of solve_scalar_root.
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
  double flo = f(lo);
  for (int i = 0; i < 200 && hi - lo > tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((flo <= 0.0) == (fm <= 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Beta(5,5) CDF (binomial-sum identity) and its quantile via bisection.
double beta55_cdf(double x) {
  static const double binom[] = {126.0, 84.0, 36.0, 9.0, 1.0};  // C(9, j) for j = 5..9
  double acc = 0.0;
  for (int j = 5; j <= 9; ++j) acc += binom[j - 5] * std::pow(x, j) * std::pow(1.0 - x, 9 - j);
  return acc;
}

double beta55_quantile(double p) {
  return bisect([p](double x) { return beta55_cdf(x) - p; }, 0.0, 1.0, 1e-13);
}

}  // namespace

TEST_CASE("scalar root of x^2 - 4") {
  auto f = [](double x) { return x * x - 4.0; };
  auto df = [](double x) { return 2.0 * x; };
  ScalarRootConfig cfg;
  cfg.lower = 0.0;
  cfg.upper = 3.0;
  CHECK(std::fabs(solve_scalar_root(f, df, cfg) - 2.0) < 1e-9);
  CHECK(std::fabs(solve_scalar_root(f, cfg) - 2.0) < 1e-9);
}

TEST_CASE("scalar root rejects a bracket without sign change") {
  ScalarRootConfig cfg;
  cfg.lower = 1.0;
  cfg.upper = 2.0;
  CHECK_THROWS_AS(solve_scalar_root([](double x) { return x + 10.0; }, cfg),
                  std::invalid_argument);
  ScalarRootConfig empty;
  empty.lower = 2.0;
  empty.upper = 1.0;
  CHECK_THROWS_AS(solve_scalar_root([](double x) { return x; }, empty), std::invalid_argument);
}

TEST_CASE("every evaluation stays inside the bracket") {
  // Flat tails invite Newton overshoot; the safeguard must bisect instead.
  std::vector<double> visited;
  auto f = [&visited](double x) {
    visited.push_back(x);
    return std::tanh(10.0 * (x - 2.5));
  };
  auto df = [](double x) {
    const double t = std::tanh(10.0 * (x - 2.5));
    return 10.0 * (1.0 - t * t);
  };
  ScalarRootConfig cfg;
  cfg.lower = 0.0;
  cfg.upper = 3.0;
  const double root = solve_scalar_root(f, df, cfg);
  CHECK(std::fabs(root - 2.5) < 1e-9);
  for (double x : visited) {
    CHECK(x >= 0.0);
    CHECK(x <= 3.0);
  }
}

TEST_CASE("concentration equation: root matches bisection when one exists") {
  // 2(psi(2t) - psi(t)) decreases from +inf to 2 ln 2, so f(t) = that + c
  // has a root iff c < -2 ln 2.
  const double c = -2.3;
  auto f = [c](double t) { return 2.0 * (digamma(2.0 * t) - digamma(t)) + c; };
  auto df = [](double t) { return 4.0 * trigamma(2.0 * t) - 2.0 * trigamma(t); };
  auto bracket = expand_bracket(f, 1e-3, 1e4);
  REQUIRE(bracket.has_value());
  ScalarRootConfig cfg;
  cfg.lower = bracket->first;
  cfg.upper = bracket->second;
  const double root = solve_scalar_root(f, df, cfg);
  const double oracle = bisect(f, bracket->first, bracket->second, 1e-12);
  CHECK(std::fabs(root - oracle) < 1e-8);
  CHECK(std::fabs(f(root)) < 1e-9);
}

TEST_CASE("concentration equation at the asymptote has no finite root") {
  // c = -2 ln 2 puts the root at infinity: no bracket can be found.
  const double c = -2.0 * std::log(2.0);
  auto f = [c](double t) { return 2.0 * (digamma(2.0 * t) - digamma(t)) + c; };
  CHECK_FALSE(expand_bracket(f, 1e-3, 1e4).has_value());
}

TEST_CASE("expand_bracket grows an interval to cover the root") {
  auto f = [](double x) { return x - 5.0; };
  auto bracket = expand_bracket(f, 0.5, 1.0);
  REQUIRE(bracket.has_value());
  CHECK(bracket->first <= 5.0);
  CHECK(bracket->second >= 5.0);
  ScalarRootConfig cfg;
  cfg.lower = bracket->first;
  cfg.upper = bracket->second;
  CHECK(std::fabs(solve_scalar_root(f, cfg) - 5.0) < 1e-9);
}

TEST_CASE("damped Newton solves a linear system in one step") {
  auto f = [](const std::vector<double>& x) { return std::vector<double>{x[0] - 1.0}; };
  auto jac = [](const std::vector<double>&) { return std::vector<double>{1.0}; };
  const auto x = damped_newton(f, jac, {5.0});
  CHECK(std::fabs(x[0] - 1.0) < 1e-12);
}

TEST_CASE("damped Newton recovers Beta shapes from the digamma system") {
  // Right-hand sides from an exact Beta(5,5) quantile grid, so the MLE
  // system psi(a) - psi(a+b) = mean log z, psi(b) - psi(a+b) = mean log(1-z)
  // should return close to (5, 5).
  const int n = 200;
  double c1 = 0.0, c2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = beta55_quantile((i + 0.5) / n);
    c1 += std::log(z);
    c2 += std::log1p(-z);
  }
  c1 /= n;
  c2 /= n;
  auto f = [&](const std::vector<double>& x) {
    const double common = digamma(x[0] + x[1]);
    return std::vector<double>{digamma(x[0]) - common - c1, digamma(x[1]) - common - c2};
  };
  auto jac = [&](const std::vector<double>& x) {
    const double tc = trigamma(x[0] + x[1]);
    return std::vector<double>{trigamma(x[0]) - tc, -tc, -tc, trigamma(x[1]) - tc};
  };
  const auto ab = damped_newton(f, jac, {1.0, 1.0});
  CHECK(std::fabs(ab[0] - 5.0) < 0.5);
  CHECK(std::fabs(ab[1] - 5.0) < 0.5);
  const auto res = f(ab);
  CHECK(std::fabs(res[0]) < 1e-10);
  CHECK(std::fabs(res[1]) < 1e-10);
}

TEST_CASE("damped Newton reports failures") {
  auto f = [](const std::vector<double>& x) {
    return std::vector<double>{x[0] + x[1], x[0] + x[1]};
  };
  auto jac = [](const std::vector<double>&) {
    return std::vector<double>{1.0, 1.0, 1.0, 1.0};
  };
  CHECK_THROWS_AS(damped_newton(f, jac, {1.0, 2.0}), std::runtime_error);

  auto g = [](const std::vector<double>& x) { return std::vector<double>{x[0] * x[0] * x[0] - 1.0}; };
  auto gj = [](const std::vector<double>& x) { return std::vector<double>{3.0 * x[0] * x[0]}; };
  DampedNewtonConfig strict;
  strict.max_iterations = 1;
  CHECK_THROWS_AS(damped_newton(g, gj, {10.0}, strict), std::runtime_error);
}
