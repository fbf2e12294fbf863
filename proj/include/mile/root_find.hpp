#pragma once

#include <functional>
#include <optional>
#include <vector>

namespace mile {

struct ScalarRootConfig {
  double lower = 0.0;
  double upper = 0.0;
  double tolerance = 1e-10;  // on both |f| and bracket width
  int max_iterations = 200;
};

// Root of f inside [lower, upper]; f must change sign over the bracket
// (throws std::invalid_argument otherwise). Newton steps from `df` are
// taken when they stay inside the current bracket, bisection otherwise,
// so the bracket never degrades.
double solve_scalar_root(const std::function<double(double)>& f,
                         const std::function<double(double)>& df, ScalarRootConfig cfg);

// Derivative-free variant (pure safeguarded bisection/secant).
double solve_scalar_root(const std::function<double(double)>& f, ScalarRootConfig cfg);

// Expands [lo, hi] geometrically (factor 4) until f changes sign or the
// width limit is hit; returns nullopt when no sign change is found.
std::optional<std::pair<double, double>> expand_bracket(const std::function<double(double)>& f,
                                                        double lo, double hi,
                                                        double lo_limit = 1e-12,
                                                        double hi_limit = 1e12,
                                                        int max_expansions = 60);

struct DampedNewtonConfig {
  double tolerance = 1e-10;  // on the residual max-norm
  int max_iterations = 100;
  int max_halvings = 30;
};

// Solves F(x) = 0 with Newton steps halved until the residual max-norm
// decreases. jac returns the Jacobian row-major (n x n). Throws
// std::runtime_error on a singular Jacobian or failure to converge.
std::vector<double> damped_newton(
    const std::function<std::vector<double>(const std::vector<double>&)>& f,
    const std::function<std::vector<double>(const std::vector<double>&)>& jac,
    std::vector<double> x0, DampedNewtonConfig cfg = {});

}  // namespace mile
