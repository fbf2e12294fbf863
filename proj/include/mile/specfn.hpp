#pragma once

namespace mile::specfn {

// Natural log of the gamma function. Argument must be finite and > 0;
// anything else raises std::domain_error. Accuracy is ~1e-13 relative
// over [1e-3, 1e8].
double log_gamma(double x);

// First derivative of log_gamma (psi function). Same domain contract.
double digamma(double x);

// Second derivative of log_gamma. Same domain contract.
double trigamma(double x);

}  // namespace mile::specfn
