#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mile {

// Log-likelihood value marking an infeasible configuration. It compares
// below every finite value, so rank-based optimizers can sort candidate
// sets without special cases; evaluators must return this (never NaN)
// when a configuration violates a constraint.
inline constexpr double kInfeasibleLogLik = -std::numeric_limits<double>::infinity();

inline bool is_feasible_loglik(double ll) { return ll == ll && ll > kInfeasibleLogLik; }

// Open-interval boundary clamp width used everywhere a latent coordinate
// may touch the edge of its domain.
inline constexpr double kBoundaryEps = 1e-12;

struct CoordBounds {
  std::string name;
  double lower;  // open bound; -inf allowed
  double upper;  // open bound; +inf allowed
};

// Per-coordinate box for a parameter vector. Bounds are open.
class DomainSpec {
 public:
  DomainSpec() = default;
  explicit DomainSpec(std::vector<CoordBounds> coords);

  std::size_t size() const { return coords_.size(); }
  const CoordBounds& coord(std::size_t i) const { return coords_[i]; }
  const std::string& name(std::size_t i) const { return coords_[i].name; }

  bool contains(std::span<const double> values) const;
  // Throws std::domain_error naming the offending coordinate.
  void check(std::span<const double> values) const;

 private:
  std::vector<CoordBounds> coords_;
};

class ParameterVector {
 public:
  ParameterVector(std::vector<double> values, std::shared_ptr<const DomainSpec> domain);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::span<const double> span() const { return values_; }
  const DomainSpec& domain() const { return *domain_; }
  std::shared_ptr<const DomainSpec> domain_ptr() const { return domain_; }

 private:
  std::vector<double> values_;
  std::shared_ptr<const DomainSpec> domain_;
};

struct Interval {
  double lower;
  double upper;
};

// Latent configuration space: either a product of open intervals or a
// product of finite label sets {0, ..., n_categories-1}.
class LatentSpace {
 public:
  enum class Kind { kContinuousBox, kCategorical };

  static LatentSpace continuous_box(std::vector<Interval> bounds);
  // Same open interval replicated over `dimension` coordinates.
  static LatentSpace continuous_box(std::size_t dimension, Interval bounds);
  static LatentSpace categorical(std::size_t dimension, int n_categories);

  Kind kind() const { return kind_; }
  bool is_categorical() const { return kind_ == Kind::kCategorical; }
  std::size_t dimension() const { return dim_; }
  int n_categories() const;
  const Interval& bounds(std::size_t i) const;

  bool contains(std::span<const double> values) const;
  // Pulls continuous coordinates lying on or beyond an open boundary back
  // to boundary +/- kBoundaryEps. Categorical coordinates are validated,
  // not moved.
  void clamp(std::span<double> values) const;

 private:
  Kind kind_ = Kind::kContinuousBox;
  std::size_t dim_ = 0;
  int n_categories_ = 0;
  std::vector<Interval> bounds_;  // continuous only
};

class LatentVector {
 public:
  LatentVector(std::vector<double> values, std::shared_ptr<const LatentSpace> space);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  // Categorical coordinate as its integer label.
  int label(std::size_t i) const { return static_cast<int>(values_[i]); }
  const std::vector<double>& values() const { return values_; }
  std::span<const double> span() const { return values_; }
  const LatentSpace& space() const { return *space_; }
  std::shared_ptr<const LatentSpace> space_ptr() const { return space_; }

 private:
  std::vector<double> values_;
  std::shared_ptr<const LatentSpace> space_;
};

// Result of any fit routine. `loglik` always equals the joint
// log-likelihood of (theta_hat, z_hat) under the model that produced it.
struct FitResult {
  ParameterVector theta_hat;
  LatentVector z_hat;
  double loglik = kInfeasibleLogLik;
  int iterations = 0;
  bool converged = false;
  double wall_time_ms = 0.0;
};

// N individuals, each with M observations, stored row-major. An optional
// shared timestamp grid (strictly increasing, inside (0, horizon)) covers
// point-process style data.
class GroupedDataset {
 public:
  GroupedDataset(std::size_t n_individuals, std::size_t obs_per_individual,
                 std::vector<double> values);
  GroupedDataset(std::size_t n_individuals, std::vector<double> timestamps, double horizon,
                 std::vector<double> values);

  std::size_t n_individuals() const { return n_; }
  std::size_t obs_per_individual() const { return m_; }
  double value(std::size_t i, std::size_t j) const { return values_[i * m_ + j]; }
  std::span<const double> individual(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * m_, m_);
  }
  std::span<const double> all_values() const { return values_; }

  bool has_timestamps() const { return !timestamps_.empty(); }
  std::span<const double> timestamps() const { return timestamps_; }
  double horizon() const { return horizon_; }

  // Copy with one individual removed; timestamps carried over.
  GroupedDataset without_individual(std::size_t i) const;

 private:
  void validate() const;

  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<double> values_;
  std::vector<double> timestamps_;
  double horizon_ = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace mile
