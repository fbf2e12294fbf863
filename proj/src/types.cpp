#include "mile/types.hpp"

#include <cmath>
#include <stdexcept>

namespace mile {

namespace {

std::string fmt_coord(const std::string& name, std::size_t i, double v) {
  return name.empty() ? "coordinate " + std::to_string(i) + " = " + std::to_string(v)
                      : name + " = " + std::to_string(v);
}

}  // namespace

DomainSpec::DomainSpec(std::vector<CoordBounds> coords) : coords_(std::move(coords)) {
  for (const auto& c : coords_) {
    if (std::isnan(c.lower) || std::isnan(c.upper) || !(c.lower < c.upper)) {
      throw std::invalid_argument("DomainSpec: bounds for " + c.name + " are not an interval");
    }
  }
}

bool DomainSpec::contains(std::span<const double> values) const {
  if (values.size() != coords_.size()) return false;
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (std::isnan(values[i]) || values[i] <= coords_[i].lower || values[i] >= coords_[i].upper) {
      return false;
    }
  }
  return true;
}

void DomainSpec::check(std::span<const double> values) const {
  if (values.size() != coords_.size()) {
    throw std::domain_error("parameter vector has " + std::to_string(values.size()) +
                            " coordinates, domain expects " + std::to_string(coords_.size()));
  }
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (std::isnan(values[i]) || values[i] <= coords_[i].lower || values[i] >= coords_[i].upper) {
      throw std::domain_error("parameter out of domain: " +
                              fmt_coord(coords_[i].name, i, values[i]));
    }
  }
}

ParameterVector::ParameterVector(std::vector<double> values,
                                 std::shared_ptr<const DomainSpec> domain)
    : values_(std::move(values)), domain_(std::move(domain)) {
  if (!domain_) throw std::invalid_argument("ParameterVector: null domain");
  domain_->check(values_);
}

LatentSpace LatentSpace::continuous_box(std::vector<Interval> bounds) {
  for (const auto& b : bounds) {
    if (std::isnan(b.lower) || std::isnan(b.upper) || !(b.lower < b.upper)) {
      throw std::invalid_argument("LatentSpace: degenerate interval");
    }
  }
  LatentSpace s;
  s.kind_ = Kind::kContinuousBox;
  s.dim_ = bounds.size();
  s.bounds_ = std::move(bounds);
  return s;
}

LatentSpace LatentSpace::continuous_box(std::size_t dimension, Interval bounds) {
  return continuous_box(std::vector<Interval>(dimension, bounds));
}

LatentSpace LatentSpace::categorical(std::size_t dimension, int n_categories) {
  if (n_categories < 2) throw std::invalid_argument("LatentSpace: need >= 2 categories");
  LatentSpace s;
  s.kind_ = Kind::kCategorical;
  s.dim_ = dimension;
  s.n_categories_ = n_categories;
  return s;
}

int LatentSpace::n_categories() const {
  if (kind_ != Kind::kCategorical) throw std::logic_error("latent space is not categorical");
  return n_categories_;
}

const Interval& LatentSpace::bounds(std::size_t i) const {
  if (kind_ != Kind::kContinuousBox) throw std::logic_error("latent space is not continuous");
  return bounds_[i];
}

bool LatentSpace::contains(std::span<const double> values) const {
  if (values.size() != dim_) return false;
  if (kind_ == Kind::kCategorical) {
    for (double v : values) {
      int k = static_cast<int>(v);
      if (v != static_cast<double>(k) || k < 0 || k >= n_categories_) return false;
    }
    return true;
  }
  for (std::size_t i = 0; i < dim_; ++i) {
    if (std::isnan(values[i]) || values[i] <= bounds_[i].lower || values[i] >= bounds_[i].upper) {
      return false;
    }
  }
  return true;
}

void LatentSpace::clamp(std::span<double> values) const {
  if (values.size() != dim_) throw std::invalid_argument("clamp: dimension mismatch");
  if (kind_ == Kind::kCategorical) {
    if (!contains(values)) throw std::domain_error("categorical latent vector has invalid label");
    return;
  }
  for (std::size_t i = 0; i < dim_; ++i) {
    if (std::isnan(values[i])) throw std::domain_error("latent coordinate is NaN");
    const auto& b = bounds_[i];
    if (std::isfinite(b.lower) && values[i] < b.lower + kBoundaryEps) {
      values[i] = b.lower + kBoundaryEps;
    }
    if (std::isfinite(b.upper) && values[i] > b.upper - kBoundaryEps) {
      values[i] = b.upper - kBoundaryEps;
    }
  }
}

LatentVector::LatentVector(std::vector<double> values, std::shared_ptr<const LatentSpace> space)
    : values_(std::move(values)), space_(std::move(space)) {
  if (!space_) throw std::invalid_argument("LatentVector: null space");
  if (values_.size() != space_->dimension()) {
    throw std::invalid_argument("LatentVector: dimension mismatch");
  }
}

GroupedDataset::GroupedDataset(std::size_t n_individuals, std::size_t obs_per_individual,
                               std::vector<double> values)
    : n_(n_individuals), m_(obs_per_individual), values_(std::move(values)) {
  validate();
}

GroupedDataset::GroupedDataset(std::size_t n_individuals, std::vector<double> timestamps,
                               double horizon, std::vector<double> values)
    : n_(n_individuals),
      m_(timestamps.size()),
      values_(std::move(values)),
      timestamps_(std::move(timestamps)),
      horizon_(horizon) {
  if (!std::isfinite(horizon_) || horizon_ <= 0.0) {
    throw std::invalid_argument("GroupedDataset: horizon must be finite and > 0");
  }
  double prev = 0.0;
  for (double t : timestamps_) {
    if (!std::isfinite(t) || t <= prev || t >= horizon_) {
      throw std::invalid_argument(
          "GroupedDataset: timestamps must be strictly increasing inside (0, horizon)");
    }
    prev = t;
  }
  validate();
}

void GroupedDataset::validate() const {
  if (n_ == 0) throw std::invalid_argument("GroupedDataset: need at least one individual");
  if (m_ == 0) throw std::invalid_argument("GroupedDataset: need at least one observation");
  if (values_.size() != n_ * m_) {
    throw std::invalid_argument("GroupedDataset: expected " + std::to_string(n_ * m_) +
                                " values, got " + std::to_string(values_.size()));
  }
  for (double v : values_) {
    if (std::isnan(v)) throw std::invalid_argument("GroupedDataset: NaN observation");
  }
}

GroupedDataset GroupedDataset::without_individual(std::size_t drop) const {
  if (drop >= n_) throw std::out_of_range("without_individual: index out of range");
  if (n_ == 1) throw std::invalid_argument("without_individual: would leave an empty dataset");
  std::vector<double> vals;
  vals.reserve((n_ - 1) * m_);
  for (std::size_t i = 0; i < n_; ++i) {
    if (i == drop) continue;
    auto row = individual(i);
    vals.insert(vals.end(), row.begin(), row.end());
  }
  if (has_timestamps()) {
    return GroupedDataset(n_ - 1, timestamps_, horizon_, std::move(vals));
  }
  return GroupedDataset(n_ - 1, m_, std::move(vals));
}

}  // namespace mile
