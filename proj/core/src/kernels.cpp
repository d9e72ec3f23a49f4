#include "krisk/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "krisk/error.hpp"

namespace krisk {

Box::Box(std::vector<Interval> sides) : sides_(std::move(sides)) {
  if (sides_.empty()) {
    throw Error(ErrorCode::InvalidParameters, "factor box needs at least one side");
  }
  for (std::size_t i = 0; i < sides_.size(); ++i) {
    const auto& s = sides_[i];
    if (!std::isfinite(s.lo) || !std::isfinite(s.hi) || !(s.hi > s.lo)) {
      throw Error(ErrorCode::InvalidParameters,
                  "factor box side " + std::to_string(i) + " is empty or not finite");
    }
  }
}

Box Box::cube(std::size_t dim, double lo, double hi) {
  return Box(std::vector<Interval>(dim, Interval{lo, hi}));
}

double Box::diagonal() const noexcept {
  double s = 0.0;
  for (const auto& side : sides_) s += side.width() * side.width();
  return std::sqrt(s);
}

double Box::volume() const noexcept {
  double v = 1.0;
  for (const auto& side : sides_) v *= side.width();
  return v;
}

bool Box::contains(std::span<const double> x) const noexcept {
  if (x.size() != sides_.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!sides_[i].contains(x[i])) return false;
  }
  return true;
}

Vector Box::from_unit(std::span<const double> u) const {
  if (u.size() != sides_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "unit point has wrong dimension");
  }
  Vector x(static_cast<Eigen::Index>(u.size()));
  for (std::size_t i = 0; i < u.size(); ++i) {
    x[static_cast<Eigen::Index>(i)] = sides_[i].lo + u[i] * sides_[i].width();
  }
  return x;
}

Vector Box::clamp(const Vector& x) const {
  Vector out = x;
  for (std::size_t i = 0; i < sides_.size(); ++i) {
    auto k = static_cast<Eigen::Index>(i);
    out[k] = std::clamp(out[k], sides_[i].lo, sides_[i].hi);
  }
  return out;
}

KernelSpec::KernelSpec(double gamma, std::vector<double> length_scales,
                       double jitter)
    : gamma_(gamma), lengths_(std::move(length_scales)), jitter_(jitter) {
  if (!(gamma_ > 0.0 && gamma_ <= 2.0)) {
    throw Error(ErrorCode::InvalidParameters,
                "gamma must lie in (0, 2], got " + std::to_string(gamma_));
  }
  if (lengths_.empty()) {
    throw Error(ErrorCode::InvalidParameters, "at least one length-scale is required");
  }
  for (double l : lengths_) {
    if (!(l > 0.0) || !std::isfinite(l)) {
      throw Error(ErrorCode::InvalidParameters,
                  "length-scales must be positive and finite");
    }
  }
  if (!(jitter_ >= 0.0) || !std::isfinite(jitter_)) {
    throw Error(ErrorCode::InvalidParameters, "jitter must be non-negative");
  }
}

TrainingSet::TrainingSet(Matrix points, Vector responses, Box box)
    : points_(std::move(points)), responses_(std::move(responses)), box_(std::move(box)) {
  const auto n = points_.rows();
  if (n == 0) throw Error(ErrorCode::TooFewPoints, "training set is empty");
  if (responses_.size() != n) {
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(n) + " points but " +
                    std::to_string(responses_.size()) + " responses");
  }
  if (static_cast<std::size_t>(points_.cols()) != box_.dimension()) {
    throw Error(ErrorCode::DimensionMismatch,
                "points have dimension " + std::to_string(points_.cols()) +
                    ", factor box has " + std::to_string(box_.dimension()));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(responses_[i])) {
      throw Error(ErrorCode::InvalidParameters,
                  "response " + std::to_string(i) + " is not finite");
    }
    const Vector row = points_.row(i).transpose();
    if (!box_.contains(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())))) {
      throw Error(ErrorCode::OutOfBox,
                  "training point " + std::to_string(i) + " lies outside the factor box");
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (points_.row(i) == points_.row(j)) {
        throw Error(ErrorCode::DegenerateData,
                    "training points " + std::to_string(j) + " and " +
                        std::to_string(i) + " coincide");
      }
    }
  }
}

TrainingSet TrainingSet::augmented(const Matrix& points, const Vector& responses) const {
  Matrix p(points_.rows() + points.rows(), points_.cols());
  p << points_, points;
  Vector y(responses_.size() + responses.size());
  y << responses_, responses;
  return TrainingSet(std::move(p), std::move(y), box_);
}

TrainingSet TrainingSet::with_responses(Vector responses) const {
  return TrainingSet(points_, std::move(responses), box_);
}

GammaExponential::GammaExponential(KernelSpec spec) : spec_(std::move(spec)) {
  inv_lengths_.reserve(spec_.dimension());
  for (double l : spec_.length_scales()) inv_lengths_.push_back(1.0 / l);
}

double GammaExponential::operator()(std::span<const double> a,
                                    std::span<const double> b) const {
  if (a.size() != inv_lengths_.size() || b.size() != inv_lengths_.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "correlation expects vectors of length " +
                    std::to_string(inv_lengths_.size()));
  }
  double r2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = (a[i] - b[i]) * inv_lengths_[i];
    r2 += d * d;
  }
  if (r2 == 0.0) return 1.0;
  const double g = spec_.gamma();
  // r2^(g/2); the g == 2 case skips pow.
  const double e = g == 2.0 ? r2 : std::pow(r2, 0.5 * g);
  return std::exp(-e);
}

double GammaExponential::operator()(const Vector& a, const Vector& b) const {
  return (*this)(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
                 std::span<const double>(b.data(), static_cast<std::size_t>(b.size())));
}

double correlation(const KernelSpec& spec, const Vector& a, const Vector& b) {
  return GammaExponential(spec)(a, b);
}

Matrix correlation_matrix(const KernelSpec& spec, const TrainingSet& set) {
  if (spec.dimension() != set.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "kernel and training set dimensions differ");
  }
  const GammaExponential k(spec);
  const auto n = static_cast<Eigen::Index>(set.size());
  // Row-major copy so each point is contiguous.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> pts = set.points();
  const auto d = static_cast<std::size_t>(pts.cols());
  Matrix sigma(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sigma(i, i) = 1.0;
    std::span<const double> xi(pts.data() + i * pts.cols(), d);
    for (Eigen::Index j = 0; j < i; ++j) {
      std::span<const double> xj(pts.data() + j * pts.cols(), d);
      const double v = k(xi, xj);
      sigma(i, j) = v;
      sigma(j, i) = v;
    }
  }
  return sigma;
}

Vector correlation_vector(const KernelSpec& spec, const TrainingSet& set,
                          const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != set.dimension() ||
      spec.dimension() != set.dimension()) {
    throw Error(ErrorCode::DimensionMismatch,
                "query point has dimension " + std::to_string(x.size()) +
                    ", expected " + std::to_string(set.dimension()));
  }
  const GammaExponential k(spec);
  const auto n = static_cast<Eigen::Index>(set.size());
  Vector out(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Vector xj = set.points().row(j).transpose();
    out[j] = k(x, xj);
  }
  return out;
}

}  // namespace krisk
