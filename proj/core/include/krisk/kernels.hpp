#pragma once

#include <concepts>
#include <span>
#include <vector>

#include "krisk/linalg.hpp"

namespace krisk {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double width() const noexcept { return hi - lo; }
  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Axis-aligned factor box.
class Box {
 public:
  Box() = default;
  explicit Box(std::vector<Interval> sides);

  /// [lo, hi]^dim
  static Box cube(std::size_t dim, double lo, double hi);

  std::size_t dimension() const noexcept { return sides_.size(); }
  const std::vector<Interval>& sides() const noexcept { return sides_; }
  const Interval& operator[](std::size_t i) const { return sides_[i]; }

  double diagonal() const noexcept;
  double volume() const noexcept;
  bool contains(std::span<const double> x) const noexcept;

  /// Affine image of a point of the unit cube.
  Vector from_unit(std::span<const double> u) const;
  Vector clamp(const Vector& x) const;

  friend bool operator==(const Box&, const Box&) = default;

 private:
  std::vector<Interval> sides_;
};

/// Anisotropic gamma-exponential correlation parameters. Bounds are checked
/// at construction so evaluation never has to.
class KernelSpec {
 public:
  KernelSpec(double gamma, std::vector<double> length_scales,
             double jitter = 0.0);

  double gamma() const noexcept { return gamma_; }
  const std::vector<double>& length_scales() const noexcept { return lengths_; }
  double jitter() const noexcept { return jitter_; }
  std::size_t dimension() const noexcept { return lengths_.size(); }

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;

 private:
  double gamma_;
  std::vector<double> lengths_;
  double jitter_;
};

/// Observed design: n distinct points inside a factor box with responses.
class TrainingSet {
 public:
  TrainingSet(Matrix points, Vector responses, Box box);

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(points_.rows());
  }
  std::size_t dimension() const noexcept {
    return static_cast<std::size_t>(points_.cols());
  }
  const Matrix& points() const noexcept { return points_; }
  const Vector& responses() const noexcept { return responses_; }
  const Box& box() const noexcept { return box_; }

  Vector point(std::size_t i) const { return points_.row(static_cast<Eigen::Index>(i)).transpose(); }

  /// Copy with extra observations appended (same validation rules).
  TrainingSet augmented(const Matrix& points, const Vector& responses) const;
  TrainingSet with_responses(Vector responses) const;

 private:
  Matrix points_;
  Vector responses_;
  Box box_;
};

/// Anything usable as a stationary correlation: callable on two points and
/// equal to one on the diagonal. Only the gamma-exponential family ships.
template <typename K>
concept CorrelationKernel = requires(const K& k, const Vector& a, const Vector& b) {
  { k(a, b) } -> std::convertible_to<double>;
  { k.dimension() } -> std::convertible_to<std::size_t>;
};

class GammaExponential {
 public:
  explicit GammaExponential(KernelSpec spec);

  double operator()(const Vector& a, const Vector& b) const;
  double operator()(std::span<const double> a, std::span<const double> b) const;
  std::size_t dimension() const noexcept { return spec_.dimension(); }
  const KernelSpec& spec() const noexcept { return spec_; }

 private:
  KernelSpec spec_;
  std::vector<double> inv_lengths_;
};

static_assert(CorrelationKernel<GammaExponential>);

/// exp(-(sum_i ((a_i - b_i) / l_i)^2)^(gamma / 2))
double correlation(const KernelSpec& spec, const Vector& a, const Vector& b);

/// Sigma_ij = k(x_i, x_j); symmetric with unit diagonal.
Matrix correlation_matrix(const KernelSpec& spec, const TrainingSet& set);

/// k(x)_j = k(x, x_j).
Vector correlation_vector(const KernelSpec& spec, const TrainingSet& set,
                          const Vector& x);

}  // namespace krisk
