#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "krisk/failure.hpp"
#include "krisk/kernels.hpp"

namespace krisk {

class Field;

enum class ProblemKind { Quadric, Sine, Bell };

std::string_view to_string(ProblemKind kind) noexcept;

/// Closed-form test function on a box with an exactly known failure volume.
///
/// - quadric: y = sqrt(sum a_i x_i^2) on [-1,1]^D, needs m > 0 and a_i > m^2
///   (the ellipsoid {y <= m} then sits inside the box);
/// - sine: y = sin(2 pi sum a_i x_i) on [0,1]^D with non-zero integer a_i;
/// - bell: y = max_i of R isotropic Gaussian bumps on [0,1]^D whose
///   super-level balls {f_i > m} are non-empty, inside the box and disjoint.
///
/// Parameters are validated at construction (InvalidParameters).
class BenchmarkProblem {
 public:
  static BenchmarkProblem quadric(std::vector<double> a, double m,
                                  Orientation orientation = Orientation::Upper);
  static BenchmarkProblem sine(std::vector<int> a, double m,
                               Orientation orientation = Orientation::Upper);
  static BenchmarkProblem bell(Matrix centres, std::vector<double> widths, double m,
                               Orientation orientation = Orientation::Upper);

  ProblemKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept { return to_string(kind_); }
  std::size_t dimension() const noexcept { return box_.dimension(); }
  const Box& box() const noexcept { return box_; }
  const FailureSpec& failure() const noexcept { return failure_; }

  const std::vector<double>& quadric_coefficients() const noexcept { return quad_a_; }
  const std::vector<int>& sine_coefficients() const noexcept { return sine_a_; }
  const Matrix& bell_centres() const noexcept { return centres_; }
  const std::vector<double>& bell_widths() const noexcept { return widths_; }
  /// Radii r_i of the balls {f_i > m}.
  const std::vector<double>& bell_radii() const noexcept { return radii_; }

  double evaluate(const Vector& x) const;
  /// Exact P-measure of the failure set under the uniform law on the box.
  double theoretical_risk() const;

 private:
  BenchmarkProblem(ProblemKind kind, Box box, FailureSpec failure)
      : kind_(kind), box_(std::move(box)), failure_(failure) {}

  ProblemKind kind_;
  Box box_;
  FailureSpec failure_;
  std::vector<double> quad_a_;
  std::vector<int> sine_a_;
  Matrix centres_;
  std::vector<double> widths_;
  std::vector<double> radii_;
};

/// Volume of the unit ball in dimension D.
double unit_ball_volume(std::size_t dim);

/// The three reference configurations (quadric D=5, sine D=3, bell D=5).
std::vector<BenchmarkProblem> reference_problems();

/// Looks up one of reference_problems() by name; Config error if unknown.
BenchmarkProblem reference_problem(std::string_view name);

struct RelativeErrorStats {
  double mean = 0.0;
  /// (threshold, P(eps_r > threshold)) on the requested grid.
  std::vector<std::pair<double, double>> ccdf;
  /// Sorted error samples.
  std::vector<double> samples;

  /// Smallest threshold t with P(eps_r > t) <= 1 - p.
  double quantile(double p) const;
};

/// Default ccdf grid: 61 thresholds log-spaced over [1e-5, 10].
std::vector<double> default_error_grid();

/// Monte Carlo estimate of |E(Y_t) - y(t)| / |y(t)| over uniform probes.
/// Probes where |y| < 1e-12 are redrawn.
RelativeErrorStats relative_error_stats(const Field& field, const BenchmarkProblem& problem,
                                        std::size_t probes, std::uint64_t seed,
                                        const std::vector<double>& grid = default_error_grid());

/// Random design of n points, uniform in the box, evaluated on the problem.
TrainingSet sample_training_set(const BenchmarkProblem& problem, std::size_t n,
                                std::uint64_t seed);

}  // namespace krisk
