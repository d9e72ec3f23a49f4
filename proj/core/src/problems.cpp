#include "krisk/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "krisk/error.hpp"
#include "krisk/posterior.hpp"

namespace krisk {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidParameters, what);
}

double complement_if_lower(double upper_risk, Orientation o) {
  return o == Orientation::Upper ? upper_risk : 1.0 - upper_risk;
}

// Bell-shaped reference problem: centres mu_i1..mu_i5 and width sigma_i of
// each of the ten bumps, as printed (four significant digits).
constexpr double kBellTable[10][6] = {
    {4.889e-1, 6.241e-1, 6.791e-1, 3.955e-1, 3.674e-1, 6.259e-1},
    {5.870e-1, 4.139e-1, 3.091e-1, 2.638e-1, 7.588e-1, 6.297e-1},
    {7.637e-1, 5.588e-1, 1.838e-1, 4.980e-1, 5.179e-1, 6.292e-1},
    {2.318e-1, 3.963e-1, 7.051e-1, 5.586e-1, 7.566e-1, 6.299e-1},
    {5.806e-1, 2.989e-1, 7.137e-1, 3.605e-1, 7.185e-1, 6.298e-1},
    {3.805e-1, 3.022e-1, 2.945e-1, 2.598e-1, 4.635e-1, 6.258e-1},
    {1.684e-1, 7.401e-1, 8.728e-1, 3.555e-1, 1.788e-1, 6.304e-1},
    {7.885e-1, 5.891e-1, 4.363e-1, 5.497e-1, 3.530e-1, 6.300e-1},
    {8.601e-1, 3.204e-1, 6.636e-1, 9.056e-1, 6.854e-1, 6.318e-1},
    {2.995e-1, 8.727e-1, 3.751e-1, 7.984e-1, 8.168e-1, 6.318e-1},
};

}  // namespace

std::string_view to_string(ProblemKind kind) noexcept {
  switch (kind) {
    case ProblemKind::Quadric: return "quadric";
    case ProblemKind::Sine: return "sine";
    case ProblemKind::Bell: return "bell";
  }
  return "unknown";
}

double unit_ball_volume(std::size_t dim) {
  const double d = static_cast<double>(dim);
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

BenchmarkProblem BenchmarkProblem::quadric(std::vector<double> a, double m,
                                           Orientation orientation) {
  require(!a.empty(), "quadric needs at least one coefficient");
  require(m > 0.0 && std::isfinite(m), "quadric threshold must be positive");
  for (std::size_t i = 0; i < a.size(); ++i) {
    require(a[i] > m * m, "quadric coefficient a_" + std::to_string(i + 1) +
                              " must exceed m^2 = " + std::to_string(m * m));
  }
  BenchmarkProblem p(ProblemKind::Quadric, Box::cube(a.size(), -1.0, 1.0),
                     FailureSpec{m, orientation});
  p.quad_a_ = std::move(a);
  return p;
}

BenchmarkProblem BenchmarkProblem::sine(std::vector<int> a, double m,
                                        Orientation orientation) {
  require(!a.empty(), "sine needs at least one coefficient");
  require(m >= -1.0 && m <= 1.0, "sine threshold must lie in [-1, 1]");
  for (int v : a) require(v != 0, "sine coefficients must be non-zero integers");
  BenchmarkProblem p(ProblemKind::Sine, Box::cube(a.size(), 0.0, 1.0),
                     FailureSpec{m, orientation});
  p.sine_a_ = std::move(a);
  return p;
}

BenchmarkProblem BenchmarkProblem::bell(Matrix centres, std::vector<double> widths,
                                        double m, Orientation orientation) {
  const auto r = static_cast<std::size_t>(centres.rows());
  const auto dim = static_cast<std::size_t>(centres.cols());
  require(r > 0 && dim > 0, "bell needs at least one bump");
  require(widths.size() == r, "bell needs one width per centre");
  require(m > 0.0 && std::isfinite(m), "bell threshold must be positive");
  const double d = static_cast<double>(dim);
  const double sigma_max = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * std::pow(m, 1.0 / d));

  std::vector<double> radii(r);
  for (std::size_t i = 0; i < r; ++i) {
    const double s = widths[i];
    require(s > 0.0 && s < sigma_max,
            "bell bump " + std::to_string(i + 1) + ": width " + std::to_string(s) +
                " leaves an empty failure ball (needs 0 < sigma < " +
                std::to_string(sigma_max) + ")");
    radii[i] = std::sqrt(-2.0 * s * s *
                         std::log(m * std::pow(2.0 * std::numbers::pi, 0.5 * d) * std::pow(s, d)));
    for (std::size_t j = 0; j < dim; ++j) {
      const double c = centres(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      require(c - radii[i] >= 0.0 && c + radii[i] <= 1.0,
              "bell bump " + std::to_string(i + 1) + ": failure ball leaves the unit box");
    }
  }
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double dist = (centres.row(static_cast<Eigen::Index>(i)) -
                           centres.row(static_cast<Eigen::Index>(j))).norm();
      require(dist > radii[i] + radii[j],
              "bell bumps " + std::to_string(j + 1) + " and " + std::to_string(i + 1) +
                  " have overlapping failure balls");
    }
  }
  BenchmarkProblem p(ProblemKind::Bell, Box::cube(dim, 0.0, 1.0), FailureSpec{m, orientation});
  p.centres_ = std::move(centres);
  p.widths_ = std::move(widths);
  p.radii_ = std::move(radii);
  return p;
}

double BenchmarkProblem::evaluate(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "point dimension does not match the problem");
  }
  if (!box_.contains(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())))) {
    throw Error(ErrorCode::OutOfBox, "point lies outside the factor box");
  }
  switch (kind_) {
    case ProblemKind::Quadric: {
      double s = 0.0;
      for (std::size_t i = 0; i < quad_a_.size(); ++i) {
        const double xi = x[static_cast<Eigen::Index>(i)];
        s += quad_a_[i] * xi * xi;
      }
      return std::sqrt(s);
    }
    case ProblemKind::Sine: {
      double s = 0.0;
      for (std::size_t i = 0; i < sine_a_.size(); ++i) {
        s += sine_a_[i] * x[static_cast<Eigen::Index>(i)];
      }
      return std::sin(2.0 * std::numbers::pi * s);
    }
    case ProblemKind::Bell: {
      const double d = static_cast<double>(dimension());
      double best = 0.0;
      for (Eigen::Index i = 0; i < centres_.rows(); ++i) {
        const double s = widths_[static_cast<std::size_t>(i)];
        const double r2 = (x.transpose() - centres_.row(i)).squaredNorm();
        const double f = std::exp(-0.5 * r2 / (s * s)) /
                         std::pow(std::sqrt(2.0 * std::numbers::pi) * s, d);
        best = std::max(best, f);
      }
      return best;
    }
  }
  return 0.0;
}

double BenchmarkProblem::theoretical_risk() const {
  const double d = static_cast<double>(dimension());
  const double m = failure_.threshold;
  double upper = 0.0;
  switch (kind_) {
    case ProblemKind::Quadric: {
      // {y <= m} is an ellipsoid with semi-axes m / sqrt(a_i), inside [-1,1]^D.
      double prod = 1.0;
      for (double a : quad_a_) prod /= std::sqrt(a);
      const double inner = unit_ball_volume(dimension()) * std::pow(m, d) * prod / std::pow(2.0, d);
      upper = 1.0 - inner;
      break;
    }
    case ProblemKind::Sine:
      upper = 0.5 - std::asin(m) / std::numbers::pi;
      break;
    case ProblemKind::Bell: {
      double sum = 0.0;
      for (double r : radii_) sum += std::pow(r, d);
      upper = unit_ball_volume(dimension()) * sum;
      break;
    }
  }
  return complement_if_lower(upper, failure_.orientation);
}

std::vector<BenchmarkProblem> reference_problems() {
  std::vector<BenchmarkProblem> out;
  // The quadric reference risk 1.008e-1 is the volume of the ellipsoid
  // {y <= 1.9}, so this configuration fails below the threshold.
  out.push_back(BenchmarkProblem::quadric({4.0, 4.2, 4.4, 4.6, 4.8}, 1.9, Orientation::Lower));
  out.push_back(BenchmarkProblem::sine({1, -1, 2}, 0.8));
  Matrix centres(10, 5);
  std::vector<double> widths(10);
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 5; ++j) centres(i, j) = kBellTable[i][j];
    widths[static_cast<std::size_t>(i)] = kBellTable[i][5];
  }
  out.push_back(BenchmarkProblem::bell(std::move(centres), std::move(widths), 0.1));
  return out;
}

BenchmarkProblem reference_problem(std::string_view name) {
  for (auto& p : reference_problems()) {
    if (p.name() == name) return p;
  }
  throw Error(ErrorCode::Config, "unknown benchmark '" + std::string(name) +
                                     "' (expected quadric, sine or bell)");
}

double RelativeErrorStats::quantile(double p) const {
  if (samples.empty()) return 0.0;
  const auto n = samples.size();
  auto idx = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
  idx = std::clamp<std::size_t>(idx, 1, n);
  return samples[idx - 1];
}

std::vector<double> default_error_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 60; ++i) g.push_back(std::pow(10.0, -5.0 + i / 10.0));
  return g;
}

RelativeErrorStats relative_error_stats(const Field& field, const BenchmarkProblem& problem,
                                        std::size_t probes, std::uint64_t seed,
                                        const std::vector<double>& grid) {
  if (probes == 0) throw Error(ErrorCode::InvalidParameters, "need at least one probe");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t dim = problem.dimension();
  std::vector<double> errors;
  errors.reserve(probes);
  std::vector<double> u(dim);
  while (errors.size() < probes) {
    for (auto& v : u) v = unit(rng);
    const Vector x = problem.box().from_unit(u);
    const double y = problem.evaluate(x);
    if (std::abs(y) < 1e-12) continue;
    errors.push_back(std::abs((field.predict(x).location - y) / y));
  }
  std::sort(errors.begin(), errors.end());
  RelativeErrorStats out;
  double sum = 0.0;
  for (double e : errors) sum += e;
  out.mean = sum / static_cast<double>(errors.size());
  for (double t : grid) {
    const auto above = errors.end() - std::upper_bound(errors.begin(), errors.end(), t);
    out.ccdf.emplace_back(t, static_cast<double>(above) / static_cast<double>(errors.size()));
  }
  out.samples = std::move(errors);
  return out;
}

TrainingSet sample_training_set(const BenchmarkProblem& problem, std::size_t n,
                                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t dim = problem.dimension();
  Matrix pts(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  Vector y(static_cast<Eigen::Index>(n));
  std::vector<double> u(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : u) v = unit(rng);
    const Vector x = problem.box().from_unit(u);
    pts.row(static_cast<Eigen::Index>(i)) = x.transpose();
    y[static_cast<Eigen::Index>(i)] = problem.evaluate(x);
  }
  return TrainingSet(std::move(pts), std::move(y), problem.box());
}

}  // namespace krisk
