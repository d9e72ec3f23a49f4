#include "krisk/posterior.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "krisk/error.hpp"
#include "krisk/specfun.hpp"

namespace krisk {
namespace {

constexpr double kBracketFloor = -1e-10;

double clamp_bracket(double bracket) {
  if (bracket < kBracketFloor) {
    throw Error(ErrorCode::NumericalBreakdown,
                "posterior variance bracket is " + std::to_string(bracket));
  }
  return bracket < 0.0 ? 0.0 : bracket;
}

void check_point(const Vector& x, std::size_t dim) {
  if (static_cast<std::size_t>(x.size()) != dim) {
    throw Error(ErrorCode::DimensionMismatch,
                "query point has dimension " + std::to_string(x.size()) +
                    ", expected " + std::to_string(dim));
  }
}

}  // namespace

Conditioning::Conditioning(TrainingSet set, KernelSpec spec)
    : set_(std::move(set)), spec_(std::move(spec)) {
  if (spec_.dimension() != set_.dimension()) {
    throw Error(ErrorCode::DimensionMismatch,
                "kernel has " + std::to_string(spec_.dimension()) +
                    " length-scales, data has dimension " +
                    std::to_string(set_.dimension()));
  }
  fact_ = factor(correlation_matrix(spec_, set_), spec_.jitter());
  rows_ = set_.points();
  const auto n = static_cast<Eigen::Index>(set_.size());
  one_half_ = fact_.half_solve(Vector::Ones(n));
  one_quad_ = one_half_.squaredNorm();
  if (!(one_quad_ > 0.0) || !std::isfinite(one_quad_)) {
    throw Error(ErrorCode::DegenerateData, "1 Sigma^-1 1 is not positive");
  }
  const Vector y_half = fact_.half_solve(set_.responses());
  gls_mean_ = y_half.dot(one_half_) / one_quad_;
}

Vector Conditioning::weights_for(double centre) const {
  const Vector r = set_.responses().array() - centre;
  return fact_.solve(r);
}

Conditioning::Terms Conditioning::terms(const Vector& x, const Vector& weights) const {
  check_point(x, set_.dimension());
  const GammaExponential k(spec_);
  const auto n = rows_.rows();
  const auto d = static_cast<std::size_t>(rows_.cols());
  std::span<const double> xs(x.data(), d);
  Vector kx(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    kx[j] = k(xs, std::span<const double>(rows_.data() + j * rows_.cols(), d));
  }
  const Vector half = fact_.half_solve(kx);
  return Terms{kx.dot(weights), half.squaredNorm(), half.dot(one_half_)};
}

GaussianPosterior::GaussianPosterior(Conditioning cond, Kind kind, double mean,
                                     double variance)
    : cond_(std::move(cond)), kind_(kind), mean_(mean), variance_(variance) {
  if (!(variance_ > 0.0) || !std::isfinite(variance_)) {
    throw Error(ErrorCode::InvalidParameters, "prior variance must be positive");
  }
  if (kind_ == Kind::MixtureMean) mean_ = cond_.gls_mean();
  weights_ = cond_.weights_for(mean_);
}

std::optional<std::size_t> Conditioning::observed_at(const Vector& x) const {
  if (fact_.jitter() != 0.0) return std::nullopt;
  check_point(x, set_.dimension());
  for (Eigen::Index j = 0; j < rows_.rows(); ++j) {
    if (rows_.row(j) == x.transpose()) return static_cast<std::size_t>(j);
  }
  return std::nullopt;
}

double GaussianPosterior::variance_at(const Vector& x) const {
  if (cond_.observed_at(x)) return 0.0;
  const auto t = cond_.terms(x, weights_);
  double bracket = 1.0 - t.k_quad;
  if (kind_ == Kind::MixtureMean) {
    bracket += (1.0 - t.one_k) * (1.0 - t.one_k) / cond_.one_quad();
  }
  return variance_ * clamp_bracket(bracket);
}

PointPrediction GaussianPosterior::predict(const Vector& x) const {
  if (const auto i = cond_.observed_at(x)) {
    return PointPrediction{training().responses()(static_cast<Eigen::Index>(*i)), 0.0, 0};
  }
  const auto t = cond_.terms(x, weights_);
  double bracket = 1.0 - t.k_quad;
  if (kind_ == Kind::MixtureMean) {
    bracket += (1.0 - t.one_k) * (1.0 - t.one_k) / cond_.one_quad();
  }
  return PointPrediction{mean_ + t.k_weights,
                         std::sqrt(variance_ * clamp_bracket(bracket)), 0};
}

StudentPosterior::StudentPosterior(Conditioning cond) : cond_(std::move(cond)) {
  const auto& set = cond_.training();
  if (set.size() < 3) {
    throw Error(ErrorCode::TooFewPoints,
                "Student posterior needs at least 3 observations, got " +
                    std::to_string(set.size()));
  }
  const Vector& y = set.responses();
  if ((y.array() == y[0]).all()) {
    throw Error(ErrorCode::DegenerateData, "all responses are equal");
  }
  dof_ = static_cast<int>(set.size()) - 2;
  const Vector r = y.array() - cond_.gls_mean();
  dispersion_ = cond_.factorization().inverse_quadratic(r);
  if (!(dispersion_ > 0.0) || !std::isfinite(dispersion_)) {
    throw Error(ErrorCode::DegenerateData, "residual dispersion is not positive");
  }
  weights_ = cond_.factorization().solve(r);
}

double StudentPosterior::dispersion_against_y() const {
  return weights_.dot(cond_.training().responses());
}

PointPrediction StudentPosterior::predict(const Vector& x) const {
  if (const auto i = cond_.observed_at(x)) {
    return PointPrediction{training().responses()(static_cast<Eigen::Index>(*i)), 0.0, dof_};
  }
  const auto t = cond_.terms(x, weights_);
  const double bracket = 1.0 - t.k_quad +
                         (1.0 - t.one_k) * (1.0 - t.one_k) / cond_.one_quad();
  const double scale2 = dispersion_ / dof_ * clamp_bracket(bracket);
  return PointPrediction{cond_.gls_mean() + t.k_weights, std::sqrt(scale2), dof_};
}

GaussianPosterior condition_gaussian(const TrainingSet& set, const KernelSpec& spec,
                                     double mean, double variance) {
  return GaussianPosterior(Conditioning(set, spec),
                           GaussianPosterior::Kind::KnownMean, mean, variance);
}

GaussianPosterior condition_mixture_mean(const TrainingSet& set, const KernelSpec& spec,
                                         double variance) {
  if (set.size() < 2) {
    throw Error(ErrorCode::TooFewPoints, "mixture-mean posterior needs n >= 2");
  }
  return GaussianPosterior(Conditioning(set, spec),
                           GaussianPosterior::Kind::MixtureMean, 0.0, variance);
}

StudentPosterior condition_student(const TrainingSet& set, const KernelSpec& spec) {
  if (set.size() < 3) {
    throw Error(ErrorCode::TooFewPoints,
                "Student posterior needs at least 3 observations, got " +
                    std::to_string(set.size()));
  }
  return StudentPosterior(Conditioning(set, spec));
}

double student_pdf(const PointPrediction& p, double t) {
  if (p.scale <= 0.0) {
    return t == p.location ? std::numeric_limits<double>::infinity() : 0.0;
  }
  const double z = (t - p.location) / p.scale;
  if (p.gaussian()) {
    return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * p.scale);
  }
  return std::exp(specfun::student_log_pdf(z, p.dof)) / p.scale;
}

double student_cdf_upper(const PointPrediction& p, double m) {
  if (p.scale <= 0.0) return p.location > m ? 1.0 : 0.0;
  const double z = (m - p.location) / p.scale;
  return p.gaussian() ? specfun::normal_upper_tail(z)
                      : specfun::student_upper_tail(z, p.dof);
}

double interval_half_width(const PointPrediction& p, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidParameters, "confidence level must be in (0, 1)");
  }
  const double q = 0.5 * (1.0 + level);
  const double z = p.gaussian() ? specfun::normal_quantile(q)
                                : specfun::student_quantile(q, p.dof);
  return z * p.scale;
}

double mvt_logpdf(const Vector& location, const Matrix& scale, int dof,
                  const Vector& t) {
  const auto p = location.size();
  if (scale.rows() != p || t.size() != p) {
    throw Error(ErrorCode::DimensionMismatch, "mvt dimensions disagree");
  }
  if (dof <= 0) throw Error(ErrorCode::InvalidParameters, "dof must be positive");
  const auto f = factor(scale);
  const double nu = dof;
  const double pd = static_cast<double>(p);
  const double q = f.inverse_quadratic(t - location);
  return std::lgamma(0.5 * (nu + pd)) - std::lgamma(0.5 * nu) -
         0.5 * pd * std::log(std::numbers::pi * nu) - 0.5 * f.log_det() -
         0.5 * (nu + pd) * std::log1p(q / nu);
}

}  // namespace krisk
