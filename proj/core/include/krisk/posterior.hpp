#pragma once

#include <optional>

#include "krisk/kernels.hpp"
#include "krisk/linalg.hpp"

namespace krisk {

/// Univariate marginal of a conditioned field at one point.
///
/// `dof == 0` tags a Gaussian marginal (scale is then the standard deviation);
/// otherwise it is a location-scale Student law with `dof` degrees of freedom.
struct PointPrediction {
  double location = 0.0;
  double scale = 0.0;
  int dof = 0;

  bool gaussian() const noexcept { return dof == 0; }
};

/// Common interface of every conditioned field.
class Field {
 public:
  virtual ~Field() = default;
  virtual PointPrediction predict(const Vector& x) const = 0;
  virtual const TrainingSet& training() const noexcept = 0;
  virtual const KernelSpec& kernel() const noexcept = 0;
  std::size_t dimension() const noexcept { return training().dimension(); }
};

/// Shared conditioning state: factor of Sigma and the GLS quantities
/// 1 Sigma^-1 1^T and mu_hat = y Sigma^-1 1^T / 1 Sigma^-1 1^T.
class Conditioning {
 public:
  Conditioning(TrainingSet set, KernelSpec spec);

  struct Terms {
    double k_weights;  // k(x) . w for the weights handed in
    double k_quad;     // k(x) Sigma^-1 k(x)^T
    double one_k;      // 1 Sigma^-1 k(x)^T
  };

  /// Evaluates the k(x)-dependent terms; `weights` is Sigma^-1 r for some r.
  Terms terms(const Vector& x, const Vector& weights) const;

  const TrainingSet& training() const noexcept { return set_; }
  const KernelSpec& kernel() const noexcept { return spec_; }
  const SpdFactorization& factorization() const noexcept { return fact_; }
  double one_quad() const noexcept { return one_quad_; }
  double gls_mean() const noexcept { return gls_mean_; }
  /// Sigma^-1 (y - c 1)^T
  Vector weights_for(double centre) const;
  /// Index of a training point equal to x, when the factor carries no
  /// jitter; the marginal there is a Dirac at the observed response.
  std::optional<std::size_t> observed_at(const Vector& x) const;

 private:
  TrainingSet set_;
  KernelSpec spec_;
  SpdFactorization fact_;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows_;
  Vector one_half_;  // L^-1 1
  double one_quad_ = 0.0;
  double gls_mean_ = 0.0;
};

class GaussianPosterior final : public Field {
 public:
  enum class Kind { KnownMean, MixtureMean };

  GaussianPosterior(Conditioning cond, Kind kind, double mean, double variance);

  PointPrediction predict(const Vector& x) const override;
  /// Posterior variance at x (scale squared).
  double variance_at(const Vector& x) const;

  const TrainingSet& training() const noexcept override { return cond_.training(); }
  const KernelSpec& kernel() const noexcept override { return cond_.kernel(); }
  Kind kind() const noexcept { return kind_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return variance_; }
  const Conditioning& conditioning() const noexcept { return cond_; }

 private:
  Conditioning cond_;
  Kind kind_;
  double mean_;
  double variance_;
  Vector weights_;
};

class StudentPosterior final : public Field {
 public:
  explicit StudentPosterior(Conditioning cond);

  PointPrediction predict(const Vector& x) const override;

  const TrainingSet& training() const noexcept override { return cond_.training(); }
  const KernelSpec& kernel() const noexcept override { return cond_.kernel(); }
  int dof() const noexcept { return dof_; }
  double gls_mean() const noexcept { return cond_.gls_mean(); }
  /// (y - mu 1) Sigma^-1 (y - mu 1)^T
  double dispersion() const noexcept { return dispersion_; }
  /// (y - mu 1) Sigma^-1 y^T, the other written form of the same quantity.
  double dispersion_against_y() const;
  const Conditioning& conditioning() const noexcept { return cond_; }

 private:
  Conditioning cond_;
  int dof_;
  double dispersion_;
  Vector weights_;
};

/// Gaussian prior with known constant mean and variance.
GaussianPosterior condition_gaussian(const TrainingSet& set, const KernelSpec& spec,
                                     double mean, double variance);

/// Uniform random mean in the improper limit; mean is the GLS estimate.
GaussianPosterior condition_mixture_mean(const TrainingSet& set, const KernelSpec& spec,
                                         double variance);

/// Uniform random mean and standard deviation in the improper limit.
StudentPosterior condition_student(const TrainingSet& set, const KernelSpec& spec);

double student_pdf(const PointPrediction& p, double t);

/// P(Y > m). A zero scale is treated as a Dirac mass at the location.
double student_cdf_upper(const PointPrediction& p, double m);

/// Half-width of the central interval of the given confidence level.
double interval_half_width(const PointPrediction& p, double level);

/// Log density of the p-variate Student law with scale matrix `scale`.
double mvt_logpdf(const Vector& location, const Matrix& scale, int dof,
                  const Vector& t);

}  // namespace krisk
