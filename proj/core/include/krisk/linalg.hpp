#pragma once

#include <Eigen/Dense>

namespace krisk {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Diagonal regularisation schedule tried when a plain Cholesky fails.
/// The first retry uses `first`, then each retry multiplies by `factor`
/// until `cap` has been tried.
struct JitterLadder {
  double first = 1e-12;
  double factor = 10.0;
  double cap = 1e-4;
};

/// Lower Cholesky factor of A + jitter * I.
///
/// Immutable once built; concurrent readers may share one instance.
class SpdFactorization {
 public:
  SpdFactorization() = default;

  Eigen::Index order() const noexcept { return lower_.rows(); }
  const Matrix& lower() const noexcept { return lower_; }
  double log_det() const noexcept { return log_det_; }
  double jitter() const noexcept { return jitter_; }

  /// Solves (A + jitter I) X = rhs.
  Matrix solve(const Matrix& rhs) const;
  Vector solve(const Vector& rhs) const;

  /// v^T (A + jitter I)^{-1} v, computed as |L^{-1} v|^2 so it is never negative.
  double inverse_quadratic(const Vector& v) const;

  /// L^{-1} v.
  Vector half_solve(const Vector& v) const;

 private:
  friend SpdFactorization factor(const Matrix&, double, const JitterLadder&);

  Matrix lower_;
  double log_det_ = 0.0;
  double jitter_ = 0.0;
};

/// Factorises a symmetric matrix. On failure the jitter is escalated along
/// `ladder`; NotPositiveDefinite is raised once the cap has been tried.
SpdFactorization factor(const Matrix& matrix, double jitter = 0.0,
                        const JitterLadder& ladder = {});

}  // namespace krisk
