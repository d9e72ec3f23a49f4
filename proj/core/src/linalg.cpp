#include "krisk/linalg.hpp"

#include <cmath>
#include <string>

#include "krisk/error.hpp"

namespace krisk {
namespace {

constexpr double kSymmetryTolerance = 1e-12;

bool try_cholesky(const Matrix& a, double jitter, Matrix& lower) {
  const Eigen::Index n = a.rows();
  Matrix shifted = a;
  shifted.diagonal().array() += jitter;
  Eigen::LLT<Matrix, Eigen::Lower> llt(shifted);
  if (llt.info() != Eigen::Success) return false;
  lower = llt.matrixL();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = lower(i, i);
    if (!(d > 0.0) || !std::isfinite(d)) return false;
  }
  return true;
}

}  // namespace

SpdFactorization factor(const Matrix& matrix, double jitter,
                        const JitterLadder& ladder) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch,
                "matrix must be square and non-empty, got " +
                    std::to_string(matrix.rows()) + "x" +
                    std::to_string(matrix.cols()));
  }
  if (jitter < 0.0 || !std::isfinite(jitter)) {
    throw Error(ErrorCode::InvalidParameters, "jitter must be non-negative");
  }
  const Eigen::Index n = matrix.rows();
  const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (std::abs(matrix(i, j) - matrix(j, i)) > kSymmetryTolerance * scale) {
        throw Error(ErrorCode::NotSymmetric,
                    "entry (" + std::to_string(i) + "," + std::to_string(j) +
                        ") differs from its transpose");
      }
    }
  }

  SpdFactorization out;
  double current = jitter;
  while (true) {
    if (try_cholesky(matrix, current, out.lower_)) break;
    if (current >= ladder.cap) {
      throw Error(ErrorCode::NotPositiveDefinite,
                  "Cholesky failed with jitter up to " + std::to_string(current));
    }
    current = current <= 0.0 ? ladder.first
                             : std::min(current * ladder.factor, ladder.cap);
  }
  out.jitter_ = current;
  out.log_det_ = 2.0 * out.lower_.diagonal().array().log().sum();
  return out;
}

Matrix SpdFactorization::solve(const Matrix& rhs) const {
  if (rhs.rows() != order()) {
    throw Error(ErrorCode::DimensionMismatch,
                "rhs has " + std::to_string(rhs.rows()) + " rows, expected " +
                    std::to_string(order()));
  }
  const auto l = lower_.triangularView<Eigen::Lower>();
  Matrix y = l.solve(rhs);
  return l.transpose().solve(y);
}

Vector SpdFactorization::solve(const Vector& rhs) const {
  if (rhs.size() != order()) {
    throw Error(ErrorCode::DimensionMismatch,
                "rhs has " + std::to_string(rhs.size()) + " rows, expected " +
                    std::to_string(order()));
  }
  const auto l = lower_.triangularView<Eigen::Lower>();
  Vector y = l.solve(rhs);
  return l.transpose().solve(y);
}

Vector SpdFactorization::half_solve(const Vector& v) const {
  if (v.size() != order()) {
    throw Error(ErrorCode::DimensionMismatch, "vector length mismatch");
  }
  return lower_.triangularView<Eigen::Lower>().solve(v);
}

double SpdFactorization::inverse_quadratic(const Vector& v) const {
  return half_solve(v).squaredNorm();
}

}  // namespace krisk
