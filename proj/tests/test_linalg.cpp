#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "krisk/error.hpp"
#include "krisk/linalg.hpp"

using krisk::Matrix;
using krisk::Vector;

namespace {

Matrix random_spd(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  return a * a.transpose() + n * Matrix::Identity(n, n);
}

krisk::ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const krisk::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return krisk::ErrorCode::Io;
}

}  // namespace

TEST(Linalg, HandFactorisedTwoByTwo) {
  Matrix a(2, 2);
  a << 4, 2, 2, 3;
  const auto f = krisk::factor(a);
  EXPECT_DOUBLE_EQ(f.lower()(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(f.lower()(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(f.lower()(1, 1), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(f.lower()(0, 1), 0.0);
  EXPECT_NEAR(f.log_det(), std::log(8.0), 1e-15);
  EXPECT_EQ(f.jitter(), 0.0);
}

TEST(Linalg, IdentityHasZeroLogDet) {
  const auto f = krisk::factor(Matrix::Identity(7, 7));
  EXPECT_EQ(f.log_det(), 0.0);
  Vector v = Vector::LinSpaced(7, -1.0, 2.0);
  EXPECT_TRUE(f.solve(v).isApprox(v));
}

TEST(Linalg, SolveMatchesExplicitInverse) {
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const Matrix a = random_spd(12, seed);
    const Matrix inv = a.fullPivLu().inverse();
    const auto f = krisk::factor(a);
    const Vector b = Vector::LinSpaced(12, -3.0, 5.0);
    EXPECT_LT((f.solve(b) - inv * b).norm(), 1e-10 * (inv * b).norm());
    const Matrix rhs = Matrix::Identity(12, 12);
    EXPECT_LT((f.solve(rhs) - inv).norm(), 1e-10 * inv.norm());
    EXPECT_NEAR(f.inverse_quadratic(b), b.dot(inv * b), 1e-10 * b.dot(inv * b));
  }
}

TEST(Linalg, LogDetMatchesEigenvalues) {
  const Matrix a = random_spd(20, 9);
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  const double oracle = es.eigenvalues().array().log().sum();
  EXPECT_NEAR(krisk::factor(a).log_det(), oracle, 1e-10 * std::abs(oracle));
}

TEST(Linalg, HalfSolveSquaredNormIsQuadraticForm) {
  const Matrix a = random_spd(6, 3);
  const auto f = krisk::factor(a);
  const Vector v = Vector::Ones(6);
  EXPECT_NEAR(f.half_solve(v).squaredNorm(), f.inverse_quadratic(v), 1e-14);
  EXPECT_GE(f.inverse_quadratic(v), 0.0);
}

TEST(Linalg, RejectsAsymmetric) {
  Matrix a(2, 2);
  a << 1, 0.5, 0.4, 1;
  EXPECT_EQ(code_of([&] { krisk::factor(a); }), krisk::ErrorCode::NotSymmetric);
}

TEST(Linalg, RejectsNonSquare) {
  EXPECT_EQ(code_of([&] { krisk::factor(Matrix::Ones(2, 3)); }), krisk::ErrorCode::DimensionMismatch);
}

TEST(Linalg, IndefiniteFailsAfterLadder) {
  Matrix a(2, 2);
  a << 1, 2, 2, 1;
  EXPECT_EQ(code_of([&] { krisk::factor(a); }), krisk::ErrorCode::NotPositiveDefinite);
}

TEST(Linalg, SingularMatrixGetsJitter) {
  const Matrix a = Matrix::Ones(3, 3);
  const auto f = krisk::factor(a);
  EXPECT_GT(f.jitter(), 0.0);
  EXPECT_LE(f.jitter(), 1e-4);
  const Matrix back = f.lower() * f.lower().transpose();
  EXPECT_LT((back - a - f.jitter() * Matrix::Identity(3, 3)).norm(), 1e-12);
}

TEST(Linalg, RequestedJitterIsAdded) {
  const auto f = krisk::factor(Matrix::Identity(3, 3), 0.5);
  EXPECT_DOUBLE_EQ(f.jitter(), 0.5);
  EXPECT_NEAR(f.log_det(), 3.0 * std::log(1.5), 1e-14);
}
