#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "krisk/posterior.hpp"
#include "krisk/specfun.hpp"
#include "test_support.hpp"

using krisk::KernelSpec;
using krisk::Matrix;
using krisk::Vector;
using testing_support::code_of;
using testing_support::smooth_set;
using testing_support::vec;

namespace {

// Direct dense evaluation of the conditioning formulas with an explicit inverse.
struct Oracle {
  double mu, location, student_scale2, mixture_bracket, known_bracket, dispersion;
};

Oracle oracle(const krisk::TrainingSet& set, const KernelSpec& spec, const Vector& x) {
  const Matrix s = krisk::correlation_matrix(spec, set);
  const Matrix inv = s.inverse();
  const Vector one = Vector::Ones(s.rows());
  const Vector& y = set.responses();
  const Vector k = krisk::correlation_vector(spec, set, x);
  const double q = one.dot(inv * one);
  const double mu = y.dot(inv * one) / q;
  const Vector r = y - mu * one;
  const double disp = r.dot(inv * r);
  const double kk = k.dot(inv * k);
  const double ok = one.dot(inv * k);
  const double mix = 1.0 - kk + (1.0 - ok) * (1.0 - ok) / q;
  const double n = static_cast<double>(set.size());
  return {mu, mu + k.dot(inv * r), disp / (n - 2.0) * mix, mix, 1.0 - kk, disp};
}

krisk::TrainingSet two_points() {
  Matrix x(2, 1);
  x << 0.0, 1.0;
  return krisk::TrainingSet(x, vec({1.0, 3.0}), krisk::Box::cube(1, -1.0, 2.0));
}

}  // namespace

TEST(Posterior, HandSolvedTwoPointGaussian) {
  const auto set = two_points();
  const KernelSpec spec(2.0, {1.0});
  const double c = std::exp(-1.0);
  const double kx = std::exp(-0.25);
  const auto g = krisk::condition_gaussian(set, spec, 0.0, 1.0);
  const auto p = g.predict(vec({0.5}));
  // k Sigma^-1 y with Sigma = [[1,c],[c,1]] and k = (kx, kx)
  EXPECT_NEAR(p.location, kx * 4.0 / (1.0 + c), 1e-14);
  EXPECT_NEAR(p.scale * p.scale, 1.0 - 2.0 * kx * kx / (1.0 + c), 1e-14);
  EXPECT_TRUE(p.gaussian());

  const auto m = krisk::condition_mixture_mean(set, spec, 1.0);
  EXPECT_NEAR(m.mean(), 2.0, 1e-14);
  EXPECT_NEAR(m.predict(vec({0.5})).location, 2.0, 1e-14);
  const double one_k = 2.0 * kx / (1.0 + c);
  EXPECT_NEAR(m.variance_at(vec({0.5})),
              1.0 - 2.0 * kx * kx / (1.0 + c) + (1.0 - one_k) * (1.0 - one_k) / (2.0 / (1.0 + c)), 1e-14);
}

TEST(Posterior, MatchesExplicitInverseOracle) {
  const auto set = smooth_set(15, 2, 3);
  const KernelSpec spec(1.6, {0.4, 0.7});
  const auto st = krisk::condition_student(set, spec);
  const auto mm = krisk::condition_mixture_mean(set, spec, 2.5);
  const auto kn = krisk::condition_gaussian(set, spec, 0.3, 2.0);
  for (double a : {0.05, 0.33, 0.71}) {
    for (double b : {0.12, 0.5, 0.93}) {
      const Vector x = vec({a, b});
      const auto o = oracle(set, spec, x);
      const auto ps = st.predict(x);
      EXPECT_NEAR(ps.location, o.location, 1e-10);
      EXPECT_NEAR(ps.scale * ps.scale, o.student_scale2, 1e-10 * o.dispersion);
      EXPECT_EQ(ps.dof, 13);
      EXPECT_NEAR(mm.predict(x).location, o.location, 1e-10);
      EXPECT_NEAR(mm.variance_at(x), 2.5 * o.mixture_bracket, 1e-10);
      EXPECT_NEAR(kn.variance_at(x), 2.0 * o.known_bracket, 1e-10);
    }
  }
  EXPECT_NEAR(st.gls_mean(), oracle(set, spec, vec({0, 0})).mu, 1e-12);
}

TEST(Posterior, InterpolatesTrainingPoints) {
  for (std::size_t d : {1u, 3u, 5u}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto set = smooth_set(12 + 4 * d, d, seed);
      const KernelSpec spec(1.8, std::vector<double>(d, 0.5));
      const auto st = krisk::condition_student(set, spec);
      const auto mm = krisk::condition_mixture_mean(set, spec, 1.0);
      const auto kn = krisk::condition_gaussian(set, spec, 0.0, 1.0);
      for (std::size_t i = 0; i < set.size(); ++i) {
        const Vector x = set.point(i);
        const double y = set.responses()(static_cast<Eigen::Index>(i));
        for (const krisk::Field* f : {static_cast<const krisk::Field*>(&st),
                                      static_cast<const krisk::Field*>(&mm),
                                      static_cast<const krisk::Field*>(&kn)}) {
          const auto p = f->predict(x);
          EXPECT_LT(std::abs(p.location - y), 1e-8);
          EXPECT_LT(p.scale, 1e-8);
        }
      }
    }
  }
}

TEST(Posterior, ScaleVanishesContinuouslyAtData) {
  // The Dirac marginal at an observation is the limit of nearby marginals.
  const auto set = smooth_set(20, 2, 8);
  const KernelSpec spec(2.0, {0.5, 0.5});
  const auto st = krisk::condition_student(set, spec);
  const Vector x = set.point(4);
  double prev = st.predict(x + vec({1e-2, 0.0})).scale;
  for (double h : {1e-3, 1e-4, 1e-5}) {
    const auto p = st.predict(x + vec({h, 0.0}));
    EXPECT_LT(p.scale, prev);
    EXPECT_NEAR(p.location, set.responses()(4), 10.0 * h);
    prev = p.scale;
  }
  EXPECT_LT(prev, 1e-4);
}

TEST(Posterior, StudentAndMixtureLocationsAgree) {
  const auto set = smooth_set(25, 3, 11);
  const KernelSpec spec(1.5, {0.3, 0.5, 0.8});
  const auto st = krisk::condition_student(set, spec);
  const auto mm = krisk::condition_mixture_mean(set, spec, 7.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Vector x = vec({u(rng), u(rng), u(rng)});
    EXPECT_NEAR(st.predict(x).location, mm.predict(x).location, 1e-8);
  }
}

TEST(Posterior, DispersionFormsAgree) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto set = smooth_set(18, 2, seed);
    const auto st = krisk::condition_student(set, KernelSpec(1.9, {0.3, 0.4}));
    EXPECT_NEAR(st.dispersion(), st.dispersion_against_y(), 1e-10 * st.dispersion());
  }
}

TEST(Posterior, StudentBandWiderThanPlugInGaussian) {
  const auto set = smooth_set(20, 2, 4);
  const KernelSpec spec(1.7, {0.35, 0.45});
  const auto st = krisk::condition_student(set, spec);
  const double n = static_cast<double>(set.size());
  const auto g = krisk::condition_gaussian(set, spec, st.gls_mean(), st.dispersion() / n);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const Vector x = vec({u(rng), u(rng)});
    const auto ps = st.predict(x);
    const auto pg = g.predict(x);
    EXPECT_NEAR(ps.location, pg.location, 1e-9);
    EXPECT_GE(krisk::interval_half_width(ps, 0.9), krisk::interval_half_width(pg, 0.9));
  }
}

TEST(Posterior, AffineEquivariance) {
  const auto set = smooth_set(14, 2, 6);
  const KernelSpec spec(1.2, {0.5, 0.5});
  const auto st = krisk::condition_student(set, spec);
  const auto moved = krisk::condition_student(set.with_responses((-3.0 * set.responses()).array() + 10.0), spec);
  for (double a : {0.1, 0.45, 0.8}) {
    const Vector x = vec({a, 1.0 - a});
    const auto p = st.predict(x);
    const auto q = moved.predict(x);
    EXPECT_NEAR(q.location, -3.0 * p.location + 10.0, 1e-9);
    EXPECT_NEAR(q.scale, 3.0 * p.scale, 1e-9);
  }
}

TEST(Posterior, PermutationInvariance) {
  const auto set = smooth_set(16, 3, 12);
  Matrix x = set.points();
  Vector y = set.responses();
  Matrix xr = x.colwise().reverse();
  Vector yr = y.reverse();
  const krisk::TrainingSet rev(xr, yr, set.box());
  const KernelSpec spec(1.9, {0.4, 0.6, 0.5});
  const auto a = krisk::condition_student(set, spec);
  const auto b = krisk::condition_student(rev, spec);
  const Vector p = vec({0.3, 0.6, 0.2});
  EXPECT_NEAR(a.predict(p).location, b.predict(p).location, 1e-10);
  EXPECT_NEAR(a.predict(p).scale, b.predict(p).scale, 1e-10);
}

TEST(Posterior, Preconditions) {
  Matrix x(2, 1);
  x << 0.1, 0.9;
  const krisk::TrainingSet two(x, vec({1.0, 2.0}), krisk::Box::cube(1, 0.0, 1.0));
  EXPECT_EQ(code_of([&] { krisk::condition_student(two, KernelSpec(2.0, {0.3})); }),
            krisk::ErrorCode::TooFewPoints);
  // n = 2 is fine for the Gaussian models
  EXPECT_NO_THROW(krisk::condition_gaussian(two, KernelSpec(2.0, {0.3}), 0.0, 1.0));
  Matrix x3(3, 1);
  x3 << 0.1, 0.5, 0.9;
  const krisk::TrainingSet flat(x3, vec({2.0, 2.0, 2.0}), krisk::Box::cube(1, 0.0, 1.0));
  EXPECT_EQ(code_of([&] { krisk::condition_student(flat, KernelSpec(2.0, {0.3})); }),
            krisk::ErrorCode::DegenerateData);
  const auto ok = krisk::condition_student(smooth_set(5, 1, 1), KernelSpec(2.0, {0.3}));
  EXPECT_EQ(code_of([&] { ok.predict(vec({0.1, 0.2})); }), krisk::ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([&] { krisk::condition_gaussian(two, KernelSpec(2.0, {0.3}), 0.0, -1.0); }),
            krisk::ErrorCode::InvalidParameters);
}

TEST(Posterior, OneObservationKnownMean) {
  Matrix x(1, 1);
  x << 0.0;
  const krisk::TrainingSet one(x, vec({2.0}), krisk::Box::cube(1, -1.0, 1.0));
  const auto g = krisk::condition_gaussian(one, KernelSpec(2.0, {0.5}), 0.0, 1.0);
  const double k = std::exp(-4.0 * 0.25);
  const auto p = g.predict(vec({0.5}));
  EXPECT_NEAR(p.location, 2.0 * k, 1e-14);
  EXPECT_NEAR(p.scale * p.scale, 1.0 - k * k, 1e-14);
}

TEST(Posterior, UpperTailProbability) {
  const krisk::PointPrediction dirac{1.0, 0.0, 5};
  EXPECT_EQ(krisk::student_cdf_upper(dirac, 0.5), 1.0);
  EXPECT_EQ(krisk::student_cdf_upper(dirac, 1.5), 0.0);
  const krisk::PointPrediction cauchy{2.0, 3.0, 1};
  EXPECT_NEAR(krisk::student_cdf_upper(cauchy, 5.0), 0.25, 1e-15);
  EXPECT_EQ(krisk::student_cdf_upper(cauchy, 2.0), 0.5);
  const krisk::PointPrediction normal{0.0, 2.0, 0};
  EXPECT_NEAR(krisk::student_cdf_upper(normal, 2.0), krisk::specfun::normal_upper_tail(1.0), 1e-15);
  EXPECT_NEAR(krisk::student_pdf(cauchy, 2.0), 1.0 / (3.0 * std::numbers::pi), 1e-15);
}

TEST(Posterior, HalfWidths) {
  EXPECT_NEAR(krisk::interval_half_width({0.0, 1.0, 0}, 0.9), 1.6448536269514722, 1e-10);
  EXPECT_NEAR(krisk::interval_half_width({0.0, 2.0, 1}, 0.5), 2.0, 1e-10);
  EXPECT_EQ(krisk::interval_half_width({0.0, 0.0, 4}, 0.9), 0.0);
}

TEST(Posterior, MultivariateStudentDensity) {
  // p = 2, nu = 3 at the location with identity scale
  const double expected = std::log(std::tgamma(2.5) / (std::tgamma(1.5) * 3.0 * std::numbers::pi));
  EXPECT_NEAR(krisk::mvt_logpdf(vec({1.0, -1.0}), Matrix::Identity(2, 2), 3, vec({1.0, -1.0})), expected, 1e-13);
  // large dof approaches the Gaussian log density
  Matrix s(2, 2);
  s << 2.0, 0.3, 0.3, 1.0;
  const Vector t = vec({0.7, -0.4});
  const double quad = t.dot(s.inverse() * t);
  const double gauss = -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(s.determinant()) - 0.5 * quad;
  EXPECT_NEAR(krisk::mvt_logpdf(Vector::Zero(2), s, 1000000, t), gauss, 1e-3);
}
