#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/distributions/students_t.hpp>
#include <gtest/gtest.h>

#include "krisk/mle.hpp"
#include "krisk/problems.hpp"
#include "krisk/risk.hpp"
#include "krisk/specfun.hpp"
#include "test_support.hpp"

using krisk::FailureSpec;
using krisk::Orientation;
using krisk::RiskDistribution;
using krisk::TailFunction;
using testing_support::code_of;
using testing_support::ConstantField;
using testing_support::vec;

namespace {

krisk::TrainingSet tiny_set() {
  krisk::Matrix x(3, 1);
  x << 0.1, 0.5, 0.9;
  return krisk::TrainingSet(x, vec({0.0, 2.0, -1.0}), krisk::Box::cube(1, 0.0, 1.0));
}

std::vector<double> uniform_sample(std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(m);
  for (auto& x : v) x = u(rng);
  return v;
}

std::vector<TailFunction> random_tails(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> len(1, 40);
  std::vector<TailFunction> out;
  for (int i = 0; i < count; ++i) {
    auto s = uniform_sample(static_cast<std::size_t>(len(rng)), rng());
    // some ties and exact 0/1 memberships
    if (s.size() > 3) {
      s[0] = 0.0;
      s[1] = 1.0;
      s[2] = s[3];
    }
    out.push_back(TailFunction::empirical(s));
  }
  return out;
}

}  // namespace

TEST(Membership, DiracAndSymmetry) {
  const FailureSpec fail{0.5, Orientation::Upper};
  const ConstantField above(tiny_set(), {0.7, 0.0, 1});
  const ConstantField below(tiny_set(), {0.3, 0.0, 1});
  const ConstantField centred(tiny_set(), {0.5, 2.0, 4});
  const krisk::Vector x = vec({0.2});
  EXPECT_EQ(krisk::membership(above, x, fail), 1.0);
  EXPECT_EQ(krisk::membership(below, x, fail), 0.0);
  EXPECT_NEAR(krisk::membership(centred, x, fail), 0.5, 1e-15);
  const FailureSpec low{0.5, Orientation::Lower};
  EXPECT_EQ(krisk::membership(above, x, low), 0.0);
  EXPECT_EQ(krisk::membership(below, x, low), 1.0);
}

TEST(Membership, StudentTailAgainstBoost) {
  const FailureSpec fail{1.0, Orientation::Upper};
  for (int dof : {1, 3, 12}) {
    const ConstantField f(tiny_set(), {0.2, 0.7, dof});
    const boost::math::students_t_distribution<double> t(dof);
    const double ref = boost::math::cdf(boost::math::complement(t, (1.0 - 0.2) / 0.7));
    EXPECT_NEAR(krisk::membership(f, vec({0.3}), fail), ref, 1e-13);
  }
}

TEST(Membership, TrainingPointsOfRealPosterior) {
  const auto set = tiny_set();
  const auto post = krisk::condition_student(set, krisk::KernelSpec(2.0, {0.3}));
  const FailureSpec fail{0.5, Orientation::Upper};
  EXPECT_EQ(krisk::membership(post, vec({0.1}), fail), 0.0);
  EXPECT_EQ(krisk::membership(post, vec({0.5}), fail), 1.0);
  EXPECT_EQ(krisk::membership(post, vec({0.9}), fail), 0.0);
}

TEST(AlphaRisk, DirectCounts) {
  const RiskDistribution d({0.9, 0.2, 0.6});
  EXPECT_DOUBLE_EQ(krisk::alpha_level_risk(d, 0.5), 2.0 / 3.0);
  EXPECT_EQ(krisk::alpha_level_risk(d, 1.0), 0.0);
  EXPECT_EQ(krisk::alpha_level_risk(d, 0.0), 1.0);
  // strict inequality: a membership equal to alpha is not counted
  EXPECT_DOUBLE_EQ(krisk::alpha_level_risk(d, 0.6), 1.0 / 3.0);
  EXPECT_EQ(d.memberships(), (std::vector<double>{0.2, 0.6, 0.9}));
}

TEST(AlphaRisk, NonIncreasingOnGrid) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RiskDistribution d(uniform_sample(50, seed));
    double prev = 1.0;
    for (int i = 0; i <= 100; ++i) {
      const double r = krisk::alpha_level_risk(d, i / 100.0);
      EXPECT_LE(r, prev);
      prev = r;
    }
  }
}

TEST(AlphaRisk, RejectsOutOfRangeMemberships) {
  EXPECT_EQ(code_of([] { RiskDistribution({0.2, 1.5}); }), krisk::ErrorCode::InvalidParameters);
  EXPECT_EQ(code_of([] { RiskDistribution({}); }), krisk::ErrorCode::InvalidParameters);
}

TEST(Tail, ValidationAndCanonicalForm) {
  EXPECT_EQ(code_of([] { TailFunction({0.0, 0.5, 1.0}, {0.3, 0.6}); }), krisk::ErrorCode::MonotonicityViolation);
  EXPECT_EQ(code_of([] { TailFunction({0.0, 0.5}, {0.3, 0.1}); }), krisk::ErrorCode::MonotonicityViolation);
  EXPECT_EQ(code_of([] { TailFunction({0.0, 0.5, 0.5, 1.0}, {0.3, 0.2, 0.1}); }),
            krisk::ErrorCode::MonotonicityViolation);
  EXPECT_EQ(code_of([] { TailFunction({0.0, 1.0}, {1.5}); }), krisk::ErrorCode::MonotonicityViolation);
  const TailFunction merged({0.0, 0.3, 0.6, 1.0}, {0.5, 0.5, 0.2});
  EXPECT_EQ(merged, TailFunction({0.0, 0.6, 1.0}, {0.5, 0.2}));
  EXPECT_EQ(merged(0.0), 0.5);
  EXPECT_EQ(merged(0.6), 0.2);  // right-continuous
  EXPECT_EQ(merged(1.0), 0.0);
}

TEST(Tail, DiracMaps) {
  // Dirac membership at r: tail is 1 on [0, r), 0 after.
  for (double r : {0.25, 0.5, 0.8}) {
    const std::vector<double> sample{r};
    const auto tail = TailFunction::empirical(sample);
    EXPECT_EQ(tail, TailFunction({0.0, r, 1.0}, {1.0, 0.0}));
    EXPECT_EQ(krisk::first_moment(tail), r);
    // sup{a : F(a) > t} = r for every t < 1
    const auto image = krisk::apply_L_eta(tail);
    for (double t : {0.0, 0.1, 0.5, 0.99}) EXPECT_EQ(image(t), r) << t;
    EXPECT_EQ(image(1.0), 0.0);
  }
}

TEST(Tail, UniformMoment) {
  std::vector<double> b, v;
  const int n = 1000;
  for (int i = 0; i <= n; ++i) b.push_back(static_cast<double>(i) / n);
  for (int i = 0; i < n; ++i) v.push_back(1.0 - static_cast<double>(i) / n);
  // upper staircase of 1 - alpha: integral 1/2 + 1/(2n)
  EXPECT_NEAR(krisk::first_moment(TailFunction(b, v)), 0.5 + 0.5 / n, 1e-15);
}

TEST(Tail, SelfInverseAndMomentPreserving) {
  for (const auto& tail : random_tails(200, 5)) {
    const auto once = krisk::apply_L_eta(tail);
    EXPECT_EQ(krisk::apply_L_eta(once), tail);
    EXPECT_EQ(krisk::first_moment(once), krisk::first_moment(tail));
  }
}

TEST(Tail, GeneralEtaMatchesSupDefinition) {
  const auto k = [](double a) { return a * a; };
  for (const auto& tail : random_tails(30, 9)) {
    const auto image = krisk::apply_L_eta(tail, k);
    for (int i = 0; i < 200; ++i) {
      const double t = (i + 0.5) / 200.0;
      // brute force sup over the break points
      double sup = 0.0;
      for (std::size_t j = 0; j < tail.pieces(); ++j)
        if (tail.values()[j] > t) sup = tail.breaks()[j + 1];
      EXPECT_DOUBLE_EQ(image(t), k(sup)) << t;
    }
  }
}

TEST(Tail, UniformSampleStaysUniform) {
  const std::size_t m = 100000;
  const auto tail = TailFunction::empirical(uniform_sample(m, 42));
  const auto image = krisk::apply_L_eta(tail);
  double worst = 0.0;
  for (double b : image.breaks()) {
    // both one-sided limits at every jump
    worst = std::max(worst, std::abs(image(b) - (1.0 - b)));
    if (b > 0.0) worst = std::max(worst, std::abs(image(std::nextafter(b, 0.0)) - (1.0 - b)));
  }
  EXPECT_LT(worst, 2.0 / std::sqrt(static_cast<double>(m)));
}

TEST(Tail, FirstMomentIsMeanMembership) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const RiskDistribution d(uniform_sample(300, seed));
    EXPECT_NEAR(krisk::first_moment(d.tail()), d.mean_membership(), 4e-16);
  }
}

TEST(BetaMixture, ZeroAndFullMemberships) {
  for (std::size_t m : {1u, 10u, 100u, 1000u}) {
    const double M = static_cast<double>(m);
    const auto zero = krisk::beta_mixture_stats(RiskDistribution(std::vector<double>(m, 0.0)), 20000, 1);
    EXPECT_NEAR(zero.mean, 1.0 / (M + 2), 1e-12);
    EXPECT_GT(zero.mean, 0.0);
    EXPECT_NEAR(zero.std, std::sqrt((M + 1) / ((M + 2) * (M + 2) * (M + 3))), 1e-12);
    const auto one = krisk::beta_mixture_stats(RiskDistribution(std::vector<double>(m, 1.0)), 20000, 1);
    EXPECT_NEAR(one.mean, (M + 1) / (M + 2), 1e-12);
  }
}

TEST(BetaMixture, ClosedFormMatchesDraws) {
  const RiskDistribution d(uniform_sample(200, 3));
  const std::size_t draws = 50000;
  std::vector<double> means;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto s = krisk::beta_mixture_stats(d, draws, seed);
    EXPECT_NEAR(s.sample_mean, s.mean, 3.0 * s.std / std::sqrt(static_cast<double>(draws)));
    EXPECT_NEAR(s.sample_std, s.std, 0.02 * s.std);
    means.push_back(s.sample_mean);
  }
  const double tol = 3.0 * std::sqrt(2.0) * krisk::beta_mixture_stats(d, draws, 1).std / std::sqrt(draws * 1.0);
  EXPECT_NEAR(means[0], means[1], tol);
  EXPECT_NEAR(means[1], means[2], tol);
}

TEST(BetaMixture, MomentsByQuadrature) {
  // integrate the beta moments over alpha directly on the step function
  const auto sample = uniform_sample(40, 11);
  const RiskDistribution d(sample);
  const double M = 40.0;
  const auto tail = d.tail();
  double e1 = 0.0, e2 = 0.0;
  for (std::size_t j = 0; j < tail.pieces(); ++j) {
    const double w = tail.breaks()[j + 1] - tail.breaks()[j];
    const double n = tail.values()[j] * M;
    const double a = n + 1, b = M - n + 1;
    e1 += w * a / (a + b);
    e2 += w * a * (a + 1) / ((a + b) * (a + b + 1));
  }
  const auto s = krisk::beta_mixture_stats(d, 10000, 0);
  EXPECT_NEAR(s.mean, e1, 1e-14);
  EXPECT_NEAR(s.std, std::sqrt(e2 - e1 * e1), 1e-12);
}

TEST(BetaMixture, IntervalsAreNestedAndHoldMean) {
  const RiskDistribution d(uniform_sample(500, 8));
  const std::vector<double> levels{0.5, 0.9, 0.99};
  const auto s = krisk::beta_mixture_stats(d, 20000, 4, levels);
  ASSERT_EQ(s.intervals.size(), 3u);
  EXPECT_LE(s.interval(0.5).width(), s.interval(0.9).width());
  EXPECT_LE(s.interval(0.9).width(), s.interval(0.99).width());
  EXPECT_TRUE(s.interval(0.9).contains(s.mean));
  EXPECT_EQ(code_of([&] { s.interval(0.8); }), krisk::ErrorCode::InvalidParameters);
}

TEST(BetaSummary, ClosedFormAndShortestInterval) {
  for (std::size_t m : {1u, 100u, 600u}) {
    const double M = static_cast<double>(m);
    EXPECT_NEAR(krisk::beta_summary(0, m).mean, 1.0 / (M + 2), 1e-15);
    EXPECT_NEAR(krisk::beta_summary(m, m).mean, (M + 1) / (M + 2), 1e-15);
    // k = 0: density decreasing, shortest interval starts at 0
    EXPECT_EQ(krisk::beta_summary(0, m).interval().lo, 0.0);
    EXPECT_EQ(krisk::beta_summary(m, m).interval().hi, 1.0);
  }
  const auto s = krisk::beta_summary(60, 600);
  const auto& ci = s.interval();
  EXPECT_NEAR(krisk::specfun::incomplete_beta(61, 541, ci.hi) - krisk::specfun::incomplete_beta(61, 541, ci.lo), 0.9, 1e-9);
  // any shifted window of the same mass is wider
  const double lo2 = ci.lo * 1.02;
  const double hi2 = krisk::specfun::inverse_incomplete_beta(61, 541, krisk::specfun::incomplete_beta(61, 541, lo2) + 0.9);
  EXPECT_GT(hi2 - lo2, ci.width());
}

TEST(Bmc, DeterministicAndConsistent) {
  const auto sine = krisk::reference_problem("sine");
  const auto a = krisk::bmc_baseline(sine, 1000);
  const auto b = krisk::bmc_baseline(sine, 1000);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.interval().lo, b.interval().lo);
  EXPECT_LT(std::abs(a.mean - sine.theoretical_risk()), 3.0 * a.std);
  const auto k = krisk::count_sobol_failures(sine, 1000);
  EXPECT_DOUBLE_EQ(a.mean, (k + 1.0) / 1002.0);
}

TEST(RiskMc, DiracFields) {
  const auto set = tiny_set();
  const FailureSpec fail{0.0, Orientation::Upper};
  const ConstantField above(set, {1.0, 0.0, 2});
  const ConstantField below(set, {-1.0, 0.0, 2});
  const auto da = krisk::risk_distribution_mc(above, fail, set.box(), 100, 1);
  const auto db = krisk::risk_distribution_mc(below, fail, set.box(), 100, 1);
  EXPECT_EQ(krisk::alpha_level_risk(da, 0.999), 1.0);
  EXPECT_EQ(krisk::alpha_level_risk(db, 0.0), 0.0);
  EXPECT_NEAR(krisk::beta_mixture_stats(db, 20000, 2).mean, 1.0 / 102.0, 1e-12);
}

TEST(RiskMc, ThreadCountDoesNotMatter) {
  const auto set = testing_support::smooth_set(30, 2, 4);
  const auto post = krisk::condition_student(set, krisk::KernelSpec(1.8, {0.4, 0.4}));
  const FailureSpec fail{0.5, Orientation::Upper};
  const auto one = krisk::risk_distribution_mc(post, fail, set.box(), 2000, 77, 1);
  const auto four = krisk::risk_distribution_mc(post, fail, set.box(), 2000, 77, 4);
  EXPECT_EQ(one.memberships(), four.memberships());
  const auto other = krisk::risk_distribution_mc(post, fail, set.box(), 2000, 78, 1);
  EXPECT_NE(one.memberships(), other.memberships());
}

TEST(RiskMc, QuadricCoversTruth) {
  const auto q = krisk::reference_problem("quadric");
  const auto set = krisk::sample_training_set(q, 200, 1);
  krisk::SearchConfig search;
  search.seed = 1;
  search.restarts = 4;
  const auto post = krisk::condition_student(set, krisk::calibrate(set, krisk::ModelKind::Student, search).best);
  const auto dist = krisk::risk_distribution_mc(post, q.failure(), q.box(), 1000, 2);
  const auto s = krisk::beta_mixture_stats(dist, 20000, 3);
  EXPECT_TRUE(s.interval().contains(q.theoretical_risk())) << s.interval().lo << " " << s.interval().hi;
}

TEST(RiskMc, SineWidthBelowFiveHundredthsAt600Points) {
  const auto sine = krisk::reference_problem("sine");
  const auto set = krisk::sample_training_set(sine, 600, 1);
  krisk::SearchConfig search;
  search.seed = 1;
  const auto post = krisk::condition_student(set, krisk::calibrate(set, krisk::ModelKind::Student, search).best);
  const auto dist = krisk::risk_distribution_mc(post, sine.failure(), sine.box(), 1000, 2);
  const auto s = krisk::beta_mixture_stats(dist, 20000, 3);
  EXPECT_LT(s.interval().width(), 0.05);
}
