#include "krisk/risk.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "krisk/error.hpp"
#include "krisk/parallel.hpp"
#include "krisk/posterior.hpp"
#include "krisk/problems.hpp"
#include "krisk/sobol.hpp"
#include "krisk/specfun.hpp"

namespace krisk {
namespace {

constexpr double kDefaultLevels[] = {0.9};

std::span<const double> levels_or_default(std::span<const double> levels) {
  return levels.empty() ? std::span<const double>(kDefaultLevels) : levels;
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidParameters, "confidence level must lie in (0, 1)");
  }
}

// Merges adjacent pieces that share a value.
void canonicalise(std::vector<double>& breaks, std::vector<double>& values) {
  std::vector<double> b{breaks.front()};
  std::vector<double> v;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!v.empty() && v.back() == values[i]) {
      b.back() = breaks[i + 1];
      continue;
    }
    v.push_back(values[i]);
    b.push_back(breaks[i + 1]);
  }
  breaks = std::move(b);
  values = std::move(v);
}

double shortest_window(const std::vector<double>& sorted, double level, double& lo, double& hi) {
  const std::size_t n = sorted.size();
  auto w = static_cast<std::size_t>(std::ceil(level * static_cast<double>(n)));
  w = std::clamp<std::size_t>(w, 1, n);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + w <= n; ++i) {
    const double width = sorted[i + w - 1] - sorted[i];
    if (width < best) {
      best = width;
      lo = sorted[i];
      hi = sorted[i + w - 1];
    }
  }
  return best;
}

}  // namespace

double membership(const Field& field, const Vector& x, const FailureSpec& fail) {
  const auto p = field.predict(x);
  if (fail.orientation == Orientation::Upper) return student_cdf_upper(p, fail.threshold);
  if (p.scale <= 0.0) return p.location < fail.threshold ? 1.0 : 0.0;
  return 1.0 - student_cdf_upper(p, fail.threshold);
}

TailFunction::TailFunction(std::vector<double> breaks, std::vector<double> values)
    : breaks_(std::move(breaks)), values_(std::move(values)) {
  if (values_.empty() || breaks_.size() != values_.size() + 1) {
    throw Error(ErrorCode::MonotonicityViolation,
                "a step function needs one more break than values");
  }
  if (breaks_.front() != 0.0 || breaks_.back() != 1.0) {
    throw Error(ErrorCode::MonotonicityViolation, "breaks must run from 0 to 1");
  }
  for (std::size_t i = 0; i + 1 < breaks_.size(); ++i) {
    if (!(breaks_[i] < breaks_[i + 1])) {
      throw Error(ErrorCode::MonotonicityViolation, "breaks must be strictly increasing");
    }
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= 0.0 && values_[i] <= 1.0)) {
      throw Error(ErrorCode::MonotonicityViolation, "tail values must lie in [0, 1]");
    }
    if (i > 0 && values_[i] > values_[i - 1]) {
      throw Error(ErrorCode::MonotonicityViolation,
                  "tail value increases at piece " + std::to_string(i));
    }
  }
  canonicalise(breaks_, values_);
}

TailFunction TailFunction::empirical(std::span<const double> sample) {
  if (sample.empty()) throw Error(ErrorCode::InvalidParameters, "empty sample");
  std::vector<double> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  if (s.front() < 0.0 || s.back() > 1.0) {
    throw Error(ErrorCode::InvalidParameters, "sample values must lie in [0, 1]");
  }
  const double m = static_cast<double>(s.size());
  std::vector<double> breaks{0.0};
  for (double v : s) {
    if (v > breaks.back() && v < 1.0) breaks.push_back(v);
  }
  breaks.push_back(1.0);
  std::vector<double> values;
  values.reserve(breaks.size() - 1);
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const auto above = s.end() - std::upper_bound(s.begin(), s.end(), breaks[i]);
    values.push_back(static_cast<double>(above) / m);
  }
  return TailFunction(std::move(breaks), std::move(values));
}

double TailFunction::operator()(double alpha) const {
  if (alpha >= 1.0) return 0.0;
  if (alpha < 0.0) return values_.front();
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), alpha);
  return values_[static_cast<std::size_t>(it - breaks_.begin()) - 1];
}

TailFunction apply_L_eta(const TailFunction& tail, const std::function<double(double)>& eta_cdf) {
  auto k = [&](double u) {
    if (!eta_cdf) return u;
    const double v = eta_cdf(u);
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::MonotonicityViolation, "eta cdf must map into [0, 1]");
    }
    return v;
  };
  const auto& a = tail.breaks();
  const auto& v = tail.values();
  const std::size_t pieces = v.size();

  // Generalised inverse: for t in [v_j, v_{j-1}) the last piece above t is
  // j-1, whose right end is a_j.
  std::vector<double> breaks{0.0};
  std::vector<double> values;
  if (v[pieces - 1] > 0.0) {
    values.push_back(k(a[pieces]));
    breaks.push_back(v[pieces - 1]);
  }
  for (std::size_t j = pieces - 1; j >= 1; --j) {
    values.push_back(k(a[j]));
    breaks.push_back(v[j - 1]);
  }
  if (v[0] < 1.0) {
    values.push_back(k(0.0));
    breaks.push_back(1.0);
  }
  // breaks currently ends at v[0] (== 1) when the last branch was skipped.
  return TailFunction(std::move(breaks), std::move(values));
}

namespace {

// Correctly rounded sum of the terms (Shewchuk's non-overlapping partials).
double exact_sum(const std::vector<double>& terms) {
  std::vector<double> partials;
  for (double x : terms) {
    std::size_t used = 0;
    for (double y : partials) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials[used++] = lo;
      x = hi;
    }
    partials.resize(used);
    partials.push_back(x);
  }
  if (partials.empty()) return 0.0;
  // Round the top partials half-even as Python's fsum does.
  std::size_t n = partials.size();
  double hi = partials[--n];
  double lo = 0.0;
  while (n > 0) {
    const double x = hi;
    const double y = partials[--n];
    hi = x + y;
    lo = y - (hi - x);
    if (lo != 0.0) break;
  }
  if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    if (y == x - hi) hi = x;
  }
  return hi;
}

void push_product(std::vector<double>& terms, double a, double b, double sign) {
  const double p = a * b;
  terms.push_back(sign * p);
  terms.push_back(sign * std::fma(a, b, -p));
}

}  // namespace

// Area under the staircase as outer-corner products minus inner-corner
// products, summed exactly. Reflecting the staircase about the diagonal only
// permutes the corners, so a tail and its generalized inverse give the same bits.
double first_moment(const TailFunction& tail) {
  const auto& b = tail.breaks();
  const auto& v = tail.values();
  std::vector<double> terms;
  terms.reserve(4 * v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    push_product(terms, b[i + 1], v[i], 1.0);
    if (i + 1 < v.size()) push_product(terms, b[i + 1], v[i + 1], -1.0);
  }
  return exact_sum(terms);
}

RiskDistribution::RiskDistribution(std::vector<double> memberships)
    : memberships_(std::move(memberships)) {
  if (memberships_.empty()) {
    throw Error(ErrorCode::InvalidParameters, "risk distribution needs at least one sample");
  }
  for (double m : memberships_) {
    if (!(m >= 0.0 && m <= 1.0)) {
      throw Error(ErrorCode::InvalidParameters, "membership values must lie in [0, 1]");
    }
  }
  std::sort(memberships_.begin(), memberships_.end());
}

std::size_t RiskDistribution::count_above(double alpha) const {
  const auto it = std::upper_bound(memberships_.begin(), memberships_.end(), alpha);
  return static_cast<std::size_t>(memberships_.end() - it);
}

double RiskDistribution::mean_membership() const {
  double s = 0.0;
  for (double m : memberships_) s += m;
  return s / static_cast<double>(memberships_.size());
}

double alpha_level_risk(const RiskDistribution& dist, double alpha) {
  return static_cast<double>(dist.count_above(alpha)) / static_cast<double>(dist.size());
}

RiskDistribution risk_distribution_mc(const Field& field, const FailureSpec& fail,
                                       const Box& box, std::size_t samples,
                                       std::uint64_t seed, int threads) {
  if (samples == 0) throw Error(ErrorCode::InvalidParameters, "need at least one sample");
  if (box.dimension() != field.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "box and field dimensions differ");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t dim = box.dimension();
  std::vector<Vector> points;
  points.reserve(samples);
  std::vector<double> u(dim);
  for (std::size_t i = 0; i < samples; ++i) {
    for (auto& v : u) v = unit(rng);
    points.push_back(box.from_unit(u));
  }
  std::vector<double> values(samples);
  parallel_for(samples, threads, [&](std::size_t i) {
    values[i] = membership(field, points[i], fail);
  });
  return RiskDistribution(std::move(values));
}

const ConfidenceInterval& RiskSummary::interval(double level) const {
  for (const auto& ci : intervals) {
    if (std::abs(ci.level - level) < 1e-12) return ci;
  }
  throw Error(ErrorCode::InvalidParameters, "no interval at level " + std::to_string(level));
}

RiskSummary beta_mixture_stats(const RiskDistribution& dist, std::size_t draws,
                               std::uint64_t seed, std::span<const double> levels) {
  if (draws < 2) throw Error(ErrorCode::InvalidParameters, "need at least two mixture draws");
  levels = levels_or_default(levels);
  for (double l : levels) check_level(l);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double m = static_cast<double>(dist.size());
  std::vector<double> sample(draws);
  for (auto& s : sample) {
    const double alpha = unit(rng);
    const double n = static_cast<double>(dist.count_above(alpha));
    std::gamma_distribution<double> ga(n + 1.0, 1.0);
    std::gamma_distribution<double> gb(m - n + 1.0, 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    s = x / (x + y);
  }
  RiskSummary out;
  double sum = 0.0;
  for (double v : sample) sum += v;
  out.sample_mean = sum / static_cast<double>(draws);
  double ss = 0.0;
  for (double v : sample) ss += (v - out.sample_mean) * (v - out.sample_mean);
  out.sample_std = std::sqrt(ss / static_cast<double>(draws - 1));

  // int n = sum m_i and int n^2 = sum_ij min(m_i, m_j) over the sorted sample.
  const auto& mem = dist.memberships();
  double s1 = 0.0;
  double s2 = 0.0;
  for (std::size_t k = 0; k < mem.size(); ++k) {
    s1 += mem[k];
    s2 += mem[k] * static_cast<double>(2 * (mem.size() - k) - 1);
  }
  out.mean = (s1 + 1.0) / (m + 2.0);
  const double second = (s2 + 3.0 * s1 + 2.0) / ((m + 2.0) * (m + 3.0));
  out.std = std::sqrt(std::max(0.0, second - out.mean * out.mean));
  std::sort(sample.begin(), sample.end());
  for (double level : levels) {
    ConfidenceInterval ci{level, 0.0, 0.0};
    shortest_window(sample, level, ci.lo, ci.hi);
    out.intervals.push_back(ci);
  }
  return out;
}

RiskSummary beta_summary(std::size_t failures, std::size_t trials,
                         std::span<const double> levels) {
  if (trials == 0) throw Error(ErrorCode::InvalidParameters, "need at least one trial");
  if (failures > trials) throw Error(ErrorCode::InvalidParameters, "more failures than trials");
  levels = levels_or_default(levels);
  const double a = static_cast<double>(failures) + 1.0;
  const double b = static_cast<double>(trials - failures) + 1.0;
  RiskSummary out;
  out.mean = a / (a + b);
  out.std = std::sqrt(a * b / ((a + b) * (a + b) * (a + b + 1.0)));
  out.sample_mean = out.mean;
  out.sample_std = out.std;
  for (double level : levels) {
    check_level(level);
    auto width = [&](double p) {
      return specfun::inverse_incomplete_beta(a, b, p + level) -
             specfun::inverse_incomplete_beta(a, b, p);
    };
    // Golden-section search over the lower tail mass.
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = 0.0;
    double hi = 1.0 - level;
    double c = hi - phi * (hi - lo);
    double d = lo + phi * (hi - lo);
    double fc = width(c);
    double fd = width(d);
    for (int it = 0; it < 100; ++it) {
      if (fc < fd) {
        hi = d; d = c; fd = fc;
        c = hi - phi * (hi - lo);
        fc = width(c);
      } else {
        lo = c; c = d; fc = fd;
        d = lo + phi * (hi - lo);
        fd = width(d);
      }
    }
    const double p = 0.5 * (lo + hi);
    ConfidenceInterval best{level, specfun::inverse_incomplete_beta(a, b, p),
                            specfun::inverse_incomplete_beta(a, b, p + level)};
    const ConfidenceInterval left{level, 0.0, specfun::inverse_incomplete_beta(a, b, level)};
    const ConfidenceInterval right{level, specfun::inverse_incomplete_beta(a, b, 1.0 - level), 1.0};
    for (const auto& edge : {left, right}) {
      if (edge.width() <= best.width() * (1.0 + 1e-12)) best = edge;
    }
    out.intervals.push_back(best);
  }
  return out;
}

std::size_t count_sobol_failures(const BenchmarkProblem& problem, std::size_t samples) {
  SobolSequence seq(problem.dimension());
  seq.skip(1);
  std::size_t k = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const auto u = seq.next();
    const Vector x = problem.box().from_unit(u);
    if (problem.failure().failed(problem.evaluate(x))) ++k;
  }
  return k;
}

RiskSummary bmc_baseline(const BenchmarkProblem& problem, std::size_t samples,
                         std::span<const double> levels) {
  if (samples == 0) throw Error(ErrorCode::InvalidParameters, "need at least one sample");
  return beta_summary(count_sobol_failures(problem, samples), samples, levels);
}

}  // namespace krisk
