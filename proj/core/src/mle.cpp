#include "krisk/mle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "krisk/error.hpp"
#include "krisk/nelder_mead.hpp"
#include "krisk/parallel.hpp"
#include "krisk/sobol.hpp"

namespace krisk {
namespace {

struct Profile {
  double n;
  double log_det;
  double one_quad;  // 1 Sigma^-1 1^T
  double mean;      // mu_theta
  double s2;        // sigma^2_theta
  double spread;    // (max L_ii / min L_ii)^2, a cheap lower bound on cond(Sigma)
  bool escalated;   // the factorisation needed more jitter than configured
};

// Above this the likelihood surface is rounding noise: log|Sigma| and the
// quadratic forms lose all significant digits, typically for gamma close to 2
// with long length-scales.
constexpr double kMaxSpread = 1e10;
constexpr double kBoundPenalty = 1e3;

// Rows in lexicographic order and responses measured from their minimum.
// The objective only depends on the point set and on y up to a constant, so
// evaluating it on this form makes reorderings bit-for-bit irrelevant, and
// likewise any shift of y that is exact in floating point.
TrainingSet canonical(const TrainingSet& set, double& offset) {
  const Matrix& x = set.points();
  const Vector& y = set.responses();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (x(a, j) != x(b, j)) return x(a, j) < x(b, j);
    }
    return y(a) < y(b);
  });
  offset = y.minCoeff();
  Matrix xs(x.rows(), x.cols());
  Vector ys(y.size());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    xs.row(i) = x.row(order[static_cast<std::size_t>(i)]);
    ys(i) = y(order[static_cast<std::size_t>(i)]) - offset;
  }
  return TrainingSet(std::move(xs), std::move(ys), set.box());
}

Profile profile(const TrainingSet& original, const KernelSpec& spec) {
  double offset = 0.0;
  const TrainingSet set = canonical(original, offset);
  const auto fact = factor(correlation_matrix(spec, set), spec.jitter());
  const auto n = static_cast<Eigen::Index>(set.size());
  const Vector one_half = fact.half_solve(Vector::Ones(n));
  const Vector y_half = fact.half_solve(set.responses());
  const double one_quad = one_half.squaredNorm();
  if (!(one_quad > 0.0)) throw Error(ErrorCode::DegenerateData, "1 Sigma^-1 1 is not positive");
  const double centred = one_half.dot(y_half) / one_quad;
  const double s2 = (y_half - centred * one_half).squaredNorm() / static_cast<double>(n);
  const auto d = fact.lower().diagonal();
  const double ratio = d.maxCoeff() / d.minCoeff();
  return Profile{static_cast<double>(n), fact.log_det(), one_quad, centred + offset,
                 s2, ratio * ratio, fact.jitter() > spec.jitter()};
}

Profile checked_profile(const TrainingSet& set, const KernelSpec& spec) {
  const Vector& y = set.responses();
  if ((y.array() == y[0]).all()) {
    throw Error(ErrorCode::DegenerateData, "all responses are equal");
  }
  auto p = profile(set, spec);
  if (!(p.s2 > 0.0)) throw Error(ErrorCode::DegenerateData, "residual dispersion is zero");
  return p;
}

// Search coordinates: the unit box, linear in log length-scale and in gamma.
// Points outside are evaluated at their projection plus a quadratic penalty,
// which keeps the simplex responsive at the bounds.
struct Parameterisation {
  std::size_t dim;
  double log_lo;
  double log_hi;
  double gamma_lo;
  double gamma_hi;
  std::optional<double> pinned_gamma;
  double jitter;

  std::size_t size() const { return dim + (pinned_gamma ? 0 : 1); }

  KernelSpec to_spec(const std::vector<double>& v) const {
    std::vector<double> lengths(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      lengths[i] = std::exp(log_lo + (log_hi - log_lo) * std::clamp(v[i], 0.0, 1.0));
    }
    const double gamma = pinned_gamma
                             ? *pinned_gamma
                             : gamma_lo + (gamma_hi - gamma_lo) * std::clamp(v[dim], 0.0, 1.0);
    return KernelSpec(std::clamp(gamma, 1e-12, 2.0), std::move(lengths), jitter);
  }

  static double excess(const std::vector<double>& v) {
    double e = 0.0;
    for (double x : v) {
      const double d = x < 0.0 ? -x : (x > 1.0 ? x - 1.0 : 0.0);
      e += d * d;
    }
    return e;
  }
};

double student_value(const Profile& p) {
  return p.n * std::log(p.s2) + p.log_det + 2.0 * std::log(p.one_quad / p.s2);
}

double gaussian_value(const Profile& p) { return p.n * std::log(p.s2) + p.log_det; }

}  // namespace

std::string_view to_string(ModelKind kind) noexcept {
  return kind == ModelKind::Student ? "student" : "gaussian";
}

double student_objective(const TrainingSet& set, const KernelSpec& spec) {
  return student_value(checked_profile(set, spec));
}

double gaussian_objective(const TrainingSet& set, const KernelSpec& spec) {
  return gaussian_value(checked_profile(set, spec));
}

GaussianConstants gaussian_mle_constants(const TrainingSet& set, const KernelSpec& spec) {
  if (set.size() < 2) throw Error(ErrorCode::TooFewPoints, "need at least 2 observations");
  const auto p = profile(set, spec);
  return GaussianConstants{p.mean, p.s2};
}

MleResult calibrate(const TrainingSet& set, ModelKind kind, const SearchConfig& search) {
  if (search.restarts < 1) throw Error(ErrorCode::Config, "restarts must be at least 1");
  if (kind == ModelKind::Student && set.size() < 3) {
    throw Error(ErrorCode::TooFewPoints, "Student calibration needs at least 3 observations");
  }
  const Vector& y = set.responses();
  if ((y.array() == y[0]).all()) {
    throw Error(ErrorCode::DegenerateData, "all responses are equal");
  }
  const double diag = set.box().diagonal();
  const double lo = search.length_min.value_or(1e-3 * diag);
  const double hi = search.length_max.value_or(10.0 * diag);
  if (!(lo > 0.0 && hi > lo)) throw Error(ErrorCode::Config, "invalid length-scale bounds");
  if (!search.pinned_gamma &&
      !(search.gamma_min > 0.0 && search.gamma_max <= 2.0 && search.gamma_max > search.gamma_min)) {
    throw Error(ErrorCode::Config, "invalid gamma bounds");
  }

  const Parameterisation param{set.dimension(), std::log(lo), std::log(hi),
                               search.gamma_min,  search.gamma_max,
                               search.pinned_gamma, search.jitter};
  const std::size_t np = param.size();

  // Start points: Sobol grid with a seeded random shift (Cranley-Patterson).
  std::mt19937_64 rng(search.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> shift(np);
  for (auto& s : shift) s = unit(rng);
  std::vector<std::vector<double>> starts;
  const auto restarts = static_cast<std::size_t>(search.restarts);
  if (np <= kSobolMaxDimension) {
    SobolSequence seq(np);
    seq.skip(1);
    for (std::size_t r = 0; r < restarts; ++r) {
      auto v = seq.next();
      for (std::size_t i = 0; i < np; ++i) v[i] = std::fmod(v[i] + shift[i], 1.0);
      starts.push_back(v);
    }
  } else {
    for (std::size_t r = 0; r < restarts; ++r) {
      std::vector<double> v(np);
      for (auto& x : v) x = unit(rng);
      starts.push_back(v);
    }
  }

  auto objective = [&](const std::vector<double>& u) {
    try {
      const auto p = checked_profile(set, param.to_spec(u));
      if (p.escalated || !(p.spread <= kMaxSpread)) return std::numeric_limits<double>::infinity();
      const double value = kind == ModelKind::Student ? student_value(p) : gaussian_value(p);
      return value + kBoundPenalty * Parameterisation::excess(u);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NotPositiveDefinite || e.code() == ErrorCode::DegenerateData) {
        return std::numeric_limits<double>::infinity();
      }
      throw;
    }
  };

  NelderMeadOptions options;
  options.max_evaluations = search.max_evaluations;
  options.initial_step = 0.15;
  options.value_tolerance = 1e-9;
  options.point_tolerance = 1e-6;

  std::vector<NelderMeadResult> results(restarts);
  // A collapsed simplex is re-expanded around its best vertex while the
  // budget lasts; this gets runs off flat regions and bound plateaus.
  parallel_for(restarts, search.threads, [&](std::size_t r) {
    auto opts = options;
    auto res = nelder_mead(objective, starts[r], opts);
    int used = res.evaluations;
    opts.initial_step = 0.25;
    while (used < search.max_evaluations) {
      opts.max_evaluations = search.max_evaluations - used;
      auto next = nelder_mead(objective, res.point, opts);
      used += next.evaluations;
      const bool improved = next.value < res.value - 1e-6 * (1.0 + std::abs(res.value));
      if (next.value < res.value) res = std::move(next);
      if (!improved) break;
    }
    if (Parameterisation::excess(res.point) > 0.0) {
      for (auto& x : res.point) x = std::clamp(x, 0.0, 1.0);
      res.value = objective(res.point);
      ++used;
    }
    res.evaluations = used;
    results[r] = std::move(res);
  });

  std::vector<RestartTrace> trace;
  std::optional<std::size_t> best;
  for (std::size_t r = 0; r < restarts; ++r) {
    trace.push_back(RestartTrace{param.to_spec(starts[r]), param.to_spec(results[r].point),
                                 results[r].value});
    if (!std::isfinite(results[r].value)) continue;
    if (!best || results[r].value < results[*best].value) best = r;
  }
  if (!best) {
    throw Error(ErrorCode::AllRestartsFailed,
                "every calibration restart ended on a non-finite objective");
  }

  std::vector<std::string> warnings;
  if (set.size() < 5 * set.dimension()) {
    warnings.push_back("only " + std::to_string(set.size()) + " observations for " +
                       std::to_string(set.dimension()) +
                       " factors; likelihood calibration is unreliable below 5 per factor");
  }
  return MleResult{trace[*best].end, results[*best].value, std::move(trace), kind,
                   std::move(warnings)};
}

}  // namespace krisk
