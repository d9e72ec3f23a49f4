#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "krisk/failure.hpp"
#include "krisk/kernels.hpp"

namespace krisk {

class Field;
class BenchmarkProblem;

/// Posterior probability that the response at x is out of specification.
double membership(const Field& field, const Vector& x, const FailureSpec& fail);

/// Right-continuous, non-increasing step function on [0, 1] with value 0 at 1.
///
/// Piece i covers [breaks[i], breaks[i+1]) and takes values[i]. Breaks run
/// from 0 to 1 strictly increasing; the representation is kept canonical
/// (adjacent pieces never share a value), so two equal functions compare equal.
class TailFunction {
 public:
  TailFunction(std::vector<double> breaks, std::vector<double> values);

  /// Tail alpha -> (#{v > alpha}) / size of an empirical sample in [0, 1].
  static TailFunction empirical(std::span<const double> sample);

  double operator()(double alpha) const;
  const std::vector<double>& breaks() const noexcept { return breaks_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t pieces() const noexcept { return values_.size(); }

  friend bool operator==(const TailFunction&, const TailFunction&) = default;

 private:
  std::vector<double> breaks_;
  std::vector<double> values_;
};

/// F_{m'} = K o F_m^{-1}, with F^{-1}(t) = sup{alpha : F(alpha) > t}
/// (sup of the empty set is 0). `eta_cdf` must be a non-decreasing map of
/// [0,1] onto [0,1]; pass nullptr-like empty function for the uniform law.
TailFunction apply_L_eta(const TailFunction& tail,
                         const std::function<double(double)>& eta_cdf = {});

/// Exact integral over [0, 1].
double first_moment(const TailFunction& tail);

/// Sorted membership sample and the alpha-level risk it induces.
class RiskDistribution {
 public:
  explicit RiskDistribution(std::vector<double> memberships);

  std::size_t size() const noexcept { return memberships_.size(); }
  const std::vector<double>& memberships() const noexcept { return memberships_; }

  /// n(alpha): number of memberships strictly above alpha.
  std::size_t count_above(double alpha) const;
  TailFunction tail() const { return TailFunction::empirical(memberships_); }
  double mean_membership() const;

 private:
  std::vector<double> memberships_;
};

/// n(alpha) / M.
double alpha_level_risk(const RiskDistribution& dist, double alpha);

/// Draws M uniform points of the box from a seeded generator and evaluates
/// their memberships; the result does not depend on `threads`.
RiskDistribution risk_distribution_mc(const Field& field, const FailureSpec& fail,
                                       const Box& box, std::size_t samples,
                                       std::uint64_t seed, int threads = 1);

struct ConfidenceInterval {
  double level;
  double lo;
  double hi;

  double width() const noexcept { return hi - lo; }
  bool contains(double v) const noexcept { return v >= lo && v <= hi; }
};

struct RiskSummary {
  double mean = 0.0;
  double std = 0.0;
  /// Moments of the Monte Carlo draws behind the intervals (equal to
  /// mean/std for closed-form summaries).
  double sample_mean = 0.0;
  double sample_std = 0.0;
  std::vector<ConfidenceInterval> intervals;

  /// Interval at the given level; InvalidParameters if it was not computed.
  const ConfidenceInterval& interval(double level = 0.9) const;
};

/// Beta mixture over alpha ~ U[0,1] of Beta(n(alpha) + 1, M - n(alpha) + 1).
/// Mean and std are exact (the alpha integrals of n and n^2 are sums over the
/// sorted memberships); intervals are the shortest windows holding the
/// requested fraction of `draws` sorted Monte Carlo draws.
RiskSummary beta_mixture_stats(const RiskDistribution& dist, std::size_t draws,
                               std::uint64_t seed,
                               std::span<const double> levels = std::span<const double>());

/// Beta(k + 1, M - k + 1) summary with the shortest interval from beta quantiles.
RiskSummary beta_summary(std::size_t failures, std::size_t trials,
                         std::span<const double> levels = std::span<const double>());

/// Brute-force Monte Carlo on the true function at the first M Sobol points.
RiskSummary bmc_baseline(const BenchmarkProblem& problem, std::size_t samples,
                         std::span<const double> levels = std::span<const double>());

/// Number of defectives among the first M Sobol points of the problem box.
std::size_t count_sobol_failures(const BenchmarkProblem& problem, std::size_t samples);

}  // namespace krisk
