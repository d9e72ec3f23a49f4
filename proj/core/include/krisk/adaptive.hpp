#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "krisk/mle.hpp"
#include "krisk/posterior.hpp"

namespace krisk {

class BenchmarkProblem;

/// Differential entropy of a predictive marginal; -inf for a Dirac (scale 0).
double marginal_entropy(const PointPrediction& p);

/// Entropy of the field's marginal at x.
double pointwise_entropy(const Field& field, const Vector& x);

struct MultistartConfig {
  int starts = 32;
  std::uint64_t seed = 0;
  int max_evaluations = 200;
  int threads = 1;
};

struct DesignProposal {
  std::vector<Vector> points;       // sorted by decreasing entropy
  std::vector<double> entropies;
  int round = 0;
  bool insufficient = false;        // fewer than k separated maxima were found
};

/// Local entropy maxima from Sobol starts, greedily filtered so that kept
/// points are at least `min_separation` apart from each other and from the
/// training points. The default separation is 1% of the box diagonal.
DesignProposal propose_points(const Field& field, std::size_t k,
                              const MultistartConfig& search = {},
                              std::optional<double> min_separation = std::nullopt);

struct EnrichmentConfig {
  std::size_t initial_points = 30;
  int rounds = 10;
  std::size_t batch = 10;
  /// Stop once the 90% interval is at most this wide (0 disables).
  double width_target = 0.0;
  ModelKind model = ModelKind::Student;
  SearchConfig search;
  MultistartConfig multistart;
  std::size_t membership_samples = 1000;
  std::size_t mixture_draws = 20000;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct EnrichmentRow {
  int round = 0;
  std::size_t n = 0;
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double max_entropy = 0.0;
  bool insufficient = false;
};

struct EnrichmentResult {
  std::vector<EnrichmentRow> log;
  TrainingSet design;
};

/// Calibrate, condition, estimate the risk, then add the proposed points
/// evaluated on the true function; repeats until the width target or the
/// round cap is reached. Row 0 describes the initial design.
EnrichmentResult enrichment_loop(const BenchmarkProblem& problem, const EnrichmentConfig& config);

}  // namespace krisk
