#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "krisk/adaptive.hpp"
#include "krisk/failure.hpp"
#include "krisk/mle.hpp"
#include "krisk/problems.hpp"

namespace krisk {

/// Explicit problem parameters, used when `problem.name = "custom"`.
struct CustomProblem {
  ProblemKind kind = ProblemKind::Quadric;
  std::vector<double> coefficients;  // quadric a_i or sine a_i (integers)
  std::vector<double> centres;       // bell, row-major R x D
  std::vector<double> widths;        // bell
  std::size_t dimension = 0;         // bell only
  double threshold = 0.0;
  Orientation orientation = Orientation::Upper;

  friend bool operator==(const CustomProblem&, const CustomProblem&) = default;
};

struct ExperimentConfig {
  std::string problem = "quadric";
  std::optional<CustomProblem> custom;
  ModelKind model = ModelKind::Student;

  std::string training_csv;  // empty: sample the benchmark
  std::size_t training_points = 50;

  int restarts = 8;
  double gamma_min = 0.5;
  double gamma_max = 2.0;
  std::optional<double> pinned_gamma;
  /// With a pinned gamma, fixes the kernel and skips calibration.
  std::vector<double> fixed_lengths;
  int max_evaluations = 400;
  double jitter = 0.0;

  std::vector<std::size_t> budgets{30, 60, 100, 200, 400, 600};
  std::size_t membership_samples = 1000;
  std::size_t mixture_draws = 20000;
  std::size_t probes = 10000;
  std::size_t brute_force_samples = 200000;

  std::size_t initial_points = 30;
  int rounds = 10;
  std::size_t batch = 10;
  double width_target = 0.0;
  int starts = 32;

  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string output = "out";

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

  /// Throws Config naming the offending field.
  void validate() const;

  SearchConfig search() const;
  EnrichmentConfig enrichment() const;
  BenchmarkProblem benchmark() const;
};

/// Parses the TOML-style text format. Unknown keys, malformed values and
/// type mismatches raise Config with the `section.key` and line number.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Canonical text: every field in a fixed order, numbers in shortest
/// round-trip form. parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

std::string_view to_string(Orientation o) noexcept;
ModelKind parse_model_kind(std::string_view s);

}  // namespace krisk
