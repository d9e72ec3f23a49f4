#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "krisk/kernels.hpp"

namespace krisk {

enum class ModelKind { Gaussian, Student };

std::string_view to_string(ModelKind kind) noexcept;

/// Multi-start Nelder-Mead settings for kernel calibration.
struct SearchConfig {
  int restarts = 8;
  std::uint64_t seed = 0;
  double gamma_min = 0.5;
  double gamma_max = 2.0;
  /// When set, gamma is held fixed and only length-scales are searched.
  std::optional<double> pinned_gamma;
  /// Length-scale bounds; default to 1e-3 and 10 times the box diagonal.
  std::optional<double> length_min;
  std::optional<double> length_max;
  int max_evaluations = 400;
  double jitter = 0.0;
  int threads = 1;
};

struct RestartTrace {
  KernelSpec start;
  KernelSpec end;
  double end_objective;
};

struct MleResult {
  KernelSpec best;
  double objective;
  std::vector<RestartTrace> trace;
  ModelKind kind;
  std::vector<std::string> warnings;
};

/// Negative log of the improper-limit marginal likelihood, up to constants:
/// n ln s2 + ln|Sigma| + 2 ln(1 Sigma^-1 1^T / s2).
double student_objective(const TrainingSet& set, const KernelSpec& spec);

/// n ln s2 + ln|Sigma|, the profile likelihood of the plug-in Gaussian model.
double gaussian_objective(const TrainingSet& set, const KernelSpec& spec);

struct GaussianConstants {
  double mean;
  double variance;
};

/// Closed-form ML mean (GLS) and variance (1/n weighted residual norm).
GaussianConstants gaussian_mle_constants(const TrainingSet& set, const KernelSpec& spec);

MleResult calibrate(const TrainingSet& set, ModelKind kind, const SearchConfig& search = {});

}  // namespace krisk
