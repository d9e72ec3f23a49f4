#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "krisk/config.hpp"
#include "krisk/posterior.hpp"
#include "krisk/risk.hpp"

namespace krisk {

using CsvTable = std::vector<std::vector<std::string>>;

/// Plain comma-separated reader/writer (no quoting; numbers only need none).
CsvTable read_csv(const std::filesystem::path& path);
std::string format_csv(const CsvTable& table);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Training file with header x1,...,xD,y.
TrainingSet load_training_csv(const std::filesystem::path& path, const Box& box);
CsvTable training_table(const TrainingSet& set);

/// Distinct, reproducible sub-seed for a (seed, stream, index) triple.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

/// Calibrated (or fixed) kernel and the conditioned field of the configured kind.
struct FittedModel {
  KernelSpec kernel;
  double objective = 0.0;
  std::vector<RestartTrace> trace;
  std::vector<std::string> warnings;
  std::unique_ptr<Field> field;
};

FittedModel fit_model(const TrainingSet& set, const ExperimentConfig& config, std::uint64_t seed);

/// Central predictive bands of the Student field and of the plug-in Gaussian
/// (ML mean and variance) for the same kernel.
struct BandRow {
  double x = 0.0;
  double location = 0.0;
  double gaussian_lo = 0.0;
  double gaussian_hi = 0.0;
  double student_lo = 0.0;
  double student_hi = 0.0;
};

std::vector<BandRow> compare_bands(const TrainingSet& set, const KernelSpec& kernel,
                                   const std::vector<double>& grid, double level = 0.9);
CsvTable band_table(const std::vector<BandRow>& rows);

struct ConvergenceRow {
  std::string method;
  std::size_t budget = 0;
  double mean = 0.0;
  double std = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double r_t = 0.0;
  bool covered = false;
};

/// MMC and BMC summaries for every budget of the config.
std::vector<ConvergenceRow> convergence_rows(const ExperimentConfig& config);
CsvTable convergence_table(const std::vector<ConvergenceRow>& rows);

struct BenchmarkRow {
  std::string name;
  std::size_t dimension = 0;
  double theoretical = 0.0;
  double brute_force = 0.0;
  std::size_t samples = 0;
  std::size_t failures = 0;
  double std_error = 0.0;
};

std::vector<BenchmarkRow> benchmark_rows(std::size_t samples);

struct RunOutput {
  std::vector<std::filesystem::path> files;
  std::string report;
};

// Each run validates the config, writes its files under config.output and
// returns a short human-readable report.
RunOutput run_fit(const ExperimentConfig& config);
RunOutput run_risk(const ExperimentConfig& config);
RunOutput run_convergence(const ExperimentConfig& config);
RunOutput run_benchmark_table(const ExperimentConfig& config);
RunOutput run_adaptive(const ExperimentConfig& config);

}  // namespace krisk
