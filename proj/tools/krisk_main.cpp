#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "krisk/config.hpp"
#include "krisk/error.hpp"
#include "krisk/experiments.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kNumeric = 3, kIo = 4 };

int exit_code(krisk::ErrorCode code) {
  switch (code) {
    case krisk::ErrorCode::Config: return kConfig;
    case krisk::ErrorCode::Io: return kIo;
    default: return kNumeric;
  }
}

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, Options& o, bool needs_config) {
  auto* c = cmd->add_option("--config", o.config, "Experiment config file");
  if (needs_config) c->required();
  cmd->add_option("--seed", o.seed, "Seed overriding the config value");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--threads", o.threads, "Worker threads (0 = one per core)")->check(CLI::NonNegativeNumber);
}

krisk::ExperimentConfig resolve(const Options& o) {
  krisk::ExperimentConfig c;
  if (!o.config.empty()) c = krisk::load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.output = *o.out;
  if (o.threads) c.threads = *o.threads;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Failure-risk estimation with Student-process surrogates"};
  app.require_subcommand(1);
  Options opts;

  auto* fit = app.add_subcommand("fit", "Calibrate the kernel and report interpolation quality");
  auto* risk = app.add_subcommand("risk", "Estimate the failure risk distribution");
  auto* conv = app.add_subcommand("convergence", "MMC versus BMC over a list of budgets");
  auto* bench = app.add_subcommand("benchmarks", "Theoretical and Sobol brute-force risks of the reference problems");
  auto* adapt = app.add_subcommand("adaptive", "Entropy-driven design enrichment");
  for (auto* cmd : {fit, risk, conv, adapt}) add_common(cmd, opts, true);
  add_common(bench, opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    auto config = resolve(opts);
    if (bench->parsed() && !config.seed) config.seed = 0;  // Sobol counts do not use it
    krisk::RunOutput out;
    if (fit->parsed()) out = krisk::run_fit(config);
    else if (risk->parsed()) out = krisk::run_risk(config);
    else if (conv->parsed()) out = krisk::run_convergence(config);
    else if (bench->parsed()) out = krisk::run_benchmark_table(config);
    else out = krisk::run_adaptive(config);
    std::cout << out.report;
    for (const auto& f : out.files) std::cout << "wrote " << f.string() << "\n";
    return kOk;
  } catch (const krisk::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumeric;
  }
}
