#include "krisk/experiments.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "krisk/adaptive.hpp"
#include "krisk/error.hpp"
#include "krisk/mle.hpp"
#include "krisk/problems.hpp"

namespace krisk {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr double kLevel = 0.9;

std::string num(double v) { return format_double(v); }

Json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

Json kernel_json(const KernelSpec& k) {
  Json j;
  j["gamma"] = k.gamma();
  j["length_scales"] = k.length_scales();
  j["jitter"] = k.jitter();
  return j;
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path prepare_output(const ExperimentConfig& config) {
  const fs::path dir(config.output);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

TrainingSet training_for(const ExperimentConfig& config, const BenchmarkProblem& problem,
                         std::size_t n, std::uint64_t seed) {
  if (!config.training_csv.empty()) return load_training_csv(config.training_csv, problem.box());
  return sample_training_set(problem, n, seed);
}

double parse_cell(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::Io, where + ": not a finite number: '" + s + "'");
  }
  return v;
}

}  // namespace

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  CsvTable out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> row;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      row.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::string format_csv(const CsvTable& table) {
  std::string out;
  for (const auto& row : table) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

TrainingSet load_training_csv(const fs::path& path, const Box& box) {
  const auto table = read_csv(path);
  const std::string where = path.string();
  if (table.empty()) throw Error(ErrorCode::Io, where + ": empty file");
  const auto& header = table.front();
  const std::size_t dim = box.dimension();
  if (header.size() != dim + 1) {
    throw Error(ErrorCode::Io, where + ": expected " + std::to_string(dim + 1) +
                                   " columns (x1..x" + std::to_string(dim) + ",y)");
  }
  for (std::size_t j = 0; j < dim; ++j) {
    if (header[j] != "x" + std::to_string(j + 1)) {
      throw Error(ErrorCode::Io, where + ": header column " + std::to_string(j + 1) + " must be x" +
                                     std::to_string(j + 1));
    }
  }
  if (header.back() != "y") throw Error(ErrorCode::Io, where + ": last header column must be y");
  const auto n = static_cast<Eigen::Index>(table.size() - 1);
  Matrix pts(n, static_cast<Eigen::Index>(dim));
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table[static_cast<std::size_t>(i) + 1];
    const std::string line = where + ":" + std::to_string(i + 2);
    if (row.size() != dim + 1) throw Error(ErrorCode::Io, line + ": wrong number of columns");
    for (std::size_t j = 0; j < dim; ++j) pts(i, static_cast<Eigen::Index>(j)) = parse_cell(row[j], line);
    y(i) = parse_cell(row.back(), line);
  }
  if (n == 0) throw Error(ErrorCode::TooFewPoints, where + ": no observations");
  return TrainingSet(std::move(pts), std::move(y), box);
}

CsvTable training_table(const TrainingSet& set) {
  CsvTable t;
  std::vector<std::string> header;
  for (std::size_t j = 0; j < set.dimension(); ++j) header.push_back("x" + std::to_string(j + 1));
  header.push_back("y");
  t.push_back(std::move(header));
  for (std::size_t i = 0; i < set.size(); ++i) {
    std::vector<std::string> row;
    for (std::size_t j = 0; j < set.dimension(); ++j) {
      row.push_back(num(set.points()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
    }
    row.push_back(num(set.responses()(static_cast<Eigen::Index>(i))));
    t.push_back(std::move(row));
  }
  return t;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  // splitmix64 finaliser over a mix of the three inputs
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1) + 0xBF58476D1CE4E5B9ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

FittedModel fit_model(const TrainingSet& set, const ExperimentConfig& config, std::uint64_t seed) {
  FittedModel out{KernelSpec(2.0, std::vector<double>(set.dimension(), 1.0)), 0.0, {}, {}, nullptr};
  if (!config.fixed_lengths.empty()) {
    if (config.fixed_lengths.size() != set.dimension()) {
      throw Error(ErrorCode::Config, "search.lengths: expected " + std::to_string(set.dimension()) + " values");
    }
    out.kernel = KernelSpec(*config.pinned_gamma, config.fixed_lengths, config.jitter);
    out.objective = config.model == ModelKind::Student ? student_objective(set, out.kernel)
                                                       : gaussian_objective(set, out.kernel);
  } else {
    auto search = config.search();
    search.seed = seed;
    auto mle = calibrate(set, config.model, search);
    out.kernel = mle.best;
    out.objective = mle.objective;
    out.trace = std::move(mle.trace);
    out.warnings = std::move(mle.warnings);
  }
  if (config.model == ModelKind::Student) {
    out.field = std::make_unique<StudentPosterior>(condition_student(set, out.kernel));
  } else {
    const auto c = gaussian_mle_constants(set, out.kernel);
    out.field = std::make_unique<GaussianPosterior>(condition_gaussian(set, out.kernel, c.mean, c.variance));
  }
  return out;
}

std::vector<BandRow> compare_bands(const TrainingSet& set, const KernelSpec& kernel,
                                   const std::vector<double>& grid, double level) {
  if (set.dimension() != 1) throw Error(ErrorCode::DimensionMismatch, "bands are for one-dimensional fields");
  const auto student = condition_student(set, kernel);
  const auto c = gaussian_mle_constants(set, kernel);
  const auto gauss = condition_gaussian(set, kernel, c.mean, c.variance);
  std::vector<BandRow> rows;
  rows.reserve(grid.size());
  for (double x : grid) {
    Vector v(1);
    v(0) = x;
    const auto ps = student.predict(v);
    const auto pg = gauss.predict(v);
    const double hs = interval_half_width(ps, level);
    const double hg = interval_half_width(pg, level);
    rows.push_back(BandRow{x, ps.location, pg.location - hg, pg.location + hg, ps.location - hs,
                           ps.location + hs});
  }
  return rows;
}

CsvTable band_table(const std::vector<BandRow>& rows) {
  CsvTable t{{"x", "location", "gaussian_lo", "gaussian_hi", "student_lo", "student_hi"}};
  for (const auto& r : rows) {
    t.push_back({num(r.x), num(r.location), num(r.gaussian_lo), num(r.gaussian_hi), num(r.student_lo),
                 num(r.student_hi)});
  }
  return t;
}

std::vector<ConvergenceRow> convergence_rows(const ExperimentConfig& config) {
  config.validate();
  const auto problem = config.benchmark();
  const double rt = problem.theoretical_risk();
  const std::uint64_t seed = *config.seed;
  std::vector<ConvergenceRow> rows;
  const double level = kLevel;
  for (std::size_t m : config.budgets) {
    const auto set = sample_training_set(problem, m, derive_seed(seed, 1, m));
    const auto model = fit_model(set, config, derive_seed(seed, 2, m));
    const auto dist = risk_distribution_mc(*model.field, problem.failure(), problem.box(),
                                           config.membership_samples, derive_seed(seed, 3, m),
                                           config.threads);
    const auto mmc = beta_mixture_stats(dist, config.mixture_draws, derive_seed(seed, 4, m),
                                        std::span<const double>(&level, 1));
    const auto& ci = mmc.interval(level);
    rows.push_back({"MMC", m, mmc.mean, mmc.std, ci.lo, ci.hi, rt, ci.contains(rt)});

    const auto bmc = bmc_baseline(problem, m, std::span<const double>(&level, 1));
    const auto& bi = bmc.interval(level);
    rows.push_back({"BMC", m, bmc.mean, bmc.std, bi.lo, bi.hi, rt, bi.contains(rt)});
  }
  return rows;
}

CsvTable convergence_table(const std::vector<ConvergenceRow>& rows) {
  CsvTable t{{"method", "M", "mean", "std", "lo90", "hi90", "r_t", "covered"}};
  for (const auto& r : rows) {
    t.push_back({r.method, std::to_string(r.budget), num(r.mean), num(r.std), num(r.lo), num(r.hi),
                 num(r.r_t), r.covered ? "true" : "false"});
  }
  return t;
}

std::vector<BenchmarkRow> benchmark_rows(std::size_t samples) {
  std::vector<BenchmarkRow> rows;
  for (const auto& p : reference_problems()) {
    const auto k = count_sobol_failures(p, samples);
    const double rt = p.theoretical_risk();
    const double m = static_cast<double>(samples);
    rows.push_back({std::string(p.name()), p.dimension(), rt, static_cast<double>(k) / m, samples, k,
                    std::sqrt(rt * (1.0 - rt) / m)});
  }
  return rows;
}

RunOutput run_fit(const ExperimentConfig& config) {
  config.validate();
  const auto problem = config.benchmark();
  const auto dir = prepare_output(config);
  const auto seed = *config.seed;
  const auto set = training_for(config, problem, config.training_points, derive_seed(seed, 1));
  const auto model = fit_model(set, config, derive_seed(seed, 2));

  double max_loc = 0.0;
  double max_scale = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto p = model.field->predict(set.point(i));
    max_loc = std::max(max_loc, std::abs(p.location - set.responses()(static_cast<Eigen::Index>(i))));
    max_scale = std::max(max_scale, p.scale);
  }
  const auto err = relative_error_stats(*model.field, problem, config.probes, derive_seed(seed, 5));

  Json j;
  j["problem"] = config.problem;
  j["model"] = config.model == ModelKind::Student ? "student" : "gaussian-mle";
  j["n"] = set.size();
  j["dimension"] = set.dimension();
  j["kernel"] = kernel_json(model.kernel);
  j["objective"] = model.objective;
  if (const auto* s = dynamic_cast<const StudentPosterior*>(model.field.get())) {
    j["student"] = {{"dof", s->dof()}, {"gls_mean", s->gls_mean()}, {"dispersion", s->dispersion()}};
  } else if (const auto* g = dynamic_cast<const GaussianPosterior*>(model.field.get())) {
    j["gaussian"] = {{"mean", g->mean()}, {"variance", g->variance()}};
  }
  j["interpolation"] = {{"max_location_error", max_loc}, {"max_scale", max_scale}};
  j["relative_error"] = {{"probes", config.probes}, {"mean", err.mean}, {"q90", err.quantile(0.9)}};
  Json restarts = Json::array();
  for (const auto& t : model.trace) {
    restarts.push_back({{"start", kernel_json(t.start)}, {"end", kernel_json(t.end)},
                        {"objective", finite_or_null(t.end_objective)}});
  }
  j["restarts"] = restarts;
  j["warnings"] = model.warnings;

  RunOutput out;
  out.files = {dir / "fit.json", dir / "training.csv", dir / "relative_error.csv"};
  write_json(out.files[0], j);
  write_text(out.files[1], format_csv(training_table(set)));
  CsvTable ccdf{{"threshold", "ccdf"}};
  for (const auto& [t, p] : err.ccdf) ccdf.push_back({num(t), num(p)});
  write_text(out.files[2], format_csv(ccdf));
  if (set.dimension() == 1) {
    const auto& side = problem.box()[0];
    std::vector<double> grid;
    for (int i = 0; i <= 1000; ++i) grid.push_back(side.lo + (side.hi - side.lo) * i / 1000.0);
    out.files.push_back(dir / "band.csv");
    write_text(out.files.back(), format_csv(band_table(compare_bands(set, model.kernel, grid))));
  }

  std::ostringstream r;
  r << "fit " << config.problem << " n=" << set.size() << " gamma=" << model.kernel.gamma() << " lengths=[";
  for (std::size_t i = 0; i < model.kernel.length_scales().size(); ++i) {
    r << (i ? ", " : "") << model.kernel.length_scales()[i];
  }
  r << "] objective=" << model.objective << " mean_rel_error=" << err.mean << "\n";
  for (const auto& w : model.warnings) r << "warning: " << w << "\n";
  out.report = r.str();
  return out;
}

RunOutput run_risk(const ExperimentConfig& config) {
  config.validate();
  const auto problem = config.benchmark();
  const auto dir = prepare_output(config);
  const auto seed = *config.seed;
  const auto set = training_for(config, problem, config.training_points, derive_seed(seed, 1));
  const auto model = fit_model(set, config, derive_seed(seed, 2));
  const auto dist = risk_distribution_mc(*model.field, problem.failure(), problem.box(),
                                         config.membership_samples, derive_seed(seed, 3), config.threads);
  const double level = kLevel;
  const auto s = beta_mixture_stats(dist, config.mixture_draws, derive_seed(seed, 4),
                                    std::span<const double>(&level, 1));
  const auto& ci = s.interval(level);
  const double rt = problem.theoretical_risk();

  Json j;
  j["problem"] = config.problem;
  j["model"] = config.model == ModelKind::Student ? "student" : "gaussian-mle";
  j["n"] = set.size();
  j["kernel"] = kernel_json(model.kernel);
  j["membership_samples"] = config.membership_samples;
  j["mixture_draws"] = config.mixture_draws;
  j["mean_membership"] = dist.mean_membership();
  j["mean"] = s.mean;
  j["std"] = s.std;
  j["lo90"] = ci.lo;
  j["hi90"] = ci.hi;
  j["r_t"] = rt;
  j["covered"] = ci.contains(rt);

  CsvTable curve{{"alpha", "risk"}};
  for (int i = 0; i <= 100; ++i) {
    const double a = i / 100.0;
    curve.push_back({num(a), num(alpha_level_risk(dist, a))});
  }

  RunOutput out;
  out.files = {dir / "risk.json", dir / "alpha_risk.csv"};
  write_json(out.files[0], j);
  write_text(out.files[1], format_csv(curve));
  std::ostringstream r;
  r << "risk " << config.problem << " n=" << set.size() << " mean=" << s.mean << " 90%=[" << ci.lo << ", "
    << ci.hi << "] r_t=" << rt << (ci.contains(rt) ? " (covered)" : " (not covered)") << "\n";
  out.report = r.str();
  return out;
}

RunOutput run_convergence(const ExperimentConfig& config) {
  const auto rows = convergence_rows(config);
  const auto dir = prepare_output(config);
  Json j;
  j["problem"] = config.problem;
  j["model"] = config.model == ModelKind::Student ? "student" : "gaussian-mle";
  j["r_t"] = rows.front().r_t;
  j["budgets"] = config.budgets;
  j["membership_samples"] = config.membership_samples;
  j["mixture_draws"] = config.mixture_draws;
  std::size_t mmc = 0;
  std::size_t bmc = 0;
  for (const auto& r : rows) (r.method == "MMC" ? mmc : bmc) += r.covered ? 1 : 0;
  j["covered"] = {{"MMC", mmc}, {"BMC", bmc}};

  RunOutput out;
  out.files = {dir / "convergence.csv", dir / "convergence.json"};
  write_text(out.files[0], format_csv(convergence_table(rows)));
  write_json(out.files[1], j);
  std::ostringstream r;
  r << std::left << std::setw(8) << "method" << std::setw(7) << "M" << std::setw(13) << "mean" << std::setw(13)
    << "lo90" << std::setw(13) << "hi90" << "covered\n";
  for (const auto& row : rows) {
    r << std::setw(8) << row.method << std::setw(7) << row.budget << std::setw(13) << row.mean << std::setw(13)
      << row.lo << std::setw(13) << row.hi << (row.covered ? "yes" : "no") << "\n";
  }
  out.report = r.str();
  return out;
}

RunOutput run_benchmark_table(const ExperimentConfig& config) {
  config.validate();
  const auto dir = prepare_output(config);
  const auto rows = benchmark_rows(config.brute_force_samples);
  CsvTable t{{"problem", "dimension", "r_t", "brute_force", "samples", "failures", "std_error"}};
  std::ostringstream r;
  r << std::left << std::setw(9) << "problem" << std::setw(4) << "D" << std::setw(14) << "r_t" << std::setw(14)
    << "sobol" << "M\n";
  for (const auto& row : rows) {
    t.push_back({row.name, std::to_string(row.dimension), num(row.theoretical), num(row.brute_force),
                 std::to_string(row.samples), std::to_string(row.failures), num(row.std_error)});
    r << std::setw(9) << row.name << std::setw(4) << row.dimension << std::setw(14) << std::setprecision(4)
      << row.theoretical << std::setw(14) << row.brute_force << row.samples << "\n";
  }
  RunOutput out;
  out.files = {dir / "benchmarks.csv"};
  write_text(out.files[0], format_csv(t));
  out.report = r.str();
  return out;
}

RunOutput run_adaptive(const ExperimentConfig& config) {
  config.validate();
  const auto problem = config.benchmark();
  const auto dir = prepare_output(config);
  const auto result = enrichment_loop(problem, config.enrichment());
  CsvTable t{{"round", "n", "mean", "lo90", "hi90", "max_entropy", "insufficient"}};
  for (const auto& row : result.log) {
    t.push_back({std::to_string(row.round), std::to_string(row.n), num(row.mean), num(row.lo), num(row.hi),
                 num(row.max_entropy), row.insufficient ? "true" : "false"});
  }
  const auto& last = result.log.back();
  Json j;
  j["problem"] = config.problem;
  j["rounds_run"] = result.log.size() - 1;
  j["final_n"] = result.design.size();
  j["final_mean"] = last.mean;
  j["final_lo90"] = last.lo;
  j["final_hi90"] = last.hi;
  j["r_t"] = problem.theoretical_risk();

  RunOutput out;
  out.files = {dir / "adaptive.csv", dir / "adaptive.json", dir / "design.csv"};
  write_text(out.files[0], format_csv(t));
  write_json(out.files[1], j);
  write_text(out.files[2], format_csv(training_table(result.design)));
  std::ostringstream r;
  for (const auto& row : result.log) {
    r << "round " << row.round << " n=" << row.n << " mean=" << row.mean << " 90%=[" << row.lo << ", " << row.hi
      << "] width=" << row.hi - row.lo << "\n";
  }
  out.report = r.str();
  return out;
}

}  // namespace krisk
