#include "krisk/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "krisk/error.hpp"
#include "krisk/nelder_mead.hpp"
#include "krisk/parallel.hpp"
#include "krisk/problems.hpp"
#include "krisk/risk.hpp"
#include "krisk/sobol.hpp"
#include "krisk/specfun.hpp"

namespace krisk {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Candidate {
  Vector x;
  double entropy;
  std::size_t start;
};

double min_distance(const Vector& x, const Matrix& points) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    best = std::min(best, (points.row(i).transpose() - x).norm());
  }
  return best;
}

std::unique_ptr<Field> fit_field(const TrainingSet& set, ModelKind kind, const SearchConfig& search) {
  const auto mle = calibrate(set, kind, search);
  if (kind == ModelKind::Student) {
    return std::make_unique<StudentPosterior>(condition_student(set, mle.best));
  }
  const auto c = gaussian_mle_constants(set, mle.best);
  return std::make_unique<GaussianPosterior>(condition_gaussian(set, mle.best, c.mean, c.variance));
}

}  // namespace

double marginal_entropy(const PointPrediction& p) {
  if (!(p.scale > 0.0)) return kNegInf;
  if (p.gaussian()) {
    return std::log(p.scale) + 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);
  }
  return std::log(p.scale) + specfun::student_entropy(p.dof);
}

double pointwise_entropy(const Field& field, const Vector& x) {
  return marginal_entropy(field.predict(x));
}

DesignProposal propose_points(const Field& field, std::size_t k, const MultistartConfig& search,
                              std::optional<double> min_separation) {
  if (k == 0) throw Error(ErrorCode::InvalidParameters, "need k >= 1 proposals");
  if (search.starts < 1) throw Error(ErrorCode::InvalidParameters, "need at least one start");
  const auto& box = field.training().box();
  const std::size_t dim = field.dimension();
  const double sep = min_separation.value_or(0.01 * box.diagonal());
  if (!(sep >= 0.0)) throw Error(ErrorCode::InvalidParameters, "negative separation");

  // Sobol starts with a seeded random shift modulo 1.
  std::mt19937_64 rng(search.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> shift(dim);
  for (auto& s : shift) s = unit(rng);
  const auto starts = static_cast<std::size_t>(search.starts);
  const Matrix grid = sobol_points(dim, starts);

  auto to_box = [&](const std::vector<double>& u) {
    std::vector<double> c(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) c[j] = std::clamp(u[j], 0.0, 1.0);
    return box.from_unit(c);
  };

  std::vector<Candidate> found(starts);
  parallel_for(starts, search.threads, [&](std::size_t s) {
    std::vector<double> u(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      u[j] = std::fmod(grid(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) + shift[j], 1.0);
    }
    NelderMeadOptions opt;
    opt.max_evaluations = search.max_evaluations;
    opt.initial_step = 0.1;
    opt.value_tolerance = 1e-10;
    opt.point_tolerance = 1e-6;
    const auto res = nelder_mead(
        [&](const std::vector<double>& v) { return -pointwise_entropy(field, to_box(v)); }, u, opt);
    const Vector x = to_box(res.point);
    found[s] = Candidate{x, pointwise_entropy(field, x), s};
  });

  std::stable_sort(found.begin(), found.end(), [](const Candidate& a, const Candidate& b) {
    return a.entropy > b.entropy;
  });

  DesignProposal out;
  const Matrix& train = field.training().points();
  for (const auto& c : found) {
    if (out.points.size() == k) break;
    if (!std::isfinite(c.entropy)) continue;
    if (min_distance(c.x, train) < sep || min_distance(c.x, train) == 0.0) continue;
    bool clear = true;
    for (const auto& p : out.points) {
      if ((p - c.x).norm() < sep || p == c.x) {
        clear = false;
        break;
      }
    }
    if (!clear) continue;
    out.points.push_back(c.x);
    out.entropies.push_back(c.entropy);
  }
  out.insufficient = out.points.size() < k;
  return out;
}

EnrichmentResult enrichment_loop(const BenchmarkProblem& problem, const EnrichmentConfig& config) {
  if (config.rounds < 0) throw Error(ErrorCode::InvalidParameters, "negative round cap");
  if (config.batch == 0) throw Error(ErrorCode::InvalidParameters, "batch must be positive");
  TrainingSet design = sample_training_set(problem, config.initial_points, config.seed);
  const double level = 0.9;
  std::vector<EnrichmentRow> log;

  for (int round = 0;; ++round) {
    SearchConfig search = config.search;
    search.seed = config.search.seed + static_cast<std::uint64_t>(round);
    search.threads = config.threads;
    const auto field = fit_field(design, config.model, search);

    const auto dist = risk_distribution_mc(*field, problem.failure(), problem.box(),
                                           config.membership_samples,
                                           config.seed + 1000 + static_cast<std::uint64_t>(round),
                                           config.threads);
    const auto summary = beta_mixture_stats(dist, config.mixture_draws,
                                            config.seed + 2000 + static_cast<std::uint64_t>(round),
                                            std::span<const double>(&level, 1));
    const auto& ci = summary.interval(level);

    MultistartConfig ms = config.multistart;
    ms.seed = config.multistart.seed + static_cast<std::uint64_t>(round);
    ms.threads = config.threads;
    auto proposal = propose_points(*field, config.batch, ms);
    proposal.round = round;

    EnrichmentRow row;
    row.round = round;
    row.n = design.size();
    row.mean = summary.mean;
    row.lo = ci.lo;
    row.hi = ci.hi;
    row.max_entropy = proposal.entropies.empty() ? kNegInf : proposal.entropies.front();
    row.insufficient = proposal.insufficient;
    log.push_back(row);

    const bool met = config.width_target > 0.0 && ci.width() <= config.width_target;
    if (met || round >= config.rounds || proposal.points.empty()) break;

    Matrix add(static_cast<Eigen::Index>(proposal.points.size()), static_cast<Eigen::Index>(problem.dimension()));
    Vector y(add.rows());
    for (std::size_t i = 0; i < proposal.points.size(); ++i) {
      add.row(static_cast<Eigen::Index>(i)) = proposal.points[i].transpose();
      y(static_cast<Eigen::Index>(i)) = problem.evaluate(proposal.points[i]);
    }
    design = design.augmented(add, y);
  }
  return EnrichmentResult{std::move(log), std::move(design)};
}

}  // namespace krisk
