#include <benchmark/benchmark.h>

#include "krisk/kernels.hpp"
#include "krisk/linalg.hpp"
#include "krisk/mle.hpp"
#include "krisk/posterior.hpp"
#include "krisk/problems.hpp"
#include "krisk/risk.hpp"

namespace {

krisk::TrainingSet quadric_design(std::size_t n) {
  return krisk::sample_training_set(krisk::reference_problem("quadric"), n, 11);
}

krisk::KernelSpec spec5() { return krisk::KernelSpec(1.8, {0.9, 1.1, 1.0, 0.8, 1.2}); }

void BM_Factor(benchmark::State& state) {
  const auto set = quadric_design(static_cast<std::size_t>(state.range(0)));
  const auto sigma = krisk::correlation_matrix(spec5(), set);
  for (auto _ : state) {
    auto f = krisk::factor(sigma);
    benchmark::DoNotOptimize(f.log_det());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Factor)->RangeMultiplier(2)->Range(50, 800)->Complexity(benchmark::oNCubed);

void BM_StudentObjective(benchmark::State& state) {
  const auto set = quadric_design(static_cast<std::size_t>(state.range(0)));
  const auto spec = spec5();
  for (auto _ : state) benchmark::DoNotOptimize(krisk::student_objective(set, spec));
}
BENCHMARK(BM_StudentObjective)->Arg(100)->Arg(300)->Arg(600);

void BM_Predict(benchmark::State& state) {
  const auto set = quadric_design(static_cast<std::size_t>(state.range(0)));
  const auto field = krisk::condition_student(set, spec5());
  krisk::Vector x = krisk::Vector::Constant(5, 0.1);
  for (auto _ : state) {
    x(0) = -x(0);
    benchmark::DoNotOptimize(field.predict(x));
  }
}
BENCHMARK(BM_Predict)->Arg(100)->Arg(600);

void BM_RiskDistribution(benchmark::State& state) {
  const auto problem = krisk::reference_problem("quadric");
  const auto set = quadric_design(200);
  const auto field = krisk::condition_student(set, spec5());
  for (auto _ : state) {
    auto d = krisk::risk_distribution_mc(field, problem.failure(), problem.box(),
                                         static_cast<std::size_t>(state.range(0)), 3);
    benchmark::DoNotOptimize(d.size());
  }
}
BENCHMARK(BM_RiskDistribution)->Arg(1000);

void BM_BetaMixture(benchmark::State& state) {
  std::vector<double> m(1000);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = static_cast<double>(i % 17) / 16.0;
  const krisk::RiskDistribution dist(m);
  for (auto _ : state) {
    benchmark::DoNotOptimize(krisk::beta_mixture_stats(dist, static_cast<std::size_t>(state.range(0)), 5).mean);
  }
}
BENCHMARK(BM_BetaMixture)->Arg(20000);

}  // namespace

BENCHMARK_MAIN();
