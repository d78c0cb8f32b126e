#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "ldis/distributions.hpp"
#include "ldis/event_set.hpp"
#include "ldis/limits.hpp"
#include "ldis/mc_engine.hpp"
#include "ldis/rate_functions.hpp"

namespace {

void BM_LogSumAccumulator(benchmark::State& state) {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> d(-50.0, 20.0);
  std::vector<double> terms(static_cast<std::size_t>(state.range(0)));
  for (double& t : terms) t = d(gen);
  for (auto _ : state) {
    ldis::LogSumAccumulator acc;
    for (double t : terms) acc.add(t);
    benchmark::DoNotOptimize(acc.log_sum());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LogSumAccumulator)->Arg(1 << 16);

void BM_TwoPassLogSum(benchmark::State& state) {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> d(-50.0, 20.0);
  std::vector<double> terms(static_cast<std::size_t>(state.range(0)));
  for (double& t : terms) t = d(gen);
  for (auto _ : state) benchmark::DoNotOptimize(ldis::two_pass_log_sum(terms));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TwoPassLogSum)->Arg(1 << 16);

// Walk steps per second for a single-threaded cell.
void BM_RunCellGaussian(benchmark::State& state) {
  const auto p = ldis::DistributionModel::gaussian(0.0, 1.0);
  const auto q = ldis::tilt(p, 0.8);
  const auto A = ldis::EventSet::at_least(0.8);
  const int n = static_cast<int>(state.range(0));
  const std::uint64_t m = 1 << 14;
  ldis::RunOptions opts;
  opts.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(ldis::run_cell(p, q, n, m, A, {1.0, 2.0}, 1, {}, opts));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m) * n);
}
BENCHMARK(BM_RunCellGaussian)->Arg(30)->Arg(400);

void BM_RunCellExponential(benchmark::State& state) {
  const auto p = ldis::DistributionModel::exponential(1.0);
  const auto q = ldis::DistributionModel::exponential(1.0 / 1.3);
  const auto A = ldis::EventSet::at_least(1.3);
  const int n = static_cast<int>(state.range(0));
  const std::uint64_t m = 1 << 14;
  ldis::RunOptions opts;
  opts.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(ldis::run_cell(p, q, n, m, A, {1.0}, 1, {}, opts));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m) * n);
}
BENCHMARK(BM_RunCellExponential)->Arg(400);

void BM_Legendre(benchmark::State& state) {
  const auto g = ldis::DistributionModel::gaussian(0.0, 1.0);
  const auto e = ldis::DistributionModel::exponential(1.0);
  const auto d = ldis::DistributionModel::finite_discrete({0.0, 1.0, 3.0}, {0.5, 0.3, 0.2});
  for (auto _ : state) {
    benchmark::DoNotOptimize(ldis::legendre(g, 1.7));
    benchmark::DoNotOptimize(ldis::legendre(e, 1.3));
    benchmark::DoNotOptimize(ldis::legendre(d, 2.2));
  }
}
BENCHMARK(BM_Legendre);

void BM_LraCurveTwoSided(benchmark::State& state) {
  const auto p = ldis::DistributionModel::gaussian(0.0, 1.0);
  const auto q = ldis::tilt(p, 1.0);
  const auto A = ldis::EventSet::two_sided(1.0, 1.2);
  const auto grid = ldis::log_grid(0.01, 3.0, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ldis::lra_curve(p, q, A, grid));
}
BENCHMARK(BM_LraCurveTwoSided)->Arg(300);

}  // namespace

BENCHMARK_MAIN();
