#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "esc_dag/gram_kernel.hpp"
#include "esc_dag/posterior.hpp"
#include "esc_dag/rng.hpp"

using namespace esc_dag;

namespace {

DataMatrix gaussian_matrix(int n, int p, std::uint64_t seed) {
  Rng rng(seed);
  return DataMatrix(Eigen::MatrixXd::NullaryExpr(n, p, [&] { return standard_normal(rng); }));
}

SupportSet first_k(int column, int k) {
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  return SupportSet(column, idx);
}

}  // namespace

static void BM_GramPrecompute(benchmark::State& state) {
  const DataMatrix data = gaussian_matrix(100, static_cast<int>(state.range(0)), 1);
  for (auto _ : state) {
    GramKernel kernel(data);
    benchmark::DoNotOptimize(kernel.gram().data());
  }
}
BENCHMARK(BM_GramPrecompute)->Arg(100)->Arg(300);

static void BM_FreshFit(benchmark::State& state) {
  const DataMatrix data = gaussian_matrix(100, 300, 2);
  const GramKernel kernel(data);
  const SupportSet s = first_k(299, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernel.fit(s).d_hat());
}
BENCHMARK(BM_FreshFit)->Arg(5)->Arg(20)->Arg(50);

static void BM_IncrementalAdd(benchmark::State& state) {
  const DataMatrix data = gaussian_matrix(100, 300, 3);
  const GramKernel kernel(data);
  const int k = static_cast<int>(state.range(0));
  const FitSummary base = kernel.fit(first_k(299, k));
  for (auto _ : state) benchmark::DoNotOptimize(kernel.add(base, k).d_hat());
}
BENCHMARK(BM_IncrementalAdd)->Arg(5)->Arg(20)->Arg(50);

static void BM_IncrementalRemove(benchmark::State& state) {
  const DataMatrix data = gaussian_matrix(100, 300, 4);
  const GramKernel kernel(data);
  const int k = static_cast<int>(state.range(0));
  const FitSummary base = kernel.fit(first_k(299, k));
  for (auto _ : state) benchmark::DoNotOptimize(kernel.remove(base, 0).d_hat());
}
BENCHMARK(BM_IncrementalRemove)->Arg(5)->Arg(20)->Arg(50);

static void BM_LogMarginalFromFit(benchmark::State& state) {
  const DataMatrix data = gaussian_matrix(100, 300, 5);
  const GramKernel kernel(data);
  const FitSummary fit = kernel.fit(first_k(299, 10));
  const Hyperparams h;
  for (auto _ : state) benchmark::DoNotOptimize(log_marginal_support(fit, data, h, 17).log_score);
}
BENCHMARK(BM_LogMarginalFromFit);
