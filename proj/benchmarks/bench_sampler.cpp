#include <benchmark/benchmark.h>

#include "esc_dag/gram_kernel.hpp"
#include "esc_dag/sampler.hpp"
#include "esc_dag/simulate.hpp"

using namespace esc_dag;

namespace {

DataMatrix simulated(int n, int p, std::uint64_t seed) {
  TruthSpec spec{p, 0.03};
  spec.seed = seed;
  const CholeskyModel truth = generate_truth(spec);
  Rng rng(derive_seed(seed, 1));
  return sample_gaussian(n, truth, rng);
}

}  // namespace

static void BM_MhStep(benchmark::State& state) {
  const DataMatrix data = simulated(100, 300, 1);
  const GramKernel kernel(data);
  const Hyperparams h;
  const int column = 299;
  const int cap = support_cap(data, h, column);
  ChainConfig cfg;
  ChainState chain = initial_state(kernel, column, h, cfg, cap);
  Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(mh_step(chain, kernel, h, cap, rng).accepted);
}
BENCHMARK(BM_MhStep);

static void BM_RunChain(benchmark::State& state) {
  const DataMatrix data = simulated(100, 300, 3);
  const GramKernel kernel(data);
  const Hyperparams h;
  ChainConfig cfg;
  cfg.iterations = state.range(0);
  cfg.burn_in = cfg.iterations / 6;
  for (auto _ : state) benchmark::DoNotOptimize(run_chain(kernel, 299, h, cfg).accept_count);
  state.SetItemsProcessed(state.iterations() * cfg.iterations);
}
BENCHMARK(BM_RunChain)->Arg(6000)->Arg(24000)->Unit(benchmark::kMillisecond);

static void BM_FitDag(benchmark::State& state) {
  const DataMatrix data = simulated(100, static_cast<int>(state.range(0)), 4);
  const Hyperparams h;
  ChainConfig cfg;
  cfg.iterations = 6000;
  cfg.burn_in = 1000;
  for (auto _ : state) benchmark::DoNotOptimize(fit_dag(data, h, cfg, 1).inclusion.sum());
}
BENCHMARK(BM_FitDag)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
