#include <benchmark/benchmark.h>

#include "frdim/corrdim.hpp"
#include "frdim/processes.hpp"
#include "frdim/reduce.hpp"

namespace {

using namespace frdim;

SqrtEmbedding noise_embedding(std::size_t n, std::size_t dim) {
  return SqrtEmbedding(gen_uniform_sphere_noise(dim, n, 42));
}

void BM_PairwiseHistogram(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto dim = static_cast<std::size_t>(state.range(1));
  const auto emb = noise_embedding(n, dim);
  const auto grid = auto_grid(emb);
  for (auto _ : state) {
    auto h = pairwise_histogram(emb, grid, 1);
    benchmark::DoNotOptimize(h.counts.data());
  }
  const auto pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  state.counters["pairs/s"] =
      benchmark::Counter(pairs, benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_PairwiseHistogram)
    ->Args({2000, 100})
    ->Args({2000, 1000})
    ->Args({4000, 1000})
    ->Unit(benchmark::kMillisecond);

void BM_GrowthNetUnreduced(benchmark::State& state) {
  GrowthNetConfig cfg;
  cfg.n_steps = static_cast<std::size_t>(state.range(0));
  const auto seq = gen_growth_net(cfg, 7);
  const SqrtEmbedding emb(seq);
  const auto grid = auto_grid(emb);
  for (auto _ : state) {
    auto h = pairwise_histogram(emb, grid, 1);
    benchmark::DoNotOptimize(h.counts.data());
  }
}
BENCHMARK(BM_GrowthNetUnreduced)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_ModuloReduction(benchmark::State& state) {
  const auto seq = gen_uniform_sphere_noise(10000, 500, 3);
  const ReductionSpec spec(1000, seq.dim());
  for (auto _ : state) {
    auto r = project_sequence(seq, spec);
    benchmark::DoNotOptimize(r.flat().data());
  }
}
BENCHMARK(BM_ModuloReduction)->Unit(benchmark::kMillisecond);

void BM_GrowthNetGeneration(benchmark::State& state) {
  GrowthNetConfig cfg;
  cfg.n_steps = 5000;
  cfg.kappa = 0.005;
  for (auto _ : state) {
    GrowthNet net(cfg, 11);
    auto seq = stream_rows(net, cfg.n_steps, std::nullopt, std::size_t{1000});
    benchmark::DoNotOptimize(seq.flat().data());
  }
}
BENCHMARK(BM_GrowthNetGeneration)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
