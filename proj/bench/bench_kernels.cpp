// Parallel vs serial Gram assembly and probe-cache refresh.

#include "symrl/analysis.hpp"
#include "symrl/regression.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace symrl;

KernelSpec invariant_spec() { return KernelSpec(KernelFamily::rbf, 0.5, d4_block_group(7)); }

void BM_GramParallel(benchmark::State& state) {
  const auto pts = uniform_points(static_cast<std::size_t>(state.range(0)), 14, 1);
  const auto spec = invariant_spec();
  for (auto _ : state) benchmark::DoNotOptimize(gram(spec, pts));
}

void BM_GramSerial(benchmark::State& state) {
  const auto pts = uniform_points(static_cast<std::size_t>(state.range(0)), 14, 1);
  const auto spec = invariant_spec();
  for (auto _ : state) benchmark::DoNotOptimize(gram_serial(spec, pts));
}

template <bool Parallel>
void BM_ProbeSync(benchmark::State& state) {
  const auto spec = invariant_spec();
  const auto data = uniform_points(static_cast<std::size_t>(state.range(0)), 14, 2);
  const auto probes = uniform_points(512, 14, 3);
  for (auto _ : state) {
    state.PauseTiming();
    Posterior post(spec, 0.1);
    ProbeCache cache;
    for (const auto& z : probes) cache.add(z);
    state.ResumeTiming();
    for (const auto& z : data) {
      post.append(z, 0.0);
      if constexpr (Parallel) {
        cache.sync(post);
      } else {
        cache.sync_serial(post);
      }
    }
  }
}

}  // namespace

BENCHMARK(BM_GramParallel)->Arg(100)->Arg(400);
BENCHMARK(BM_GramSerial)->Arg(100)->Arg(400);
BENCHMARK(BM_ProbeSync<true>)->Arg(100)->Arg(300);
BENCHMARK(BM_ProbeSync<false>)->Arg(100)->Arg(300);
BENCHMARK_MAIN();
