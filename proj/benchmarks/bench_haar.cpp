#include "shadowtomo/haar.hpp"

#include <benchmark/benchmark.h>

using namespace shadowtomo;

static void BM_SampleHaar(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  std::uint32_t stream = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_haar(d, RngSeed{99, stream++}));
  }
}
BENCHMARK(BM_SampleHaar)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

static void BM_FourthMomentMc(benchmark::State& state) {
  const MomentIndex idx{1, 1, 1, 1, 1, 1, 1, 1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(fourth_moment_mc(idx, 4, 1000, RngSeed{7, 0}));
  }
}
BENCHMARK(BM_FourthMomentMc)->Unit(benchmark::kMillisecond);

static void BM_StreamRngNormal(benchmark::State& state) {
  StreamRng rng(RngSeed{1, 0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(rng.normal());
  }
}
BENCHMARK(BM_StreamRngNormal);
