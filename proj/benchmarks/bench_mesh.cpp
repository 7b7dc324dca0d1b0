#include "shadowtomo/mesh.hpp"

#include <benchmark/benchmark.h>

using namespace shadowtomo;

static void BM_DecomposeUnitary(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const UnitaryMatrix u = sample_haar(d, RngSeed{21, 0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(decompose_unitary(u));
  }
}
BENCHMARK(BM_DecomposeUnitary)->Arg(4)->Arg(8)->Arg(16);

static void BM_ComposeMesh(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const MeshConfig cfg = decompose_unitary(sample_haar(d, RngSeed{22, 0}));
  for (auto _ : state) {
    benchmark::DoNotOptimize(compose_mesh(cfg));
  }
}
BENCHMARK(BM_ComposeMesh)->Arg(4)->Arg(8)->Arg(16);

static void BM_PerturbMesh(benchmark::State& state) {
  const MeshConfig cfg = decompose_unitary(sample_haar(8, RngSeed{23, 0}));
  std::uint32_t stream = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(perturb_mesh(cfg, 0.01, RngSeed{24, stream++}));
  }
}
BENCHMARK(BM_PerturbMesh);
