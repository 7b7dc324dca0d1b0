#include "shadowtomo/noise.hpp"
#include "shadowtomo/shadow.hpp"

#include <benchmark/benchmark.h>

using namespace shadowtomo;

static void BM_IntensityEstimator(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const DensityMatrix rho = DensityMatrix::basis_projector(d, 0);
  const UnitaryMatrix u = sample_haar(d, RngSeed{12, 0});
  const Snapshot s(0, u, born_probabilities(rho, u));
  for (auto _ : state) {
    benchmark::DoNotOptimize(snapshot_intensity_estimator(s));
  }
}
BENCHMARK(BM_IntensityEstimator)->Arg(4)->Arg(8);

static void BM_NoisyProbabilities(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const DensityMatrix rho = DensityMatrix::basis_projector(d, 0);
  const UnitaryMatrix u = sample_haar(d, RngSeed{13, 0});
  const NoiseModel noise(0.1, sample_coherent_distortion(d, 0.012, RngSeed{14, 0}).u_c());
  for (auto _ : state) {
    benchmark::DoNotOptimize(noisy_probabilities(rho, u, noise));
  }
}
BENCHMARK(BM_NoisyProbabilities)->Arg(4)->Arg(8);

static void BM_ProtocolReplication(benchmark::State& state) {
  const long m = state.range(0);
  const ProtocolSpec spec = ProtocolSpec::make(ProtocolKind::I, RngSeed{15, 0});
  const std::vector<long> grid = {m};
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_protocol_replication(spec, grid, std::nullopt, 0));
  }
  state.SetItemsProcessed(state.iterations() * m);
}
BENCHMARK(BM_ProtocolReplication)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);
