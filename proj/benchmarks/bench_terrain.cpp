#include <benchmark/benchmark.h>

#include "reefscan/rng.hpp"
#include "reefscan/terrain.hpp"

using namespace reefscan;

namespace {

void BM_PerlinSample(benchmark::State& state) {
  Rng rng(0);
  double x = 0.1, y = 0.7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim::perlin(x, y, 42));
    x += 0.013;
    y += 0.007;
  }
}
BENCHMARK(BM_PerlinSample);

void BM_TerrainHeight(benchmark::State& state) {
  TerrainParams params;
  const sim::TerrainField terrain({0, 0, 40, 40}, params, 3);
  double x = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(terrain.height(x, 20.0));
    x = x < 39.0 ? x + 0.01 : 1.0;
  }
}
BENCHMARK(BM_TerrainHeight);

void BM_TerrainFieldBuild(benchmark::State& state) {
  TerrainParams params;
  params.grid_step = 0.25;
  for (auto _ : state) {
    const sim::TerrainField terrain({0, 0, 40, 40}, params, 3);
    benchmark::DoNotOptimize(terrain.grid().size());
  }
}
BENCHMARK(BM_TerrainFieldBuild)->Unit(benchmark::kMillisecond);

}  // namespace
