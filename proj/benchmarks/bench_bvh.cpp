#include <benchmark/benchmark.h>

#include "reefscan/bvh.hpp"
#include "reefscan/mesh.hpp"
#include "reefscan/rng.hpp"
#include "reefscan/terrain.hpp"

using namespace reefscan;

namespace {

geom::Bvh survey_scene() {
  TerrainParams params;
  const sim::TerrainField terrain({0, 0, 40, 40}, params, 11);
  geom::Bvh bvh;
  bvh.add_mesh(terrain.to_mesh());
  geom::TriangleMesh tetrapod = geom::make_mesh(ObjectClass::tetrapod_b);
  for (int i = 0; i < 12; ++i) {
    RigidTransform pose = RigidTransform::yaw_about_z(0.5 * i);
    pose.translation = Point3(3.0 + 3.0 * (i % 4), 4.0 + 9.0 * (i / 4), 0.0);
    bvh.add_mesh(geom::transform_mesh(tetrapod, pose));
  }
  bvh.build();
  return bvh;
}

geom::Ray random_beam(Rng& rng) {
  geom::Ray ray;
  ray.origin = Point3(rng.uniform(0, 40), rng.uniform(0, 40), 15.0);
  const double theta = rng.uniform(-1.0, 1.0);
  ray.direction = Point3(0.0, std::sin(theta), -std::cos(theta));
  return ray;
}

void BM_BvhIntersect(benchmark::State& state) {
  const geom::Bvh scene = survey_scene();
  Rng rng(1);
  for (auto _ : state) {
    const auto hit = scene.intersect(random_beam(rng));
    benchmark::DoNotOptimize(hit);
  }
}
BENCHMARK(BM_BvhIntersect);

void BM_BruteForceIntersect(benchmark::State& state) {
  const geom::Bvh scene = survey_scene();
  Rng rng(1);
  for (auto _ : state) {
    const auto hit = scene.intersect_brute_force(random_beam(rng));
    benchmark::DoNotOptimize(hit);
  }
}
BENCHMARK(BM_BruteForceIntersect);

void BM_BvhBuild(benchmark::State& state) {
  TerrainParams params;
  const sim::TerrainField terrain({0, 0, 40, 40}, params, 11);
  const geom::TriangleMesh mesh = terrain.to_mesh();
  for (auto _ : state) {
    geom::Bvh bvh;
    bvh.add_mesh(mesh);
    bvh.build();
    benchmark::DoNotOptimize(bvh);
  }
}
BENCHMARK(BM_BvhBuild)->Unit(benchmark::kMillisecond);

}  // namespace
