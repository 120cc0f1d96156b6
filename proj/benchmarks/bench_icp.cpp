#include <benchmark/benchmark.h>

#include "reefscan/cloud.hpp"
#include "reefscan/config.hpp"
#include "reefscan/icp.hpp"
#include "reefscan/rng.hpp"
#include "reefscan/template_library.hpp"

using namespace reefscan;

namespace {

struct Fixture {
  PointCloud source;
  PointCloud target;
};

Fixture registration_fixture() {
  Config config;
  const templates::TemplateLibrary library = templates::build_library(config);
  const templates::Template* tmpl =
      library.of_class(ObjectClass::tetrapod_b).front();

  RigidTransform offset = RigidTransform::yaw_about_z(0.2);
  offset.translation = Point3(0.25, -0.15, 0.02);
  Fixture f;
  f.source = tmpl->cloud;
  f.target = apply_transform(tmpl->cloud, offset);
  Rng rng(5);
  for (Point3& p : f.target)
    p += Point3(rng.normal(0, 0.01), rng.normal(0, 0.01), rng.normal(0, 0.01));
  return f;
}

void BM_IcpRegister(benchmark::State& state) {
  const Fixture f = registration_fixture();
  IcpParams params;
  for (auto _ : state) {
    const auto result = detect::icp_register(f.source, f.target, params);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_IcpRegister)->Unit(benchmark::kMillisecond);

void BM_IcpAgainstPrebuiltTree(benchmark::State& state) {
  const Fixture f = registration_fixture();
  const geom::KdTree tree(f.target);
  IcpParams params;
  for (auto _ : state) {
    const auto result = detect::icp_register(f.source, tree, params);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_IcpAgainstPrebuiltTree)->Unit(benchmark::kMillisecond);

}  // namespace
