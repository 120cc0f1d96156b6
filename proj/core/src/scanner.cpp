#include "reefscan/scanner.hpp"

#include "reefscan/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace reefscan::sim {

namespace {

constexpr double kPi = std::numbers::pi;

enum class Travel { along_x, along_y };

void scan_pass(const geom::Bvh& scene, const Rect& bounds,
               const ScannerConfig& scanner, std::uint64_t pass_seed,
               Travel travel, PointCloud& out) {
  const double half_angle = scanner.swath_half_angle_deg * kPi / 180.0;
  const int beams = scanner.beam_count;

  const double track_min = travel == Travel::along_x ? bounds.min_x : bounds.min_y;
  const double track_max = travel == Travel::along_x ? bounds.max_x : bounds.max_y;
  const double cross_min = travel == Travel::along_x ? bounds.min_y : bounds.min_x;
  const double cross_max = travel == Travel::along_x ? bounds.max_y : bounds.max_x;

  const double eps = 1e-9;
  const auto line_count = static_cast<std::size_t>(
      std::floor((cross_max - cross_min) / scanner.line_spacing + eps) + 1);
  const auto ping_count = static_cast<std::size_t>(
      std::floor((track_max - track_min) / scanner.ping_spacing + eps) + 1);

  for (std::size_t line = 0; line < line_count; ++line) {
    const double cross = cross_min + scanner.line_spacing * static_cast<double>(line);
    const std::uint64_t line_seed = derive_seed(pass_seed, line);
    for (std::size_t ping = 0; ping < ping_count; ++ping) {
      const double track =
          track_min + scanner.ping_spacing * static_cast<double>(ping);
      Rng rng(derive_seed(line_seed, ping));

      geom::Ray ray;
      ray.origin = travel == Travel::along_x
                       ? Point3(track, cross, scanner.sensor_height)
                       : Point3(cross, track, scanner.sensor_height);

      for (int j = 0; j < beams; ++j) {
        const double theta =
            beams == 1 ? 0.0
                       : -half_angle + 2.0 * half_angle * j / (beams - 1);
        const double drop = rng.uniform();
        const double across = std::sin(theta);
        const double down = -std::cos(theta);
        ray.direction = travel == Travel::along_x
                            ? Point3(0.0, across, down)
                            : Point3(across, 0.0, down);
        const auto hit = scene.intersect(ray);
        if (!hit) continue;
        if (drop < scanner.dropout_prob) continue;
        Point3 p = hit->point;
        if (scanner.noise_sigma > 0.0) {
          const double range_err = rng.normal(0.0, scanner.noise_sigma);
          p += range_err * ray.direction;
        }
        out.push_back(p);
      }
    }
  }
}

}  // namespace

geom::Bvh build_scene_geometry(const TerrainField& terrain,
                               const std::vector<PlacedObject>& objects,
                               const MeshParams& geometry) {
  geom::Bvh bvh;
  bvh.add_mesh(terrain.to_mesh());
  for (const PlacedObject& obj : objects) {
    const geom::TriangleMesh mesh =
        geom::make_mesh(obj.annotation.cls, geometry);
    bvh.add_mesh(geom::transform_mesh(mesh, obj.pose));
  }
  bvh.build();
  return bvh;
}

PointCloud simulate_scan(const geom::Bvh& scene, const Rect& bounds,
                         const ScannerConfig& scanner, std::uint64_t seed) {
  if (scanner.beam_count < 1 || scanner.beam_count > 1024)
    throw std::invalid_argument(
        "simulate_scan: beam_count must be in [1, 1024]");
  if (!bounds.valid())
    throw std::invalid_argument("simulate_scan: empty survey bounds");

  ScanDirection direction = scanner.direction_mode;
  if (direction == ScanDirection::random) {
    Rng pick(derive_seed(seed, 0xd19ec710u));
    direction = static_cast<ScanDirection>(pick.uniform_index(3));
  }

  PointCloud cloud;
  if (direction == ScanDirection::x || direction == ScanDirection::both)
    scan_pass(scene, bounds, scanner, derive_seed(seed, 0), Travel::along_x,
              cloud);
  if (direction == ScanDirection::y || direction == ScanDirection::both)
    scan_pass(scene, bounds, scanner, derive_seed(seed, 1), Travel::along_y,
              cloud);
  return cloud;
}

PointCloud simulate_scan(const TerrainField& terrain,
                         const std::vector<PlacedObject>& objects,
                         const ScannerConfig& scanner,
                         const MeshParams& geometry, std::uint64_t seed) {
  const geom::Bvh scene = build_scene_geometry(terrain, objects, geometry);
  return simulate_scan(scene, terrain.bounds(), scanner, seed);
}

}  // namespace reefscan::sim
