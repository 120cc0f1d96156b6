#include "reefscan/scene_gen.hpp"

#include "reefscan/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace reefscan::sim {

namespace {

constexpr double kPi = std::numbers::pi;

// Near-uniform class mix: total/4 each, remainder spread over distinct
// random classes, then shuffled.
std::vector<ObjectClass> draw_class_list(const SceneSpec& spec, Rng& rng) {
  std::vector<ObjectClass> list;
  if (spec.explicit_counts()) {
    for (int c = 0; c < kClassCount; ++c)
      list.insert(list.end(), spec.class_counts[c],
                  static_cast<ObjectClass>(c));
  } else {
    const int total = spec.objects_per_scene;
    const int base = total / kClassCount;
    const int remainder = total % kClassCount;
    for (int c = 0; c < kClassCount; ++c)
      list.insert(list.end(), base, static_cast<ObjectClass>(c));
    std::array<int, kClassCount> extra{0, 1, 2, 3};
    for (int i = kClassCount - 1; i > 0; --i)
      std::swap(extra[i], extra[rng.uniform_index(i + 1)]);
    for (int i = 0; i < remainder; ++i)
      list.push_back(static_cast<ObjectClass>(extra[i]));
  }
  for (std::size_t i = list.size(); i > 1; --i)
    std::swap(list[i - 1], list[rng.uniform_index(i)]);
  return list;
}

}  // namespace

std::vector<PlacedObject> place_objects(const TerrainField& terrain,
                                        const SceneSpec& spec,
                                        const MeshParams& geometry,
                                        std::uint64_t seed) {
  const Rect area = terrain.bounds().shrunk(spec.margin);
  if (!area.valid())
    throw std::invalid_argument("place_objects: margin leaves no area");

  std::array<geom::TriangleMesh, kClassCount> meshes;
  for (int c = 0; c < kClassCount; ++c)
    meshes[c] = geom::make_mesh(static_cast<ObjectClass>(c), geometry);

  Rng rng(seed);
  const std::vector<ObjectClass> classes = draw_class_list(spec, rng);

  std::vector<PlacedObject> placed;
  placed.reserve(classes.size());

  for (const ObjectClass cls : classes) {
    bool ok = false;
    for (int attempt = 0; attempt < spec.max_attempts_per_object; ++attempt) {
      const double x = rng.uniform(area.min_x, area.max_x);
      const double y = rng.uniform(area.min_y, area.max_y);
      const double yaw = rng.uniform(0.0, 2.0 * kPi);
      const double tilt = rng.uniform(0.0, spec.max_tilt_deg * kPi / 180.0);
      const double tilt_azimuth = rng.uniform(0.0, 2.0 * kPi);

      bool separated = true;
      for (const PlacedObject& other : placed) {
        const double dx = other.annotation.center.x() - x;
        const double dy = other.annotation.center.y() - y;
        if (dx * dx + dy * dy <
            spec.min_separation * spec.min_separation) {
          separated = false;
          break;
        }
      }
      if (!separated) continue;

      const Eigen::Vector3d tilt_axis(std::cos(tilt_azimuth),
                                      std::sin(tilt_azimuth), 0.0);
      RigidTransform pose;
      pose.rotation =
          (Eigen::AngleAxisd(tilt, tilt_axis) *
           Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()))
              .toRotationMatrix();

      // Drop along -z until the lowest vertex touches the terrain, then
      // sink by up to the allowance.
      double contact_z = -std::numeric_limits<double>::infinity();
      for (const Point3& v : meshes[static_cast<int>(cls)].vertices) {
        const Point3 r = pose.rotation * v;
        const double ground = terrain.height(x + r.x(), y + r.y());
        contact_z = std::max(contact_z, ground - r.z());
      }
      const double sink = rng.uniform(0.0, spec.sink_allowance);
      pose.translation = Point3(x, y, contact_z - sink);

      PlacedObject obj;
      obj.annotation.cls = cls;
      obj.annotation.center = pose.translation;
      obj.annotation.yaw = normalize_yaw(yaw);
      obj.pose = pose;
      placed.push_back(obj);
      ok = true;
      break;
    }
    if (!ok) {
      std::ostringstream msg;
      msg << "place_objects: placed " << placed.size() << " of "
          << classes.size() << " objects; min_separation "
          << spec.min_separation << " m is infeasible in "
          << area.width() << " x " << area.height() << " m";
      throw std::runtime_error(msg.str());
    }
  }
  return placed;
}

}  // namespace reefscan::sim
