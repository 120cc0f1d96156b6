#include "reefscan/cloud.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace reefscan {

Point3 centroid(const PointCloud& cloud) {
  if (cloud.empty())
    throw std::invalid_argument("centroid: empty point cloud");
  Point3 sum = Point3::Zero();
  for (const Point3& p : cloud) sum += p;
  return sum / static_cast<double>(cloud.size());
}

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& t) {
  PointCloud out;
  out.reserve(cloud.size());
  for (const Point3& p : cloud) out.push_back(t.apply(p));
  return out;
}

Rect cloud_bounds_xy(const PointCloud& cloud) {
  Rect r{std::numeric_limits<double>::infinity(),
         std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity(),
         -std::numeric_limits<double>::infinity()};
  for (const Point3& p : cloud) {
    r.min_x = std::min(r.min_x, p.x());
    r.min_y = std::min(r.min_y, p.y());
    r.max_x = std::max(r.max_x, p.x());
    r.max_y = std::max(r.max_y, p.y());
  }
  return r;
}

namespace {

// Grid index with the lower-tile rule: a coordinate exactly on a shared
// edge belongs to the smaller index.
long tile_index(double v, double origin, double tile_size) {
  const double u = (v - origin) / tile_size;
  long i = static_cast<long>(std::floor(u));
  if (static_cast<double>(i) == u && i > 0) --i;
  return i;
}

}  // namespace

std::vector<PointCloud> tile_scene(const PointCloud& cloud, double tile_size,
                                   std::size_t min_points) {
  if (tile_size <= 0.0)
    throw std::invalid_argument("tile_scene: tile_size must be > 0");
  if (cloud.empty()) return {};

  const Rect bounds = cloud_bounds_xy(cloud);
  std::map<std::pair<long, long>, PointCloud> tiles;
  for (const Point3& p : cloud) {
    const long ix = tile_index(p.x(), bounds.min_x, tile_size);
    const long iy = tile_index(p.y(), bounds.min_y, tile_size);
    tiles[{ix, iy}].push_back(p);
  }

  std::vector<PointCloud> out;
  for (auto& [key, tile] : tiles) {
    if (tile.size() >= min_points) out.push_back(std::move(tile));
  }
  return out;
}

}  // namespace reefscan
