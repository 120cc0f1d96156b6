#pragma once

#include "reefscan/types.hpp"

namespace reefscan {

// Arithmetic mean of the points. Throws std::invalid_argument on an empty
// cloud.
Point3 centroid(const PointCloud& cloud);

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& t);

// Partitions a cloud into axis-aligned square tiles of side tile_size,
// anchored at the cloud's min corner. Tiles with fewer than min_points
// points are dropped. A point on a shared tile edge belongs to the tile
// with the smaller (ix, iy) index.
std::vector<PointCloud> tile_scene(const PointCloud& cloud, double tile_size,
                                   std::size_t min_points);

// Bounding rectangle of the cloud in the horizontal plane.
Rect cloud_bounds_xy(const PointCloud& cloud);

}  // namespace reefscan
