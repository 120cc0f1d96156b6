#pragma once

#include "reefscan/config.hpp"
#include "reefscan/types.hpp"

#include <cstdint>
#include <vector>

namespace reefscan::detect {

// Plane {p : n.p + d = 0} with |n| = 1. The normal is canonicalized so
// points above the seabed get positive signed distance.
struct PlaneModel {
  Point3 normal = Point3::UnitZ();
  double offset = 0.0;
  std::size_t inlier_count = 0;

  double signed_distance(const Point3& p) const {
    return normal.dot(p) + offset;
  }
};

// Consensus plane fit: samples 3-point candidates for `iterations` rounds,
// keeps the one with the most points within inlier_dist, then refits by
// total least squares over its inliers. Deterministic given the seed.
// Throws std::invalid_argument with fewer than 3 points or an all-collinear
// cloud.
PlaneModel ransac_plane(const PointCloud& cloud, int iterations,
                        double inlier_dist, std::uint64_t seed);

// Keeps points with signed plane distance > clearance.
PointCloud remove_seabed(const PointCloud& cloud, const PlaneModel& plane,
                         double clearance);

}  // namespace reefscan::detect
