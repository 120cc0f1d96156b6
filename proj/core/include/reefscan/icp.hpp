#pragma once

#include "reefscan/config.hpp"
#include "reefscan/kdtree.hpp"
#include "reefscan/types.hpp"

namespace reefscan::detect {

struct IcpResult {
  bool ok = false;  // false: correspondences vanished at some iteration
  RigidTransform transform;  // source frame -> target frame
  double rmse = 0.0;
  double inlier_fraction = 0.0;
  int iterations = 0;
};

// Point-to-point ICP: nearest-neighbor correspondences within a shrinking
// distance gate, closed-form rigid update (SVD orthogonal decomposition),
// until the transform moves less than convergence_tol or max_iterations.
// rmse is over the final correspondences; inlier_fraction is their share
// of the source. The returned rotation is re-orthonormalized, so it is
// rigid to well below 1e-9.
IcpResult icp_register(const PointCloud& source, const PointCloud& target,
                       const IcpParams& params,
                       const RigidTransform& init = RigidTransform::identity());

// Same, reusing a prebuilt tree over `target` (one tree per segment, many
// templates registered against it).
IcpResult icp_register(const PointCloud& source, const geom::KdTree& target,
                       const IcpParams& params,
                       const RigidTransform& init = RigidTransform::identity());

}  // namespace reefscan::detect
