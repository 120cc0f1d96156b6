#include "reefscan/ransac.hpp"

#include "reefscan/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace reefscan::detect {

namespace {

// Orients the normal so the dominant axis component is positive (z first:
// for a seabed fit, objects end up on the positive side).
void canonicalize(PlaneModel& plane) {
  const Point3& n = plane.normal;
  double key = n.z();
  if (key == 0.0) key = n.y();
  if (key == 0.0) key = n.x();
  if (key < 0.0) {
    plane.normal = -plane.normal;
    plane.offset = -plane.offset;
  }
}

// Total-least-squares plane through a point set: centroid plus the
// smallest-eigenvector of the scatter matrix.
bool fit_plane_lsq(const PointCloud& cloud, const std::vector<std::uint32_t>& idx,
                   PlaneModel& out) {
  Point3 mean = Point3::Zero();
  for (const std::uint32_t i : idx) mean += cloud[i];
  mean /= static_cast<double>(idx.size());

  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const std::uint32_t i : idx) {
    const Point3 d = cloud[i] - mean;
    scatter += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
  if (eig.info() != Eigen::Success) return false;
  const Point3 normal = eig.eigenvectors().col(0);
  if (normal.norm() < 0.5) return false;
  out.normal = normal.normalized();
  out.offset = -out.normal.dot(mean);
  return true;
}

}  // namespace

PlaneModel ransac_plane(const PointCloud& cloud, int iterations,
                        double inlier_dist, std::uint64_t seed) {
  const std::size_t n = cloud.size();
  if (n < 3)
    throw std::invalid_argument("ransac_plane: need at least 3 points");

  Rng rng(seed);
  bool found = false;
  Point3 best_normal = Point3::UnitZ();
  double best_offset = 0.0;
  std::size_t best_count = 0;

  for (int it = 0; it < iterations; ++it) {
    const std::size_t ia = rng.uniform_index(n);
    const std::size_t ib = rng.uniform_index(n);
    const std::size_t ic = rng.uniform_index(n);
    if (ia == ib || ib == ic || ia == ic) continue;

    const Point3& a = cloud[ia];
    Point3 normal = (cloud[ib] - a).cross(cloud[ic] - a);
    const double len = normal.norm();
    if (len < 1e-12) continue;  // collinear sample
    normal /= len;
    const double offset = -normal.dot(a);

    std::size_t count = 0;
    for (const Point3& p : cloud) {
      if (std::abs(normal.dot(p) + offset) <= inlier_dist) ++count;
    }
    if (count > best_count) {
      best_count = count;
      best_normal = normal;
      best_offset = offset;
      found = true;
    }
  }
  if (!found)
    throw std::invalid_argument(
        "ransac_plane: no non-collinear sample found (degenerate cloud)");

  PlaneModel plane;
  plane.normal = best_normal;
  plane.offset = best_offset;

  std::vector<std::uint32_t> inliers;
  inliers.reserve(best_count);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (std::abs(plane.signed_distance(cloud[i])) <= inlier_dist)
      inliers.push_back(i);
  }
  PlaneModel refit;
  if (inliers.size() >= 3 && fit_plane_lsq(cloud, inliers, refit)) {
    plane = refit;
    std::size_t refit_count = 0;
    for (const Point3& p : cloud)
      if (std::abs(plane.signed_distance(p)) <= inlier_dist) ++refit_count;
    plane.inlier_count = refit_count;
  } else {
    plane.inlier_count = inliers.size();
  }
  canonicalize(plane);
  return plane;
}

PointCloud remove_seabed(const PointCloud& cloud, const PlaneModel& plane,
                         double clearance) {
  PointCloud out;
  for (const Point3& p : cloud) {
    if (plane.signed_distance(p) > clearance) out.push_back(p);
  }
  return out;
}

}  // namespace reefscan::detect
