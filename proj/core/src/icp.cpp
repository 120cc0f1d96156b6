#include "reefscan/icp.hpp"

#include "reefscan/cloud.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace reefscan::detect {

namespace {

Eigen::Matrix3d orthonormalized(const Eigen::Matrix3d& m) {
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return r;
}

// Closed-form least-squares rigid fit of (p_i -> q_i) pairs.
RigidTransform kabsch(const std::vector<Point3>& p,
                      const std::vector<Point3>& q,
                      const Eigen::Matrix3d& fallback_rotation) {
  const std::size_t n = p.size();
  Point3 cp = Point3::Zero(), cq = Point3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    cp += p[i];
    cq += q[i];
  }
  cp /= static_cast<double>(n);
  cq /= static_cast<double>(n);

  RigidTransform out;
  if (n < 3) {
    // Not enough support for a rotation update; translate only.
    out.rotation = fallback_rotation;
    out.translation = cq - out.rotation * cp;
    return out;
  }

  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i)
    h += (p[i] - cp) * (q[i] - cq).transpose();

  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0)
    d(2, 2) = -1.0;
  out.rotation = svd.matrixV() * d * svd.matrixU().transpose();
  out.translation = cq - out.rotation * cp;
  return out;
}

}  // namespace

IcpResult icp_register(const PointCloud& source, const geom::KdTree& target,
                       const IcpParams& params, const RigidTransform& init) {
  if (source.size() < 3 || target.size() < 3)
    throw std::invalid_argument("icp_register: clouds need >= 3 points");

  const Point3 source_center = centroid(source);
  double radius = 0.0;
  for (const Point3& p : source)
    radius = std::max(radius, (p - source_center).norm());

  RigidTransform t = init;
  IcpResult result;

  std::vector<Point3> src_pts, tgt_pts;
  src_pts.reserve(source.size());
  tgt_pts.reserve(source.size());

  const int denom = std::max(1, params.max_iterations - 1);
  int iter = 0;
  for (; iter < params.max_iterations; ++iter) {
    const double corr_dist =
        params.corr_dist_initial +
        (params.corr_dist_final - params.corr_dist_initial) * iter / denom;

    src_pts.clear();
    tgt_pts.clear();
    double sq_sum = 0.0;
    for (const Point3& p : source) {
      const Point3 moved = t.apply(p);
      if (const auto nn = target.nearest(moved, corr_dist)) {
        src_pts.push_back(p);
        tgt_pts.push_back(target.point(nn->index));
        sq_sum += nn->distance * nn->distance;
      }
    }
    if (src_pts.empty()) {
      result.ok = false;
      result.iterations = iter;
      return result;
    }

    if (params.abort_rmse > 0.0 && iter >= params.max_iterations / 2) {
      const double rmse_now =
          std::sqrt(sq_sum / static_cast<double>(src_pts.size()));
      if (rmse_now > params.abort_rmse) break;
    }

    const RigidTransform t_new = kabsch(src_pts, tgt_pts, t.rotation);
    const double delta =
        (t_new.translation - t.translation).norm() +
        radius * (t_new.rotation - t.rotation).norm() / std::sqrt(3.0);
    t = t_new;
    if (delta < params.convergence_tol) {
      ++iter;
      break;
    }
  }

  t.rotation = orthonormalized(t.rotation);

  // Final correspondences under the tightest gate define the reported
  // rmse and inlier share.
  double sq_sum = 0.0;
  std::size_t pairs = 0;
  for (const Point3& p : source) {
    const Point3 moved = t.apply(p);
    if (const auto nn = target.nearest(moved, params.corr_dist_final)) {
      sq_sum += nn->distance * nn->distance;
      ++pairs;
    }
  }
  if (pairs == 0) {
    result.ok = false;
    result.iterations = iter;
    return result;
  }

  result.ok = true;
  result.transform = t;
  result.rmse = std::sqrt(sq_sum / static_cast<double>(pairs));
  result.inlier_fraction =
      static_cast<double>(pairs) / static_cast<double>(source.size());
  result.iterations = iter;
  return result;
}

IcpResult icp_register(const PointCloud& source, const PointCloud& target,
                       const IcpParams& params, const RigidTransform& init) {
  if (target.size() < 3)
    throw std::invalid_argument("icp_register: clouds need >= 3 points");
  const geom::KdTree tree(target);
  return icp_register(source, tree, params, init);
}

}  // namespace reefscan::detect
