#include "reefscan/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace reefscan::geom {

namespace {
constexpr std::uint32_t kLeafSize = 8;
}

void KdTree::build(const PointCloud& points) {
  points_ = points;
  nodes_.clear();
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build_node(0, static_cast<std::uint32_t>(points_.size()));
  }
}

std::uint32_t KdTree::build_node(std::uint32_t begin, std::uint32_t end) {
  const std::uint32_t index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  nodes_[index].begin = begin;
  nodes_[index].end = end;

  const std::uint32_t count = end - begin;
  if (count <= kLeafSize) return index;

  Point3 lo = Point3::Constant(std::numeric_limits<double>::infinity());
  Point3 hi = -lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if ((hi - lo)[axis] <= 0.0) return index;  // all points coincide

  const std::uint32_t mid = begin + count / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double va = points_[a][axis];
                     const double vb = points_[b][axis];
                     if (va != vb) return va < vb;
                     return a < b;
                   });

  nodes_[index].axis = static_cast<std::int8_t>(axis);
  nodes_[index].split = points_[order_[mid]][axis];
  const std::uint32_t left = build_node(begin, mid);
  const std::uint32_t right = build_node(mid, end);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

void KdTree::search(std::uint32_t node_idx, const Point3& query,
                    double& best_d2, std::int64_t& best_idx) const {
  const Node& node = nodes_[node_idx];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t pi = order_[i];
      const double d2 = (points_[pi] - query).squaredNorm();
      // Tie-break toward the lower point index for determinism.
      if (d2 < best_d2 ||
          (d2 == best_d2 && static_cast<std::int64_t>(pi) < best_idx)) {
        best_d2 = d2;
        best_idx = pi;
      }
    }
    return;
  }
  const double delta = query[node.axis] - node.split;
  const std::uint32_t near = delta < 0.0 ? node.left : node.right;
  const std::uint32_t far = delta < 0.0 ? node.right : node.left;
  search(near, query, best_d2, best_idx);
  if (delta * delta <= best_d2) search(far, query, best_d2, best_idx);
}

std::optional<KdTree::Neighbor> KdTree::nearest(const Point3& query,
                                                double max_dist) const {
  if (points_.empty() || max_dist <= 0.0) return std::nullopt;
  double best_d2 = max_dist * max_dist;
  std::int64_t best_idx = -1;
  search(0, query, best_d2, best_idx);
  if (best_idx < 0) return std::nullopt;
  return Neighbor{static_cast<std::uint32_t>(best_idx), std::sqrt(best_d2)};
}

}  // namespace reefscan::geom
