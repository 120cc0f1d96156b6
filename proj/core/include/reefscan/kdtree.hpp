#pragma once

#include "reefscan/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace reefscan::geom {

// Static 3-d tree for nearest-neighbor queries over a point cloud.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(const PointCloud& points) { build(points); }

  void build(const PointCloud& points);

  struct Neighbor {
    std::uint32_t index;
    double distance;
  };

  // Nearest point within max_dist (Euclidean), or nothing.
  std::optional<Neighbor> nearest(const Point3& query, double max_dist) const;

  std::size_t size() const { return points_.size(); }
  const Point3& point(std::uint32_t index) const { return points_[index]; }

 private:
  struct Node {
    std::uint32_t begin, end;  // range in order_
    std::uint32_t left = 0, right = 0;
    double split = 0.0;
    std::int8_t axis = -1;  // -1 for leaves
  };

  std::uint32_t build_node(std::uint32_t begin, std::uint32_t end);
  void search(std::uint32_t node, const Point3& query, double& best_d2,
              std::int64_t& best_idx) const;

  std::vector<Point3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace reefscan::geom
