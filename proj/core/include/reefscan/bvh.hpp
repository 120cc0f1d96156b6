#pragma once

#include "reefscan/mesh.hpp"
#include "reefscan/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace reefscan::geom {

struct Ray {
  Point3 origin = Point3::Zero();
  Point3 direction = Point3::UnitZ();  // unit length

  static Ray through(const Point3& origin, const Point3& toward);
};

struct RayHit {
  Point3 point = Point3::Zero();
  double range = 0.0;            // distance along the ray
  std::uint32_t triangle = 0;    // id in insertion order across all meshes
};

// Watertight-enough Moeller-Trumbore intersection; returns the ray
// parameter t > 0 or nothing. Shared by the BVH and any brute-force
// checker so both report bit-identical ranges.
std::optional<double> ray_triangle(const Ray& ray, const Point3& a,
                                   const Point3& b, const Point3& c);

// Bounding-volume hierarchy over the triangles of one or more meshes.
// Nearest-hit queries match a brute-force scan over all triangles exactly
// (ties broken toward the lower triangle id).
class Bvh {
 public:
  Bvh() = default;

  void add_mesh(const TriangleMesh& mesh);
  void build();

  std::optional<RayHit> intersect(const Ray& ray) const;
  // Reference path: linear scan over every triangle. Used by tests and
  // kept here so it cannot drift from the stored geometry.
  std::optional<RayHit> intersect_brute_force(const Ray& ray) const;

  std::size_t triangle_count() const { return tris_.size(); }
  bool built() const { return built_; }

 private:
  struct Tri {
    Point3 a, b, c;
    std::uint32_t id;
  };
  struct Node {
    Point3 aabb_min, aabb_max;
    std::uint32_t left = 0;   // child index, or first triangle for leaves
    std::uint32_t count = 0;  // 0 for inner nodes, triangle count for leaves
  };

  std::uint32_t build_node(std::uint32_t begin, std::uint32_t end);

  std::vector<Tri> tris_;
  std::vector<std::uint32_t> order_;  // triangle permutation, leaves index it
  std::vector<Node> nodes_;
  bool built_ = false;
};

}  // namespace reefscan::geom
