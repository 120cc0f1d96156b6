#pragma once

#include "reefscan/config.hpp"
#include "reefscan/types.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace reefscan::geom {

struct Aabb {
  Point3 min = Point3::Constant(std::numeric_limits<double>::infinity());
  Point3 max = Point3::Constant(-std::numeric_limits<double>::infinity());

  bool empty() const { return (min.array() > max.array()).any(); }
  Point3 size() const { return max - min; }
  Point3 center() const { return 0.5 * (min + max); }
  void expand(const Point3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void expand(const Aabb& b) {
    min = min.cwiseMin(b.min);
    max = max.cwiseMax(b.max);
  }
  Aabb inflated(double r) const {
    return {min - Point3::Constant(r), max + Point3::Constant(r)};
  }
  bool contains(const Point3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
};

struct TriangleMesh {
  std::vector<Point3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;

  std::size_t triangle_count() const { return triangles.size(); }
  void append(const TriangleMesh& other);
};

// Canonical object mesh: closed 2-manifold, footprint centered on the
// origin, resting plane at z = 0, axis-aligned height equal to the class
// nominal height. Throws std::invalid_argument when resolution < 8.
TriangleMesh make_mesh(ObjectClass cls, const MeshParams& params = {});

struct ClassDims {
  double height = 0.0;
  double footprint_diameter = 0.0;  // max horizontal AABB side at yaw 0
};

// Nominal dimensions of a class under the given geometry parameters.
ClassDims class_dims(ObjectClass cls, const MeshParams& params = {});

Aabb mesh_aabb(const TriangleMesh& mesh);
TriangleMesh transform_mesh(const TriangleMesh& mesh, const RigidTransform& t);

// Sum of signed tetrahedron volumes; positive for outward-consistent
// winding of closed meshes.
double mesh_signed_volume(const TriangleMesh& mesh);

// True when every undirected edge is shared by exactly two triangles with
// opposite orientations.
bool mesh_is_closed(const TriangleMesh& mesh);

// ASCII export for visual inspection (format by extension: .stl or .ply).
void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path);

}  // namespace reefscan::geom
