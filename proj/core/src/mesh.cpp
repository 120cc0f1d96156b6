#include "reefscan/mesh.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace reefscan::geom {

namespace {

constexpr double kPi = std::numbers::pi;

struct ProfilePoint {
  double r;
  double z;
};

std::uint32_t add_vertex(TriangleMesh& mesh, const Point3& p) {
  mesh.vertices.push_back(p);
  return static_cast<std::uint32_t>(mesh.vertices.size() - 1);
}

void add_triangle(TriangleMesh& mesh, std::uint32_t a, std::uint32_t b,
                  std::uint32_t c) {
  mesh.triangles.push_back({a, b, c});
}

void flip_if_inward(TriangleMesh& mesh) {
  if (mesh_signed_volume(mesh) < 0.0) {
    for (auto& t : mesh.triangles) std::swap(t[1], t[2]);
  }
}

// Surface of revolution about the z axis. An open profile must start and
// end on the axis (r = 0) and is capped by pole fans there; a loop profile
// (all r > 0) wraps around, producing a torus topology.
TriangleMesh revolve(const std::vector<ProfilePoint>& profile, int segments,
                     bool loop) {
  TriangleMesh mesh;
  const int m = static_cast<int>(profile.size());
  const int n = segments;

  auto ring_point = [&](const ProfilePoint& pp, int j) {
    const double a = 2.0 * kPi * j / n;
    return Point3(pp.r * std::cos(a), pp.r * std::sin(a), pp.z);
  };

  if (loop) {
    std::vector<std::uint32_t> base(m);
    for (int k = 0; k < m; ++k) {
      base[k] = static_cast<std::uint32_t>(mesh.vertices.size());
      for (int j = 0; j < n; ++j)
        add_vertex(mesh, ring_point(profile[k], j));
    }
    for (int k = 0; k < m; ++k) {
      const int k2 = (k + 1) % m;
      for (int j = 0; j < n; ++j) {
        const int j2 = (j + 1) % n;
        const std::uint32_t a = base[k] + j, b = base[k] + j2;
        const std::uint32_t c = base[k2] + j2, d = base[k2] + j;
        add_triangle(mesh, a, b, c);
        add_triangle(mesh, a, c, d);
      }
    }
  } else {
    if (m < 3 || profile.front().r != 0.0 || profile.back().r != 0.0)
      throw std::logic_error("revolve: open profile must start/end on axis");
    const std::uint32_t pole0 =
        add_vertex(mesh, Point3(0, 0, profile.front().z));
    std::vector<std::uint32_t> base(m, 0);
    for (int k = 1; k + 1 < m; ++k) {
      base[k] = static_cast<std::uint32_t>(mesh.vertices.size());
      for (int j = 0; j < n; ++j)
        add_vertex(mesh, ring_point(profile[k], j));
    }
    const std::uint32_t pole1 =
        add_vertex(mesh, Point3(0, 0, profile.back().z));

    for (int j = 0; j < n; ++j) {
      const int j2 = (j + 1) % n;
      add_triangle(mesh, pole0, base[1] + j2, base[1] + j);
    }
    for (int k = 1; k + 2 < m; ++k) {
      for (int j = 0; j < n; ++j) {
        const int j2 = (j + 1) % n;
        const std::uint32_t a = base[k] + j, b = base[k] + j2;
        const std::uint32_t c = base[k + 1] + j2, d = base[k + 1] + j;
        add_triangle(mesh, a, b, c);
        add_triangle(mesh, a, c, d);
      }
    }
    for (int j = 0; j < n; ++j) {
      const int j2 = (j + 1) % n;
      add_triangle(mesh, pole1, base[m - 2] + j, base[m - 2] + j2);
    }
  }
  flip_if_inward(mesh);
  return mesh;
}

TriangleMesh make_ring(const MeshParams& p) {
  const double tube_r = p.ring_height / 2.0;
  const double major_r = (p.ring_diameter - p.ring_height) / 2.0;
  std::vector<ProfilePoint> profile;
  const int m = std::max(8, p.resolution / 2);
  for (int k = 0; k < m; ++k) {
    const double a = 2.0 * kPi * k / m;
    profile.push_back(
        {major_r + tube_r * std::cos(a), tube_r + tube_r * std::sin(a)});
  }
  return revolve(profile, p.resolution, /*loop=*/true);
}

// Crater-shaped shell: outer slope up to the rim, rim annulus, inner slope
// descending to an interior floor.
TriangleMesh make_cone(const MeshParams& p) {
  const double rb = p.cone_base_diameter / 2.0;
  const double rt = p.cone_top_diameter / 2.0;
  const double h = p.cone_height;
  const double w = p.cone_wall;
  const std::vector<ProfilePoint> profile = {
      {0.0, 0.0}, {rb, 0.0}, {rt, h}, {rt - w, h}, {rb - w, w}, {0.0, w},
  };
  return revolve(profile, p.resolution, /*loop=*/false);
}

TriangleMesh make_sphere(const Point3& center, double radius, int segments) {
  std::vector<ProfilePoint> profile;
  const int rings = std::max(4, segments / 2);
  for (int k = 0; k <= rings; ++k) {
    const double phi = kPi * k / rings;
    const double r = (k == 0 || k == rings) ? 0.0 : radius * std::sin(phi);
    profile.push_back({r, -radius * std::cos(phi)});
  }
  TriangleMesh mesh = revolve(profile, segments, /*loop=*/false);
  for (auto& v : mesh.vertices) v += center;
  return mesh;
}

TriangleMesh make_frustum(double r0, double r1, double length, int segments) {
  const std::vector<ProfilePoint> profile = {
      {0.0, 0.0}, {r0, 0.0}, {r1, length}, {0.0, length}};
  return revolve(profile, segments, /*loop=*/false);
}

// Four tapered legs on tetrahedral axes fused through a central hub. Built
// from closed components whose union reads as one solid; edge-manifoldness
// holds per component.
TriangleMesh make_tetrapod(const MeshParams& p) {
  const double leg_len = 1.0;
  const double leg_r0 = 0.30;
  const double leg_r1 = 0.19;
  const double hub_r = 0.34;
  const int n = p.resolution;

  TriangleMesh mesh = make_sphere(Point3::Zero(), hub_r, n);

  const double cos_t = -1.0 / 3.0;
  const double sin_t = std::sqrt(8.0) / 3.0;
  const std::array<Point3, 4> axes = {
      Point3(0, 0, 1),
      Point3(sin_t * std::cos(kPi / 2), sin_t * std::sin(kPi / 2), cos_t),
      Point3(sin_t * std::cos(kPi * 7 / 6), sin_t * std::sin(kPi * 7 / 6),
             cos_t),
      Point3(sin_t * std::cos(kPi * 11 / 6), sin_t * std::sin(kPi * 11 / 6),
             cos_t),
  };
  for (const Point3& axis : axes) {
    TriangleMesh leg = make_frustum(leg_r0, leg_r1, leg_len, n);
    const Eigen::Matrix3d rot =
        Eigen::Quaterniond::FromTwoVectors(Eigen::Vector3d::UnitZ(), axis)
            .toRotationMatrix();
    for (auto& v : leg.vertices) v = rot * v;
    mesh.append(leg);
  }
  return mesh;
}

// Moves the footprint center onto the origin, the resting plane onto z = 0
// and scales uniformly to the exact nominal height.
void normalize_canonical(TriangleMesh& mesh, double target_height) {
  Aabb box = mesh_aabb(mesh);
  const Point3 shift(-box.center().x(), -box.center().y(), -box.min.z());
  for (auto& v : mesh.vertices) v += shift;
  const double height = box.size().z();
  const double scale = target_height / height;
  for (auto& v : mesh.vertices) v *= scale;
}

}  // namespace

void TriangleMesh::append(const TriangleMesh& other) {
  const std::uint32_t offset = static_cast<std::uint32_t>(vertices.size());
  vertices.insert(vertices.end(), other.vertices.begin(),
                  other.vertices.end());
  triangles.reserve(triangles.size() + other.triangles.size());
  for (const auto& t : other.triangles)
    triangles.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
}

TriangleMesh make_mesh(ObjectClass cls, const MeshParams& params) {
  if (params.resolution < 8)
    throw std::invalid_argument("make_mesh: resolution must be >= 8");

  TriangleMesh mesh;
  double height = 0.0;
  switch (cls) {
    case ObjectClass::reef_ring:
      mesh = make_ring(params);
      height = params.ring_height;
      break;
    case ObjectClass::reef_cone:
      mesh = make_cone(params);
      height = params.cone_height;
      break;
    case ObjectClass::tetrapod_b:
      mesh = make_tetrapod(params);
      height = params.tetrapod_height;
      break;
    case ObjectClass::tetrapod_s:
      mesh = make_tetrapod(params);
      height = params.tetrapod_height * params.tetrapod_s_scale;
      break;
  }
  normalize_canonical(mesh, height);
  return mesh;
}

ClassDims class_dims(ObjectClass cls, const MeshParams& params) {
  const TriangleMesh mesh = make_mesh(cls, params);
  const Aabb box = mesh_aabb(mesh);
  return {box.size().z(), std::max(box.size().x(), box.size().y())};
}

Aabb mesh_aabb(const TriangleMesh& mesh) {
  Aabb box;
  for (const Point3& v : mesh.vertices) box.expand(v);
  return box;
}

TriangleMesh transform_mesh(const TriangleMesh& mesh,
                            const RigidTransform& t) {
  TriangleMesh out;
  out.vertices.reserve(mesh.vertices.size());
  for (const Point3& v : mesh.vertices) out.vertices.push_back(t.apply(v));
  out.triangles = mesh.triangles;
  return out;
}

double mesh_signed_volume(const TriangleMesh& mesh) {
  double vol = 0.0;
  for (const auto& t : mesh.triangles) {
    const Point3& a = mesh.vertices[t[0]];
    const Point3& b = mesh.vertices[t[1]];
    const Point3& c = mesh.vertices[t[2]];
    vol += a.dot(b.cross(c));
  }
  return vol / 6.0;
}

bool mesh_is_closed(const TriangleMesh& mesh) {
  // Consistently oriented closed surface: every directed edge appears
  // exactly once, paired with its reverse.
  std::unordered_map<std::uint64_t, int> directed;
  auto key = [](std::uint32_t a, std::uint32_t b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
  };
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      const std::uint32_t a = t[e], b = t[(e + 1) % 3];
      if (a == b) return false;
      if (++directed[key(a, b)] > 1) return false;
    }
  }
  for (const auto& [k, count] : directed) {
    const std::uint32_t a = static_cast<std::uint32_t>(k >> 32);
    const std::uint32_t b = static_cast<std::uint32_t>(k & 0xffffffffULL);
    auto rev = directed.find(key(b, a));
    if (rev == directed.end() || rev->second != 1) return false;
  }
  return true;
}

void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  const std::string ext = path.extension().string();
  if (ext == ".stl") {
    out << "solid mesh\n";
    for (const auto& t : mesh.triangles) {
      const Point3& a = mesh.vertices[t[0]];
      const Point3& b = mesh.vertices[t[1]];
      const Point3& c = mesh.vertices[t[2]];
      Point3 n = (b - a).cross(c - a);
      const double len = n.norm();
      if (len > 0) n /= len;
      out << "  facet normal " << n.x() << " " << n.y() << " " << n.z()
          << "\n    outer loop\n";
      for (int i = 0; i < 3; ++i) {
        const Point3& v = mesh.vertices[t[i]];
        out << "      vertex " << v.x() << " " << v.y() << " " << v.z()
            << "\n";
      }
      out << "    endloop\n  endfacet\n";
    }
    out << "endsolid mesh\n";
  } else if (ext == ".ply") {
    out << "ply\nformat ascii 1.0\n";
    out << "element vertex " << mesh.vertices.size() << "\n";
    out << "property float x\nproperty float y\nproperty float z\n";
    out << "element face " << mesh.triangles.size() << "\n";
    out << "property list uchar int vertex_indices\nend_header\n";
    for (const Point3& v : mesh.vertices)
      out << v.x() << " " << v.y() << " " << v.z() << "\n";
    for (const auto& t : mesh.triangles)
      out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  } else {
    throw std::invalid_argument("save_mesh: unsupported extension " + ext);
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace reefscan::geom
