#include "reefscan/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace reefscan::geom {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint32_t kLeafSize = 4;
}  // namespace

Ray Ray::through(const Point3& origin, const Point3& toward) {
  Ray r;
  r.origin = origin;
  r.direction = (toward - origin).normalized();
  return r;
}

std::optional<double> ray_triangle(const Ray& ray, const Point3& a,
                                   const Point3& b, const Point3& c) {
  constexpr double kEps = 1e-12;
  const Point3 e1 = b - a;
  const Point3 e2 = c - a;
  const Point3 pvec = ray.direction.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < kEps) return std::nullopt;
  const double inv_det = 1.0 / det;
  const Point3 tvec = ray.origin - a;
  const double u = tvec.dot(pvec) * inv_det;
  if (u < -kEps || u > 1.0 + kEps) return std::nullopt;
  const Point3 qvec = tvec.cross(e1);
  const double v = ray.direction.dot(qvec) * inv_det;
  if (v < -kEps || u + v > 1.0 + kEps) return std::nullopt;
  const double t = e2.dot(qvec) * inv_det;
  if (t <= kEps) return std::nullopt;
  return t;
}

void Bvh::add_mesh(const TriangleMesh& mesh) {
  if (built_) throw std::logic_error("Bvh: add_mesh after build");
  for (const auto& tri : mesh.triangles) {
    Tri t;
    t.a = mesh.vertices[tri[0]];
    t.b = mesh.vertices[tri[1]];
    t.c = mesh.vertices[tri[2]];
    t.id = static_cast<std::uint32_t>(tris_.size());
    tris_.push_back(t);
  }
}

void Bvh::build() {
  nodes_.clear();
  order_.resize(tris_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!tris_.empty()) {
    nodes_.reserve(2 * tris_.size());
    build_node(0, static_cast<std::uint32_t>(tris_.size()));
  }
  built_ = true;
}

std::uint32_t Bvh::build_node(std::uint32_t begin, std::uint32_t end) {
  const std::uint32_t index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();

  Point3 lo = Point3::Constant(kInf), hi = Point3::Constant(-kInf);
  Point3 clo = lo, chi = hi;
  for (std::uint32_t i = begin; i < end; ++i) {
    const Tri& t = tris_[order_[i]];
    lo = lo.cwiseMin(t.a).cwiseMin(t.b).cwiseMin(t.c);
    hi = hi.cwiseMax(t.a).cwiseMax(t.b).cwiseMax(t.c);
    const Point3 centroid = (t.a + t.b + t.c) / 3.0;
    clo = clo.cwiseMin(centroid);
    chi = chi.cwiseMax(centroid);
  }
  nodes_[index].aabb_min = lo;
  nodes_[index].aabb_max = hi;

  const std::uint32_t count = end - begin;
  int axis = 0;
  (chi - clo).maxCoeff(&axis);
  if (count <= kLeafSize || (chi - clo)[axis] <= 0.0) {
    nodes_[index].left = begin;
    nodes_[index].count = count;
    return index;
  }

  const std::uint32_t mid = begin + count / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end,
                   [&](std::uint32_t ia, std::uint32_t ib) {
                     const Tri& ta = tris_[ia];
                     const Tri& tb = tris_[ib];
                     const double ca = (ta.a + ta.b + ta.c)[axis];
                     const double cb = (tb.a + tb.b + tb.c)[axis];
                     if (ca != cb) return ca < cb;
                     return ia < ib;  // deterministic split
                   });

  build_node(begin, mid);  // left child lands at index + 1
  const std::uint32_t right = build_node(mid, end);
  nodes_[index].left = right;  // inner nodes store the right child index
  nodes_[index].count = 0;
  return index;
}

namespace {

// Slab test against the current best hit distance. Rays parallel to a
// slab axis (origin possibly on the boundary plane) are handled
// explicitly: (lo - origin) * inf would produce NaN there.
inline bool aabb_hit(const Point3& lo, const Point3& hi, const Point3& origin,
                     const Point3& dir, const Point3& inv_dir, double t_max) {
  double t0 = 0.0, t1 = t_max;
  for (int k = 0; k < 3; ++k) {
    if (dir[k] == 0.0) {
      if (origin[k] < lo[k] || origin[k] > hi[k]) return false;
      continue;
    }
    const double ta = (lo[k] - origin[k]) * inv_dir[k];
    const double tb = (hi[k] - origin[k]) * inv_dir[k];
    t0 = std::max(t0, std::min(ta, tb));
    t1 = std::min(t1, std::max(ta, tb));
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace

std::optional<RayHit> Bvh::intersect(const Ray& ray) const {
  if (!built_) throw std::logic_error("Bvh: intersect before build");
  if (nodes_.empty()) return std::nullopt;

  const Point3 inv_dir(1.0 / ray.direction.x(), 1.0 / ray.direction.y(),
                       1.0 / ray.direction.z());

  double best_t = kInf;
  std::uint32_t best_id = std::numeric_limits<std::uint32_t>::max();

  std::uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;

  while (top > 0) {
    const std::uint32_t idx = stack[--top];
    const Node& node = nodes_[idx];
    if (!aabb_hit(node.aabb_min, node.aabb_max, ray.origin, ray.direction,
                  inv_dir, best_t))
      continue;
    if (node.count > 0) {
      for (std::uint32_t i = node.left; i < node.left + node.count; ++i) {
        const Tri& tri = tris_[order_[i]];
        if (auto t = ray_triangle(ray, tri.a, tri.b, tri.c)) {
          if (*t < best_t || (*t == best_t && tri.id < best_id)) {
            best_t = *t;
            best_id = tri.id;
          }
        }
      }
    } else {
      // Left child immediately follows the node; inner nodes store the
      // right child index.
      stack[top++] = node.left;
      stack[top++] = idx + 1;
    }
  }

  if (best_id == std::numeric_limits<std::uint32_t>::max()) return std::nullopt;
  RayHit hit;
  hit.range = best_t;
  hit.point = ray.origin + best_t * ray.direction;
  hit.triangle = best_id;
  return hit;
}

std::optional<RayHit> Bvh::intersect_brute_force(const Ray& ray) const {
  double best_t = kInf;
  std::uint32_t best_id = std::numeric_limits<std::uint32_t>::max();
  for (const Tri& tri : tris_) {
    if (auto t = ray_triangle(ray, tri.a, tri.b, tri.c)) {
      if (*t < best_t || (*t == best_t && tri.id < best_id)) {
        best_t = *t;
        best_id = tri.id;
      }
    }
  }
  if (best_id == std::numeric_limits<std::uint32_t>::max()) return std::nullopt;
  RayHit hit;
  hit.range = best_t;
  hit.point = ray.origin + best_t * ray.direction;
  hit.triangle = best_id;
  return hit;
}

}  // namespace reefscan::geom
