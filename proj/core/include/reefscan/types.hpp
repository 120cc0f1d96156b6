#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace reefscan {

// Right-handed frame, z up, meters. In simulated scenes the seabed sits
// near z = 0 and sensors fly above it.
using Point3 = Eigen::Vector3d;

// Unordered set of 3D points. Consumers must not attach meaning to order.
using PointCloud = std::vector<Point3>;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Axis-aligned rectangle in the horizontal plane.
struct Rect {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  bool contains(double x, double y) const {
    return x >= min_x && x <= max_x && y >= min_y && y <= max_y;
  }
  bool valid() const { return width() > 0.0 && height() > 0.0; }
  Rect shrunk(double margin) const {
    return {min_x + margin, min_y + margin, max_x - margin, max_y - margin};
  }
};

// Proper rigid motion: p -> R*p + t with R orthonormal, det(R) = +1.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Eigen::Vector3d& t);
  static RigidTransform yaw_about_z(double yaw_rad);

  Point3 apply(const Point3& p) const { return rotation * p + translation; }
  RigidTransform compose(const RigidTransform& inner) const;  // this ∘ inner
  RigidTransform inverse() const;
  bool is_rigid(double tol = 1e-9) const;
  // Heading of the rotated x axis in the horizontal plane, in [0, 2*pi).
  double yaw() const;
};

enum class ObjectClass : int {
  reef_ring = 0,
  reef_cone = 1,
  tetrapod_b = 2,
  tetrapod_s = 3,
};

inline constexpr int kClassCount = 4;

constexpr std::array<ObjectClass, kClassCount> all_classes() {
  return {ObjectClass::reef_ring, ObjectClass::reef_cone,
          ObjectClass::tetrapod_b, ObjectClass::tetrapod_s};
}

const std::string& class_name(ObjectClass cls);
// Throws ParseError listing the legal names on an unknown class string.
ObjectClass class_from_name(const std::string& name);

struct ObjectAnnotation {
  ObjectClass cls = ObjectClass::reef_ring;
  Point3 center = Point3::Zero();
  double yaw = 0.0;  // radians in [0, 2*pi)
};

struct Detection {
  ObjectClass cls = ObjectClass::reef_ring;
  Point3 center = Point3::Zero();
  double yaw = 0.0;
  double score = 1.0;  // 1/(1+rmse), higher is better
};

struct Scene {
  PointCloud cloud;
  std::vector<ObjectAnnotation> annotations;
  Rect bounds;
  std::uint64_t seed = 0;
};

// Wraps an angle into [0, 2*pi).
double normalize_yaw(double yaw_rad);

}  // namespace reefscan
