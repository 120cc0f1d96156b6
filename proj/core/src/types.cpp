#include "reefscan/types.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace reefscan {

RigidTransform RigidTransform::from_translation(const Eigen::Vector3d& t) {
  RigidTransform out;
  out.translation = t;
  return out;
}

RigidTransform RigidTransform::yaw_about_z(double yaw_rad) {
  RigidTransform out;
  out.rotation = Eigen::AngleAxisd(yaw_rad, Eigen::Vector3d::UnitZ())
                     .toRotationMatrix();
  return out;
}

RigidTransform RigidTransform::compose(const RigidTransform& inner) const {
  RigidTransform out;
  out.rotation = rotation * inner.rotation;
  out.translation = rotation * inner.translation + translation;
  return out;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform out;
  out.rotation = rotation.transpose();
  out.translation = -(out.rotation * translation);
  return out;
}

bool RigidTransform::is_rigid(double tol) const {
  const Eigen::Matrix3d gram = rotation.transpose() * rotation;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol)
    return false;
  return rotation.determinant() > 0.0;
}

double RigidTransform::yaw() const {
  return normalize_yaw(std::atan2(rotation(1, 0), rotation(0, 0)));
}

double normalize_yaw(double yaw_rad) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double y = std::fmod(yaw_rad, two_pi);
  if (y < 0.0) y += two_pi;
  if (y >= two_pi) y = 0.0;
  return y;
}

namespace {
const std::array<std::string, kClassCount> kClassNames = {
    "reef_ring", "reef_cone", "tetrapod_b", "tetrapod_s"};
}

const std::string& class_name(ObjectClass cls) {
  return kClassNames[static_cast<int>(cls)];
}

ObjectClass class_from_name(const std::string& name) {
  for (int i = 0; i < kClassCount; ++i) {
    if (kClassNames[i] == name) return static_cast<ObjectClass>(i);
  }
  std::ostringstream msg;
  msg << "unknown object class \"" << name << "\"; legal names are";
  for (int i = 0; i < kClassCount; ++i)
    msg << (i == 0 ? ": " : ", ") << kClassNames[i];
  throw ParseError(msg.str());
}

}  // namespace reefscan
