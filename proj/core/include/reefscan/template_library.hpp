#pragma once

#include "reefscan/config.hpp"
#include "reefscan/mesh.hpp"
#include "reefscan/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace reefscan::templates {

// Sensor-view point cloud of one object class at one yaw, re-centered at
// its own centroid. origin_offset maps the cloud frame back to the mesh
// frame origin (footprint center at the resting plane), which is what
// detections report as the object center.
struct Template {
  ObjectClass cls = ObjectClass::reef_ring;
  PointCloud cloud;
  double source_yaw = 0.0;
  double rmse_threshold = 0.05;
  std::size_t min_points = 20;
  Point3 origin_offset = Point3::Zero();
};

struct TemplateLibrary {
  std::vector<Template> templates;
  std::string fingerprint;  // hash of the full generation config
  std::array<geom::ClassDims, kClassCount> dims{};

  std::vector<const Template*> of_class(ObjectClass cls) const;
};

// Poses the mesh at the given yaw on a flat virtual floor, scans it
// top-down with the survey beam geometry at sigma = 0 and no dropout,
// removes floor returns by height threshold and re-centers the result.
// Throws std::runtime_error when fewer than 20 points survive.
Template build_template(const geom::TriangleMesh& mesh, ObjectClass cls,
                        double yaw, const ScannerConfig& scanner,
                        const TemplateConfig& tmpl, const MeshParams& geometry);

// One template per (class, yaw): tetrapod_yaw_count uniformly spaced yaws
// for the tetrapods, rotsym_yaw_count for the surfaces of revolution.
TemplateLibrary build_library(const Config& config);

void save_library(const TemplateLibrary& library,
                  const std::filesystem::path& dir);
TemplateLibrary load_library(const std::filesystem::path& dir);

}  // namespace reefscan::templates
