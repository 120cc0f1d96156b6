#pragma once

#include "reefscan/config.hpp"
#include "reefscan/icp.hpp"
#include "reefscan/ransac.hpp"
#include "reefscan/template_library.hpp"
#include "reefscan/types.hpp"

#include <optional>
#include <vector>

namespace reefscan::detect {

struct Segment {
  double origin_x = 0.0;  // window corner
  double origin_y = 0.0;
  PointCloud cloud;
};

struct Hypothesis {
  ObjectClass cls = ObjectClass::reef_ring;
  RigidTransform pose;  // template cloud frame -> scene frame
  Point3 center = Point3::Zero();  // mesh-frame origin mapped to the scene
  double yaw = 0.0;
  double rmse = 0.0;
  double inlier_fraction = 0.0;
  double origin_x = 0.0, origin_y = 0.0;  // owning window
};

// Overlapping square windows tiled over the cloud's xy bounds (anchored at
// the cloud min corner, so the pipeline is translation-equivariant).
// Windows with fewer than min_points points are discarded.
std::vector<Segment> sliding_windows(const PointCloud& cloud,
                                     double window_size, double stride,
                                     std::size_t min_points);

// Registers every candidate template against the segment (centroid
// alignment then ICP) and returns the lowest-RMSE hypothesis that passes
// the class RMSE threshold and the inlier-fraction gate, or nothing.
// class_filter < 0 considers all classes.
std::optional<Hypothesis> match_segment(const Segment& segment,
                                        const templates::TemplateLibrary& library,
                                        const DetectorConfig& config,
                                        int class_filter = -1);

// Greedy duplicate suppression: hypotheses sorted by ascending RMSE (ties:
// class id, center x, center y); a hypothesis is dropped when its center
// lies within the larger of the two class radii of an accepted one.
std::vector<Detection> nms_dedupe(
    const std::vector<Hypothesis>& hypotheses,
    const std::array<double, kClassCount>& nms_radius);

// Full pipeline: RANSAC seabed removal -> sliding windows -> per-segment
// template matching -> duplicate suppression. threads parallelizes the
// segment matching without changing the result.
std::vector<Detection> detect_scene(const PointCloud& cloud,
                                    const templates::TemplateLibrary& library,
                                    const DetectorConfig& config,
                                    int threads = 1);

// Per-scene diagnostics of the last stages, for the CLI debug dump.
struct DetectDebug {
  PlaneModel plane;
  std::size_t residual_points = 0;
  std::size_t segment_count = 0;
  std::size_t hypothesis_count = 0;
};

std::vector<Detection> detect_scene(const PointCloud& cloud,
                                    const templates::TemplateLibrary& library,
                                    const DetectorConfig& config, int threads,
                                    DetectDebug* debug);

}  // namespace reefscan::detect
