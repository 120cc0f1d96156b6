#include "reefscan/detector.hpp"

#include "reefscan/cloud.hpp"
#include "reefscan/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace reefscan::detect {

namespace {

std::size_t effective_min_points(const templates::TemplateLibrary& library,
                                 const DetectorConfig& config,
                                 ObjectClass cls) {
  if (config.min_points[static_cast<int>(cls)] > 0)
    return static_cast<std::size_t>(config.min_points[static_cast<int>(cls)]);
  std::size_t min_points = std::numeric_limits<std::size_t>::max();
  for (const templates::Template* t : library.of_class(cls))
    min_points = std::min(min_points, t->min_points);
  return min_points;
}

double effective_rmse_threshold(const DetectorConfig& config,
                                const templates::Template& t) {
  const double override_value = config.rmse_threshold[static_cast<int>(t.cls)];
  return override_value > 0.0 ? override_value : t.rmse_threshold;
}

// Smooth seabed bumps can hug a template surface closely enough to pass
// the RMSE gate, but they also fill space a real object leaves empty (the
// ring's bore, the gaps between tetrapod legs). Count segment points that
// fall inside the aligned template's footprint, clearly above its resting
// plane, yet far from every template point.
bool free_space_consistent(const Segment& segment,
                           const templates::Template& t,
                           const RigidTransform& pose,
                           const DetectorConfig& config) {
  if (config.free_space_max_fraction >= 1.0) return true;

  const geom::KdTree surface(t.cloud);
  geom::Aabb box;
  for (const Point3& p : t.cloud) box.expand(p);
  // origin_offset.z() is the resting plane in the template frame; start
  // the test window above it so ground seen through the object (and local
  // slope under it) cannot count against a genuine match.
  const double z_low =
      std::max(box.min.z(), t.origin_offset.z() + config.free_space_zmin);

  const RigidTransform into_template = pose.inverse();
  std::size_t inside = 0, violations = 0;
  for (const Point3& p : segment.cloud) {
    const Point3 q = into_template.apply(p);
    if (q.x() < box.min.x() || q.x() > box.max.x() || q.y() < box.min.y() ||
        q.y() > box.max.y() || q.z() < z_low || q.z() > box.max.z())
      continue;
    ++inside;
    if (!surface.nearest(q, config.free_space_dist)) ++violations;
  }
  if (inside < 10) return true;  // too little evidence either way
  return static_cast<double>(violations) <=
         config.free_space_max_fraction * static_cast<double>(inside);
}

}  // namespace

std::vector<Segment> sliding_windows(const PointCloud& cloud,
                                     double window_size, double stride,
                                     std::size_t min_points) {
  if (cloud.empty()) return {};
  if (stride <= 0.0 || window_size < stride)
    throw std::invalid_argument(
        "sliding_windows: need window_size >= stride > 0");

  const Rect bounds = cloud_bounds_xy(cloud);
  const auto steps_x =
      static_cast<std::size_t>(std::floor(bounds.width() / stride)) + 1;
  const auto steps_y =
      static_cast<std::size_t>(std::floor(bounds.height() / stride)) + 1;

  // Bucket points on the stride grid; a window spans a small block of
  // cells which is then filtered against the exact window footprint.
  const auto cells_per_window =
      static_cast<std::size_t>(std::ceil(window_size / stride));
  std::vector<std::vector<std::uint32_t>> cells(steps_x * steps_y);
  for (std::uint32_t i = 0; i < cloud.size(); ++i) {
    auto cx = static_cast<std::size_t>((cloud[i].x() - bounds.min_x) / stride);
    auto cy = static_cast<std::size_t>((cloud[i].y() - bounds.min_y) / stride);
    cx = std::min(cx, steps_x - 1);
    cy = std::min(cy, steps_y - 1);
    cells[cy * steps_x + cx].push_back(i);
  }

  std::vector<Segment> segments;
  for (std::size_t wy = 0; wy < steps_y; ++wy) {
    for (std::size_t wx = 0; wx < steps_x; ++wx) {
      const double ox = bounds.min_x + stride * static_cast<double>(wx);
      const double oy = bounds.min_y + stride * static_cast<double>(wy);
      Segment seg;
      seg.origin_x = ox;
      seg.origin_y = oy;
      for (std::size_t cy = wy; cy < std::min(wy + cells_per_window, steps_y);
           ++cy) {
        for (std::size_t cx = wx;
             cx < std::min(wx + cells_per_window, steps_x); ++cx) {
          for (const std::uint32_t i : cells[cy * steps_x + cx]) {
            const Point3& p = cloud[i];
            if (p.x() >= ox && p.x() < ox + window_size && p.y() >= oy &&
                p.y() < oy + window_size) {
              seg.cloud.push_back(p);
            }
          }
        }
      }
      if (seg.cloud.size() >= min_points) segments.push_back(std::move(seg));
    }
  }
  return segments;
}

std::optional<Hypothesis> match_segment(
    const Segment& segment, const templates::TemplateLibrary& library,
    const DetectorConfig& config, int class_filter) {
  if (segment.cloud.size() < 3) return std::nullopt;

  double z_min = std::numeric_limits<double>::infinity();
  double z_max = -z_min;
  for (const Point3& p : segment.cloud) {
    z_min = std::min(z_min, p.z());
    z_max = std::max(z_max, p.z());
  }
  const double z_extent = z_max - z_min;

  // Residual seabed hugs the bottom of the window; anchor the initial
  // alignment on the points standing above it.
  Point3 seg_centroid = Point3::Zero();
  std::size_t elevated = 0;
  for (const Point3& p : segment.cloud) {
    if (p.z() > z_min + config.init_ground_band) {
      seg_centroid += p;
      ++elevated;
    }
  }
  if (elevated >= 3)
    seg_centroid /= static_cast<double>(elevated);
  else
    seg_centroid = centroid(segment.cloud);

  const geom::KdTree target(segment.cloud);
  const RigidTransform init = RigidTransform::from_translation(seg_centroid);

  std::optional<Hypothesis> best;
  for (const templates::Template& t : library.templates) {
    if (class_filter >= 0 && static_cast<int>(t.cls) != class_filter) continue;
    const int ci = static_cast<int>(t.cls);

    const std::size_t min_points =
        config.min_points[ci] > 0
            ? static_cast<std::size_t>(config.min_points[ci])
            : t.min_points;
    if (segment.cloud.size() < min_points) continue;
    if (config.min_height_fraction > 0.0 &&
        z_extent < config.min_height_fraction * library.dims[ci].height)
      continue;

    const double rmse_threshold = effective_rmse_threshold(config, t);
    IcpParams icp = config.icp;
    if (config.icp_abort_factor > 0.0)
      icp.abort_rmse = config.icp_abort_factor * rmse_threshold;

    const IcpResult reg = icp_register(t.cloud, target, icp, init);
    if (!reg.ok) continue;
    if (reg.rmse > rmse_threshold) continue;
    if (reg.inlier_fraction < config.min_inlier_fraction) continue;
    if (!free_space_consistent(segment, t, reg.transform, config)) continue;

    if (!best || reg.rmse < best->rmse) {
      Hypothesis h;
      h.cls = t.cls;
      h.pose = reg.transform;
      h.center = reg.transform.apply(t.origin_offset);
      h.yaw = normalize_yaw(t.source_yaw + reg.transform.yaw());
      h.rmse = reg.rmse;
      h.inlier_fraction = reg.inlier_fraction;
      h.origin_x = segment.origin_x;
      h.origin_y = segment.origin_y;
      best = h;
    }
  }
  return best;
}

std::vector<Detection> nms_dedupe(
    const std::vector<Hypothesis>& hypotheses,
    const std::array<double, kClassCount>& nms_radius) {
  std::vector<const Hypothesis*> sorted;
  sorted.reserve(hypotheses.size());
  for (const Hypothesis& h : hypotheses) sorted.push_back(&h);
  std::sort(sorted.begin(), sorted.end(),
            [](const Hypothesis* a, const Hypothesis* b) {
              if (a->rmse != b->rmse) return a->rmse < b->rmse;
              if (a->cls != b->cls) return a->cls < b->cls;
              if (a->center.x() != b->center.x())
                return a->center.x() < b->center.x();
              return a->center.y() < b->center.y();
            });

  std::vector<const Hypothesis*> accepted;
  for (const Hypothesis* h : sorted) {
    bool suppressed = false;
    for (const Hypothesis* a : accepted) {
      const double radius = std::max(nms_radius[static_cast<int>(a->cls)],
                                     nms_radius[static_cast<int>(h->cls)]);
      const double dx = a->center.x() - h->center.x();
      const double dy = a->center.y() - h->center.y();
      if (dx * dx + dy * dy < radius * radius) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) accepted.push_back(h);
  }

  std::vector<Detection> detections;
  detections.reserve(accepted.size());
  for (const Hypothesis* h : accepted) {
    Detection d;
    d.cls = h->cls;
    d.center = h->center;
    d.yaw = h->yaw;
    d.score = 1.0 / (1.0 + h->rmse);
    detections.push_back(d);
  }
  return detections;
}

std::vector<Detection> detect_scene(const PointCloud& cloud,
                                    const templates::TemplateLibrary& library,
                                    const DetectorConfig& config, int threads,
                                    DetectDebug* debug) {
  if (debug) *debug = {};
  if (cloud.size() < 3) return {};

  const PlaneModel plane =
      ransac_plane(cloud, config.ransac.iterations, config.ransac.inlier_dist,
                   config.seed);
  const PointCloud residual =
      remove_seabed(cloud, plane, config.ransac.clearance);
  if (debug) {
    debug->plane = plane;
    debug->residual_points = residual.size();
  }
  if (residual.empty()) return {};

  // (segment, class filter) work items, built in a fixed order.
  std::vector<std::pair<Segment, int>> work;
  if (config.window_mode == WindowMode::per_class) {
    for (int c = 0; c < kClassCount; ++c) {
      const ObjectClass cls = static_cast<ObjectClass>(c);
      if (library.of_class(cls).empty()) continue;
      const double window =
          config.window_size_factor * library.dims[c].footprint_diameter;
      const double stride = config.stride_fraction * window;
      const std::size_t min_points =
          effective_min_points(library, config, cls);
      for (Segment& seg :
           sliding_windows(residual, window, stride, min_points))
        work.emplace_back(std::move(seg), c);
    }
  } else {
    double window = config.global_window_size;
    if (window <= 0.0) {
      for (int c = 0; c < kClassCount; ++c)
        window = std::max(window, config.window_size_factor *
                                      library.dims[c].footprint_diameter);
    }
    const double stride = config.stride_fraction * window;
    std::size_t min_points = std::numeric_limits<std::size_t>::max();
    for (int c = 0; c < kClassCount; ++c) {
      const ObjectClass cls = static_cast<ObjectClass>(c);
      if (library.of_class(cls).empty()) continue;
      min_points =
          std::min(min_points, effective_min_points(library, config, cls));
    }
    for (Segment& seg : sliding_windows(residual, window, stride, min_points))
      work.emplace_back(std::move(seg), -1);
  }
  if (debug) debug->segment_count = work.size();

  std::vector<std::optional<Hypothesis>> results(work.size());
  parallel_for(work.size(), threads, [&](std::size_t i) {
    results[i] =
        match_segment(work[i].first, library, config, work[i].second);
  });

  std::vector<Hypothesis> hypotheses;
  for (const auto& r : results) {
    if (r) hypotheses.push_back(*r);
  }
  if (debug) debug->hypothesis_count = hypotheses.size();

  std::array<double, kClassCount> radii{};
  for (int c = 0; c < kClassCount; ++c)
    radii[c] = config.nms_radius_factor * library.dims[c].footprint_diameter;
  return nms_dedupe(hypotheses, radii);
}

std::vector<Detection> detect_scene(const PointCloud& cloud,
                                    const templates::TemplateLibrary& library,
                                    const DetectorConfig& config,
                                    int threads) {
  return detect_scene(cloud, library, config, threads, nullptr);
}

}  // namespace reefscan::detect
