#include <doctest.h>

#include "reefscan/cloud.hpp"
#include "reefscan/dataset.hpp"
#include "reefscan/detector.hpp"
#include "reefscan/icp.hpp"
#include "reefscan/ransac.hpp"
#include "reefscan/rng.hpp"
#include "reefscan/scanner.hpp"
#include "reefscan/scene_gen.hpp"
#include "reefscan/template_library.hpp"
#include "reefscan/terrain.hpp"
#include "support/helpers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace reefscan;
using namespace reefscan::detect;

namespace {

PointCloud plane_cloud(std::size_t n, double z, Rng& rng, double extent = 20.0,
                       double sigma = 0.0) {
  PointCloud cloud;
  cloud.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    cloud.emplace_back(rng.uniform(-extent, extent),
                       rng.uniform(-extent, extent),
                       z + (sigma > 0 ? rng.normal(0.0, sigma) : 0.0));
  }
  return cloud;
}

const templates::TemplateLibrary& shared_library() {
  static const templates::TemplateLibrary lib = [] {
    Config c;
    return templates::build_library(c);
  }();
  return lib;
}

// Independent reference for the greedy suppression rule: scans all pairs
// at every step instead of sweeping a sorted list.
std::vector<Detection> oracle_nms(std::vector<Hypothesis> pool,
                                  const std::array<double, kClassCount>& radii) {
  std::vector<Detection> out;
  std::vector<bool> used(pool.size(), false);
  while (true) {
    std::int64_t pick = -1;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (used[i]) continue;
      if (pick < 0) {
        pick = static_cast<std::int64_t>(i);
        continue;
      }
      const Hypothesis& a = pool[i];
      const Hypothesis& b = pool[pick];
      const auto key = [](const Hypothesis& h) {
        return std::make_tuple(h.rmse, static_cast<int>(h.cls), h.center.x(),
                               h.center.y());
      };
      if (key(a) < key(b)) pick = static_cast<std::int64_t>(i);
    }
    if (pick < 0) break;
    used[pick] = true;
    const Hypothesis& h = pool[pick];
    bool suppressed = false;
    for (const Detection& d : out) {
      const double radius = std::max(radii[static_cast<int>(d.cls)],
                                     radii[static_cast<int>(h.cls)]);
      const double dx = d.center.x() - h.center.x();
      const double dy = d.center.y() - h.center.y();
      if (dx * dx + dy * dy < radius * radius) suppressed = true;
    }
    if (!suppressed) {
      out.push_back({h.cls, h.center, h.yaw, 1.0 / (1.0 + h.rmse)});
    }
  }
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("detect");

TEST_CASE("ransac recovers an exact horizontal plane") {
  Rng rng(1);
  const PointCloud cloud = plane_cloud(1000, 2.0, rng);
  const PlaneModel plane = ransac_plane(cloud, 64, 0.01, 5);
  CHECK(plane.inlier_count == 1000);
  CHECK(std::abs(plane.normal.z()) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(plane.offset) == doctest::Approx(2.0).epsilon(1e-6));
  // canonical orientation: +z
  CHECK(plane.normal.z() > 0);
  CHECK(plane.signed_distance(Point3(0, 0, 3)) > 0);
}

TEST_CASE("ransac tolerates 20 percent outliers") {
  Rng rng(2);
  PointCloud cloud = plane_cloud(800, 0.5, rng, 20.0, 0.005);
  for (int i = 0; i < 200; ++i) {
    cloud.emplace_back(rng.uniform(-20, 20), rng.uniform(-20, 20),
                       rng.uniform(0.5, 4.0));
  }
  const PlaneModel plane = ransac_plane(cloud, 128, 0.02, 7);
  const double angle =
      std::acos(std::clamp(plane.normal.dot(Point3(0, 0, 1)), -1.0, 1.0));
  CHECK(angle < 0.5 * std::numbers::pi / 180.0);
  CHECK(std::abs(-plane.offset - 0.5) < 0.005);
}

TEST_CASE("ransac recovers a tilted plane normal") {
  Rng rng(3);
  PointCloud cloud;
  for (int i = 0; i < 2000; ++i) {
    const double x = rng.uniform(-20, 20);
    const double y = rng.uniform(-20, 20);
    cloud.emplace_back(x, y, 0.1 * x);
  }
  const PlaneModel plane = ransac_plane(cloud, 64, 0.01, 9);
  const Point3 expected = Point3(-0.1, 0, 1).normalized();
  const double angle =
      std::acos(std::clamp(plane.normal.dot(expected), -1.0, 1.0));
  CHECK(angle < 0.5 * std::numbers::pi / 180.0);
}

TEST_CASE("ransac rejects degenerate input") {
  CHECK_THROWS_AS(ransac_plane({Point3(0, 0, 0), Point3(1, 0, 0)}, 16, 0.01, 1),
                  std::invalid_argument);
  PointCloud collinear;
  for (int i = 0; i < 50; ++i) collinear.emplace_back(i * 0.1, 0.0, 0.0);
  CHECK_THROWS_AS(ransac_plane(collinear, 64, 0.01, 1), std::invalid_argument);
}

TEST_CASE("ransac is deterministic for a fixed seed") {
  Rng rng(4);
  PointCloud cloud = plane_cloud(500, 1.0, rng, 10.0, 0.01);
  const PlaneModel a = ransac_plane(cloud, 64, 0.02, 77);
  const PlaneModel b = ransac_plane(cloud, 64, 0.02, 77);
  CHECK(a.normal == b.normal);
  CHECK(a.offset == b.offset);
  CHECK(a.inlier_count == b.inlier_count);
}

TEST_CASE("remove_seabed keeps objects and sheds plane noise") {
  Rng rng(5);
  const PointCloud noise = plane_cloud(100000, 0.0, rng, 20.0, 0.01);
  PlaneModel plane;
  plane.normal = Point3(0, 0, 1);
  plane.offset = 0.0;
  plane.inlier_count = noise.size();

  const PointCloud survivors = remove_seabed(noise, plane, 0.04);
  CHECK(static_cast<double>(survivors.size()) <
        0.001 * static_cast<double>(noise.size()));

  PointCloud object = plane_cloud(500, 0.5, rng, 2.0, 0.01);
  CHECK(remove_seabed(object, plane, 0.04).size() == object.size());
  CHECK(remove_seabed({}, plane, 0.04).empty());
}

TEST_CASE("sliding windows cover compact clusters") {
  Rng rng(6);
  PointCloud cluster;
  for (int i = 0; i < 200; ++i)
    cluster.emplace_back(5.0 + rng.uniform(-0.8, 0.8),
                         7.0 + rng.uniform(-0.8, 0.8), rng.uniform(0, 1));
  const auto segments = sliding_windows(cluster, 4.0, 2.0, 10);
  REQUIRE(!segments.empty());
  bool fully_contained = false;
  for (const Segment& s : segments)
    fully_contained = fully_contained || s.cloud.size() == cluster.size();
  CHECK(fully_contained);
}

TEST_CASE("sliding windows of an empty cloud are empty") {
  CHECK(sliding_windows({}, 4.0, 2.0, 1).empty());
}

TEST_CASE("distant clusters never share a window") {
  Rng rng(7);
  PointCloud cloud;
  for (int i = 0; i < 150; ++i) {
    cloud.emplace_back(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), 0.5);
    cloud.emplace_back(10.0 + rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                       0.5);
  }
  for (const Segment& s : sliding_windows(cloud, 4.0, 2.0, 5)) {
    bool has_left = false, has_right = false;
    for (const Point3& p : s.cloud) {
      if (p.x() < 5.0) has_left = true;
      if (p.x() > 5.0) has_right = true;
    }
    CHECK_FALSE((has_left && has_right));
  }
}

TEST_CASE("window count tracks the stride") {
  Rng rng(8);
  PointCloud cloud;
  for (int i = 0; i < 5000; ++i)
    cloud.emplace_back(rng.uniform(0, 10), rng.uniform(0, 10),
                       rng.uniform(0, 1));
  const auto coarse = sliding_windows(cloud, 4.0, 4.0, 1);
  const auto fine = sliding_windows(cloud, 4.0, 2.0, 1);
  CHECK(fine.size() > coarse.size());
  std::size_t coarse_total = 0;
  for (const Segment& s : coarse) coarse_total += s.cloud.size();
  CHECK(coarse_total == cloud.size());  // stride == window partitions
}

TEST_CASE("icp registers a cloud to itself") {
  const templates::Template& t = shared_library().templates.front();
  IcpParams params;
  const IcpResult reg = icp_register(t.cloud, t.cloud, params);
  REQUIRE(reg.ok);
  CHECK(reg.rmse < 1e-9);
  CHECK(reg.inlier_fraction == 1.0);
  CHECK((reg.transform.rotation - Eigen::Matrix3d::Identity())
            .cwiseAbs()
            .maxCoeff() < 1e-9);
  CHECK(reg.transform.translation.norm() < 1e-9);
}

TEST_CASE("icp recovers a known offset and yaw") {
  const auto tets = shared_library().of_class(ObjectClass::tetrapod_b);
  REQUIRE(!tets.empty());
  const PointCloud& source = tets.front()->cloud;

  RigidTransform truth = RigidTransform::yaw_about_z(10.0 * std::numbers::pi / 180.0);
  truth.translation = Point3(0.3, 0.2, 0.0);
  const PointCloud target = apply_transform(source, truth);

  IcpParams params;
  const IcpResult reg = icp_register(source, target, params);
  REQUIRE(reg.ok);
  CHECK(reg.transform.is_rigid(1e-9));
  CHECK((reg.transform.translation - truth.translation).norm() < 0.02);
  CHECK(reg.rmse < 0.01);
}

TEST_CASE("icp rmse sits at the injected noise floor") {
  const auto cones = shared_library().of_class(ObjectClass::reef_cone);
  const PointCloud& source = cones.front()->cloud;
  Rng rng(9);
  PointCloud target = source;
  for (Point3& p : target)
    p += Point3(rng.normal(0, 0.01), rng.normal(0, 0.01), rng.normal(0, 0.01));

  IcpParams params;
  const IcpResult reg = icp_register(source, target, params);
  REQUIRE(reg.ok);
  CHECK(reg.rmse >= 0.008);
  CHECK(reg.rmse <= 0.02);
}

TEST_CASE("icp reports failure when correspondences vanish") {
  const PointCloud source = {Point3(0, 0, 0), Point3(1, 0, 0),
                             Point3(0, 1, 0)};
  const PointCloud target = {Point3(100, 100, 100), Point3(101, 100, 100),
                             Point3(100, 101, 100)};
  IcpParams params;
  const IcpResult reg = icp_register(source, target, params);
  CHECK_FALSE(reg.ok);
}

TEST_CASE("icp rmse is non-increasing on fixed correspondences") {
  // With a wide, constant gate over well-separated points, the
  // nearest-neighbor pairing is the true bijection at every iteration, so
  // each closed-form update minimizes over the same pairs and the final
  // rmse can only improve with more iterations.
  Rng rng(10);
  PointCloud source;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      source.emplace_back(i * 2.0, j * 2.0, rng.uniform(0.0, 0.5));
  RigidTransform offset = RigidTransform::yaw_about_z(0.04);
  offset.translation = Point3(0.08, -0.05, 0.02);
  PointCloud target = apply_transform(source, offset);
  for (Point3& p : target)
    p += Point3(rng.normal(0, 0.01), rng.normal(0, 0.01), rng.normal(0, 0.01));

  IcpParams params;
  params.corr_dist_initial = 10.0;
  params.corr_dist_final = 10.0;
  params.convergence_tol = 1e-15;  // run the full schedule
  double previous = std::numeric_limits<double>::infinity();
  for (int iters = 1; iters <= 6; ++iters) {
    params.max_iterations = iters;
    const IcpResult r = icp_register(source, target, params);
    REQUIRE(r.ok);
    CHECK(r.inlier_fraction == 1.0);
    CHECK(r.rmse <= previous + 1e-12);
    previous = r.rmse;
  }
}

TEST_CASE("match_segment identifies an exact template") {
  const templates::TemplateLibrary& lib = shared_library();
  Config c;
  const templates::Template* cone = lib.of_class(ObjectClass::reef_cone)[0];

  Segment seg;
  seg.cloud = apply_transform(cone->cloud,
                              RigidTransform::from_translation(Point3(3, 4, 1)));
  const auto hyp = match_segment(seg, lib, c.detect);
  REQUIRE(hyp.has_value());
  CHECK(hyp->cls == ObjectClass::reef_cone);
  CHECK(hyp->rmse < 1e-9);
  CHECK(hyp->pose.is_rigid(1e-9));
  CHECK((hyp->center - (Point3(3, 4, 1) + cone->origin_offset)).norm() < 1e-6);
}

TEST_CASE("match_segment rejects scatter") {
  const templates::TemplateLibrary& lib = shared_library();
  Config c;

  Rng rng(11);
  Segment small;
  for (int i = 0; i < 30; ++i)
    small.cloud.emplace_back(rng.uniform(-2, 2), rng.uniform(-2, 2),
                             rng.uniform(0, 2));
  CHECK_FALSE(match_segment(small, lib, c.detect).has_value());

  Segment big;
  for (int i = 0; i < 400; ++i)
    big.cloud.emplace_back(rng.uniform(-2, 2), rng.uniform(-2, 2),
                           rng.uniform(0, 2.2));
  CHECK_FALSE(match_segment(big, lib, c.detect).has_value());
}

TEST_CASE("match_segment recovers a simulated lone tetrapod") {
  Config c;
  TerrainParams tp = c.terrain;
  tp.base_amplitude = 0.0;
  const sim::TerrainField terrain({0, 0, 14, 14}, tp, 1);

  sim::PlacedObject obj;
  obj.annotation.cls = ObjectClass::tetrapod_b;
  obj.annotation.center = Point3(7, 7, 0);
  obj.annotation.yaw = 0.4;
  obj.pose = RigidTransform::yaw_about_z(0.4);
  obj.pose.translation = Point3(7, 7, 0);

  ScannerConfig scanner = c.scanner;
  scanner.direction_mode = ScanDirection::both;
  const PointCloud scan =
      sim::simulate_scan(terrain, {obj}, scanner, c.geometry, 17);

  Segment seg;
  for (const Point3& p : scan) {
    if (p.z() > 0.04 && std::abs(p.x() - 7) < 3 && std::abs(p.y() - 7) < 3)
      seg.cloud.push_back(p);
  }
  REQUIRE(seg.cloud.size() > 100);

  const auto hyp = match_segment(seg, shared_library(), c.detect);
  REQUIRE(hyp.has_value());
  CHECK(hyp->cls == ObjectClass::tetrapod_b);
  const double err = std::hypot(hyp->center.x() - 7.0, hyp->center.y() - 7.0);
  CHECK(err < 0.25);
}

TEST_CASE("nms keeps the better of two near hypotheses") {
  Hypothesis a;
  a.cls = ObjectClass::reef_cone;
  a.center = Point3(0, 0, 0);
  a.rmse = 0.02;
  Hypothesis b = a;
  b.center = Point3(0.1, 0, 0);
  b.rmse = 0.04;
  std::array<double, kClassCount> radii{1.0, 1.0, 1.0, 1.0};

  const auto kept = nms_dedupe({b, a}, radii);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].score == doctest::Approx(1.0 / 1.02));

  b.center = Point3(10, 0, 0);
  CHECK(nms_dedupe({a, b}, radii).size() == 2);
}

TEST_CASE("nms matches the pairwise-scan reference on chains") {
  std::array<double, kClassCount> radii{1.0, 1.0, 1.0, 1.0};
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Hypothesis> pool;
    const int n = 3 + static_cast<int>(rng.uniform_index(5));
    for (int i = 0; i < n; ++i) {
      Hypothesis h;
      h.cls = static_cast<ObjectClass>(rng.uniform_index(4));
      // chain spacing around 0.8 x radius
      h.center = Point3(0.8 * i + rng.uniform(-0.1, 0.1),
                        rng.uniform(-0.1, 0.1), 0);
      h.rmse = rng.uniform(0.01, 0.05);
      pool.push_back(h);
    }
    const auto fast = nms_dedupe(pool, radii);
    const auto slow = oracle_nms(pool, radii);
    REQUIRE(fast.size() == slow.size());
    for (std::size_t i = 0; i < fast.size(); ++i) {
      CHECK(fast[i].cls == slow[i].cls);
      CHECK(fast[i].center == slow[i].center);
      CHECK(fast[i].score == slow[i].score);
    }
    // survivors respect the smaller applicable radius
    for (std::size_t i = 0; i < fast.size(); ++i) {
      for (std::size_t j = i + 1; j < fast.size(); ++j) {
        const double dx = fast[i].center.x() - fast[j].center.x();
        const double dy = fast[i].center.y() - fast[j].center.y();
        const double min_radius =
            std::min(radii[static_cast<int>(fast[i].cls)],
                     radii[static_cast<int>(fast[j].cls)]);
        CHECK(std::sqrt(dx * dx + dy * dy) >= min_radius);
      }
    }
  }
}

TEST_CASE("detect_scene on an empty cloud is empty") {
  Config c;
  CHECK(detect_scene({}, shared_library(), c.detect).empty());
}

TEST_CASE("detect_scene finds 12 well-separated tetrapods") {
  Config c;
  c.scene.class_counts = {0, 0, 12, 0};
  c.scene.min_separation = 5.0;
  const Scene scene = sim::generate_scene(c, 20260809);

  DetectDebug debug;
  const auto detections =
      detect_scene(scene.cloud, shared_library(), c.detect, 1, &debug);
  CHECK(debug.residual_points > 0);

  REQUIRE(detections.size() == 12);
  for (const Detection& d : detections) CHECK(d.cls == ObjectClass::tetrapod_b);

  // every annotation has a detection within 0.5 m
  for (const ObjectAnnotation& gt : scene.annotations) {
    double best = 1e9;
    for (const Detection& d : detections)
      best = std::min(best, std::hypot(d.center.x() - gt.center.x(),
                                       d.center.y() - gt.center.y()));
    CHECK(best < 0.5);
  }
}

TEST_CASE("detect_scene is translation equivariant") {
  Config c;
  c.scene.class_counts = {1, 1, 0, 0};
  c.scene.bounds_x = 20;
  c.scene.bounds_y = 20;
  c.scene.min_separation = 6.0;
  c.scanner.beam_count = 192;
  const Scene scene = sim::generate_scene(c, 77);

  const auto base = detect_scene(scene.cloud, shared_library(), c.detect);
  REQUIRE(!base.empty());

  const Point3 shift(12.5, -3.25, 0.0);
  const PointCloud moved =
      apply_transform(scene.cloud, RigidTransform::from_translation(shift));
  const auto shifted = detect_scene(moved, shared_library(), c.detect);
  REQUIRE(shifted.size() == base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(shifted[i].cls == base[i].cls);
    CHECK((shifted[i].center - (base[i].center + shift)).norm() < 1e-6);
  }
}

TEST_CASE("detect_scene is independent of the thread count") {
  Config c;
  c.scene.class_counts = {1, 0, 1, 0};
  c.scene.bounds_x = 20;
  c.scene.bounds_y = 20;
  c.scene.min_separation = 6.0;
  const Scene scene = sim::generate_scene(c, 99);

  const auto a = detect_scene(scene.cloud, shared_library(), c.detect, 1);
  const auto b = detect_scene(scene.cloud, shared_library(), c.detect, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].cls == b[i].cls);
    CHECK(a[i].center == b[i].center);
    CHECK(a[i].yaw == b[i].yaw);
    CHECK(a[i].score == b[i].score);
  }
}

TEST_SUITE_END();
