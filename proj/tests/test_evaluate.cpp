#include <doctest.h>

#include "reefscan/evaluate.hpp"
#include "reefscan/io.hpp"
#include "reefscan/rng.hpp"
#include "support/helpers.hpp"

#include <algorithm>
#include <cmath>

using namespace reefscan;
using namespace reefscan::eval;

namespace {

Detection det(ObjectClass cls, double x, double y, double score) {
  return {cls, Point3(x, y, 0.0), 0.0, score};
}

ObjectAnnotation gt(ObjectClass cls, double x, double y) {
  return {cls, Point3(x, y, 0.0), 0.0};
}

// Independent re-derivation of the greedy rule: repeatedly pick the
// unprocessed detection with the best (score, center) key by a full scan,
// then its nearest unmatched ground truth by a full scan.
std::vector<std::optional<std::size_t>> oracle_greedy(
    const std::vector<Detection>& dets,
    const std::vector<ObjectAnnotation>& gts, ObjectClass cls,
    double threshold) {
  std::vector<std::size_t> det_ids;
  for (std::size_t i = 0; i < dets.size(); ++i)
    if (dets[i].cls == cls) det_ids.push_back(i);
  std::vector<std::size_t> gt_ids;
  for (std::size_t i = 0; i < gts.size(); ++i)
    if (gts[i].cls == cls) gt_ids.push_back(i);

  std::vector<bool> det_done(det_ids.size(), false);
  std::vector<bool> gt_done(gt_ids.size(), false);
  std::vector<std::optional<std::size_t>> result;
  for (std::size_t round = 0; round < det_ids.size(); ++round) {
    std::int64_t pick = -1;
    for (std::size_t i = 0; i < det_ids.size(); ++i) {
      if (det_done[i]) continue;
      if (pick < 0) {
        pick = static_cast<std::int64_t>(i);
        continue;
      }
      const Detection& a = dets[det_ids[i]];
      const Detection& b = dets[det_ids[pick]];
      const auto key = [](const Detection& d) {
        return std::make_tuple(-d.score, d.center.x(), d.center.y(),
                               d.center.z());
      };
      if (key(a) < key(b)) pick = static_cast<std::int64_t>(i);
    }
    det_done[pick] = true;
    const Detection& d = dets[det_ids[pick]];
    std::int64_t best_gt = -1;
    double best_dist = threshold;
    for (std::size_t k = 0; k < gt_ids.size(); ++k) {
      if (gt_done[k]) continue;
      const double dist = std::hypot(d.center.x() - gts[gt_ids[k]].center.x(),
                                     d.center.y() - gts[gt_ids[k]].center.y());
      if (dist <= best_dist &&
          (best_gt < 0 || dist < best_dist)) {
        best_dist = dist;
        best_gt = static_cast<std::int64_t>(k);
      }
    }
    if (best_gt >= 0) {
      gt_done[best_gt] = true;
      result.emplace_back(gt_ids[best_gt]);
    } else {
      result.emplace_back(std::nullopt);
    }
  }
  return result;
}

// Direct reading of the 101-point interpolated AP definition.
double oracle_ap(const std::vector<std::pair<double, double>>& pr_points) {
  double sum = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double r = i / 100.0;
    double envelope = 0.0;
    for (const auto& [recall, precision] : pr_points)
      if (recall >= r) envelope = std::max(envelope, precision);
    sum += envelope;
  }
  return sum / 101.0;
}

}  // namespace

TEST_SUITE_BEGIN("evaluate");

TEST_CASE("a detection at the ground-truth center is a true positive") {
  const MatchSet m = match({det(ObjectClass::reef_cone, 1, 1, 0.9)},
                           {gt(ObjectClass::reef_cone, 1, 1)},
                           ObjectClass::reef_cone, 0.5);
  REQUIRE(m.detections.size() == 1);
  CHECK(m.detections[0].second.has_value());
  CHECK(m.ground_truth_count == 1);
}

TEST_CASE("the distance threshold is a hard gate") {
  const MatchSet m = match({det(ObjectClass::reef_cone, 0.6, 0, 0.9)},
                           {gt(ObjectClass::reef_cone, 0, 0)},
                           ObjectClass::reef_cone, 0.5);
  REQUIRE(m.detections.size() == 1);
  CHECK_FALSE(m.detections[0].second.has_value());
}

TEST_CASE("higher score wins a contested ground truth") {
  const std::vector<Detection> dets = {
      det(ObjectClass::reef_ring, 0.1, 0, 0.9),
      det(ObjectClass::reef_ring, -0.1, 0, 0.8)};
  const std::vector<ObjectAnnotation> gts = {gt(ObjectClass::reef_ring, 0, 0)};
  const MatchSet m = match(dets, gts, ObjectClass::reef_ring, 0.5);
  REQUIRE(m.detections.size() == 2);
  CHECK(m.detections[0].first.score == 0.9);
  CHECK(m.detections[0].second.has_value());
  CHECK_FALSE(m.detections[1].second.has_value());

  const auto oracle = oracle_greedy(dets, gts, ObjectClass::reef_ring, 0.5);
  CHECK(oracle[0].has_value());
  CHECK_FALSE(oracle[1].has_value());
}

TEST_CASE("matching agrees with the independent greedy oracle") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Detection> dets;
    std::vector<ObjectAnnotation> gts;
    const int nd = static_cast<int>(rng.uniform_index(7));
    const int ng = static_cast<int>(rng.uniform_index(5));
    for (int i = 0; i < nd; ++i)
      dets.push_back(det(ObjectClass::tetrapod_s, rng.uniform(-2, 2),
                         rng.uniform(-2, 2), rng.uniform(0.1, 1.0)));
    for (int i = 0; i < ng; ++i)
      gts.push_back(gt(ObjectClass::tetrapod_s, rng.uniform(-2, 2),
                       rng.uniform(-2, 2)));

    const MatchSet m = match(dets, gts, ObjectClass::tetrapod_s, 0.5);
    const auto oracle = oracle_greedy(dets, gts, ObjectClass::tetrapod_s, 0.5);
    REQUIRE(m.detections.size() == oracle.size());
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      CHECK(m.detections[i].second.has_value() == oracle[i].has_value());
      if (oracle[i]) CHECK(*m.detections[i].second == *oracle[i]);
    }
  }
}

TEST_CASE("match result ignores detection input order") {
  Rng rng(32);
  std::vector<Detection> dets;
  std::vector<ObjectAnnotation> gts;
  for (int i = 0; i < 12; ++i) {
    dets.push_back(det(ObjectClass::reef_cone, rng.uniform(-3, 3),
                       rng.uniform(-3, 3), rng.uniform(0.1, 1.0)));
    gts.push_back(gt(ObjectClass::reef_cone, rng.uniform(-3, 3),
                     rng.uniform(-3, 3)));
  }
  const MatchSet a = match(dets, gts, ObjectClass::reef_cone, 1.0);
  std::reverse(dets.begin(), dets.end());
  const MatchSet b = match(dets, gts, ObjectClass::reef_cone, 1.0);
  REQUIRE(a.detections.size() == b.detections.size());
  for (std::size_t i = 0; i < a.detections.size(); ++i) {
    CHECK(a.detections[i].first.score == b.detections[i].first.score);
    CHECK(a.detections[i].second == b.detections[i].second);
  }
}

TEST_CASE("perfect detections give AP 1.0 and misses give 0.0") {
  MatchSet perfect;
  perfect.cls = ObjectClass::reef_ring;
  perfect.ground_truth_count = 3;
  for (int i = 0; i < 3; ++i)
    perfect.detections.emplace_back(det(ObjectClass::reef_ring, i, 0, 0.9),
                                    std::size_t(i));
  CHECK(average_precision(pr_curve(perfect)) == doctest::Approx(1.0));

  MatchSet empty;
  empty.cls = ObjectClass::reef_ring;
  empty.ground_truth_count = 3;
  CHECK(average_precision(pr_curve(empty)) == 0.0);
}

TEST_CASE("interpolated AP on the TP-FP-TP sweep matches the oracle") {
  MatchSet m;
  m.cls = ObjectClass::reef_cone;
  m.ground_truth_count = 2;
  m.detections.emplace_back(det(ObjectClass::reef_cone, 0, 0, 0.9),
                            std::size_t(0));
  m.detections.emplace_back(det(ObjectClass::reef_cone, 1, 0, 0.8),
                            std::nullopt);
  m.detections.emplace_back(det(ObjectClass::reef_cone, 2, 0, 0.7),
                            std::size_t(1));

  const PRCurve curve = pr_curve(m);
  REQUIRE(curve.points.size() == 3);
  CHECK(curve.points[0].recall == doctest::Approx(0.5));
  CHECK(curve.points[0].precision == doctest::Approx(1.0));
  CHECK(curve.points[2].recall == doctest::Approx(1.0));
  CHECK(curve.points[2].precision == doctest::Approx(2.0 / 3.0));

  std::vector<std::pair<double, double>> raw;
  for (const PrPoint& p : curve.points) raw.emplace_back(p.recall, p.precision);
  const double expected = oracle_ap(raw);
  CHECK(average_precision(curve) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected ==
        doctest::Approx((51.0 + 50.0 * 2.0 / 3.0) / 101.0).epsilon(1e-12));
}

TEST_CASE("recall is non-decreasing along the sweep") {
  Rng rng(33);
  MatchSet m;
  m.cls = ObjectClass::tetrapod_b;
  m.ground_truth_count = 10;
  std::size_t next_gt = 0;
  double score = 1.0;
  for (int i = 0; i < 25; ++i) {
    score *= 0.95;
    if (rng.uniform() < 0.4 && next_gt < 10)
      m.detections.emplace_back(det(ObjectClass::tetrapod_b, i, 0, score),
                                next_gt++);
    else
      m.detections.emplace_back(det(ObjectClass::tetrapod_b, i, 0, score),
                                std::nullopt);
  }
  const PRCurve curve = pr_curve(m);
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    CHECK(curve.points[i].recall >= curve.points[i - 1].recall);
    CHECK(curve.points[i].precision >= 0.0);
    CHECK(curve.points[i].precision <= 1.0);
  }
}

TEST_CASE("AP is invariant under strictly increasing score transforms") {
  Rng rng(34);
  std::vector<Detection> dets;
  std::vector<ObjectAnnotation> gts;
  for (int i = 0; i < 15; ++i) {
    dets.push_back(det(ObjectClass::reef_ring, rng.uniform(-5, 5),
                       rng.uniform(-5, 5), rng.uniform(0.1, 1.0)));
    if (i < 9)
      gts.push_back(gt(ObjectClass::reef_ring, rng.uniform(-5, 5),
                       rng.uniform(-5, 5)));
  }
  const EvalReport before = evaluate_scenes({dets}, {gts}, 1.0);

  std::vector<Detection> rescored = dets;
  for (Detection& d : rescored) d.score = 0.05 + 0.5 * d.score;  // monotone
  const EvalReport after = evaluate_scenes({rescored}, {gts}, 1.0);
  CHECK(before.map == after.map);
  for (int c = 0; c < kClassCount; ++c)
    CHECK(before.per_class[c].ap == after.per_class[c].ap);
}

TEST_CASE("a lowest-score false positive never raises AP") {
  Rng rng(35);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Detection> dets;
    std::vector<ObjectAnnotation> gts;
    for (int i = 0; i < 6; ++i)
      gts.push_back(gt(ObjectClass::reef_cone, 3.0 * i, 0));
    double score = 0.9;
    for (int i = 0; i < 5; ++i) {
      score -= 0.05;
      if (rng.uniform() < 0.7)
        dets.push_back(det(ObjectClass::reef_cone, 3.0 * i, 0.1, score));
      else
        dets.push_back(det(ObjectClass::reef_cone, 3.0 * i + 1.5, 0, score));
    }
    const double before =
        *evaluate_scenes({dets}, {gts}, 0.5).per_class[1].ap;
    dets.push_back(det(ObjectClass::reef_cone, 100, 100, 0.01));
    const double after = *evaluate_scenes({dets}, {gts}, 0.5).per_class[1].ap;
    CHECK(after <= before + 1e-12);
  }
}

TEST_CASE("evaluate_scenes mirrors the report table shape") {
  std::vector<std::vector<ObjectAnnotation>> gts(2);
  gts[0] = {gt(ObjectClass::reef_ring, 1, 1), gt(ObjectClass::reef_cone, 5, 5)};
  gts[1] = {gt(ObjectClass::tetrapod_b, 2, 2),
            gt(ObjectClass::tetrapod_s, 8, 8)};
  std::vector<std::vector<Detection>> dets(2);
  for (std::size_t s = 0; s < 2; ++s)
    for (const ObjectAnnotation& a : gts[s])
      dets[s].push_back({a.cls, a.center, a.yaw, 0.9});

  const EvalReport report = evaluate_scenes(dets, gts, 0.5);
  CHECK(report.map == doctest::Approx(1.0));
  CHECK(report.total_predictions == 4);
  CHECK(report.total_ground_truths == 4);
  for (int c = 0; c < kClassCount; ++c) {
    REQUIRE(report.per_class[c].ap.has_value());
    CHECK(*report.per_class[c].ap == doctest::Approx(1.0));
  }
  const std::string table = report.to_table_text();
  CHECK(table.find("mAP") != std::string::npos);
  CHECK(table.find("Predictions") != std::string::npos);
  CHECK(table.find("Reef_Ring") != std::string::npos);
  CHECK(table.find("Tetrapod_S") != std::string::npos);

  const EvalReport nothing = evaluate_scenes({{}, {}}, gts, 0.5);
  CHECK(nothing.map == 0.0);
}

TEST_CASE("classes without ground truth are excluded from mAP") {
  std::vector<std::vector<ObjectAnnotation>> gts = {
      {gt(ObjectClass::reef_ring, 0, 0)}};
  std::vector<std::vector<Detection>> dets = {
      {det(ObjectClass::reef_ring, 0, 0, 0.9)}};
  const EvalReport report = evaluate_scenes(dets, gts, 0.5);
  CHECK(report.map == doctest::Approx(1.0));
  CHECK_FALSE(report.per_class[static_cast<int>(ObjectClass::reef_cone)]
                  .ap.has_value());
}

TEST_CASE("evaluate_dataset pairs scene files and flags strays") {
  test::TempDir pred("pred");
  test::TempDir gt_dir("gt");

  const std::vector<ObjectAnnotation> anns = {gt(ObjectClass::reef_ring, 1, 1)};
  save_annotations(anns, gt_dir.path() / "scene_0000.json");
  std::vector<Detection> dets = {det(ObjectClass::reef_ring, 1, 1, 0.95)};
  save_detections(dets, pred.path() / "scene_0000.json");

  const auto reports =
      evaluate_dataset(pred.path(), gt_dir.path(), {0.5, 1.0});
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].map == doctest::Approx(1.0));
  CHECK(reports[0].dist_threshold == 0.5);
  CHECK(reports[1].dist_threshold == 1.0);

  save_annotations(anns, gt_dir.path() / "scene_0001.json");
  CHECK_THROWS_WITH_AS(evaluate_dataset(pred.path(), gt_dir.path(), {0.5}),
                       doctest::Contains("scene_0001"), IoError);
}

TEST_CASE("3d distance mode separates stacked centers") {
  const std::vector<ObjectAnnotation> gts = {gt(ObjectClass::reef_cone, 0, 0)};
  std::vector<Detection> dets = {det(ObjectClass::reef_cone, 0, 0, 0.9)};
  dets[0].center.z() = 2.0;  // same footprint, far in z
  const MatchSet horizontal =
      match(dets, gts, ObjectClass::reef_cone, 0.5, false);
  CHECK(horizontal.detections[0].second.has_value());
  const MatchSet full3d = match(dets, gts, ObjectClass::reef_cone, 0.5, true);
  CHECK_FALSE(full3d.detections[0].second.has_value());
}

TEST_SUITE_END();
