#include "reefscan/evaluate.hpp"

#include "reefscan/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

namespace reefscan::eval {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double center_distance(const Point3& a, const Point3& b, bool use_3d) {
  if (use_3d) return (a - b).norm();
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  return std::sqrt(dx * dx + dy * dy);
}

// Total order making the sweep independent of input order.
bool score_order(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.center.x() != b.center.x()) return a.center.x() < b.center.x();
  if (a.center.y() != b.center.y()) return a.center.y() < b.center.y();
  return a.center.z() < b.center.z();
}

}  // namespace

MatchSet match(const std::vector<Detection>& detections,
               const std::vector<ObjectAnnotation>& annotations,
               ObjectClass cls, double dist_threshold, bool use_3d) {
  MatchSet out;
  out.cls = cls;

  std::vector<Detection> dets;
  for (const Detection& d : detections)
    if (d.cls == cls) dets.push_back(d);
  std::sort(dets.begin(), dets.end(), score_order);

  std::vector<std::size_t> gt_ids;
  for (std::size_t i = 0; i < annotations.size(); ++i)
    if (annotations[i].cls == cls) gt_ids.push_back(i);
  out.ground_truth_count = gt_ids.size();

  std::vector<bool> taken(gt_ids.size(), false);
  for (const Detection& d : dets) {
    std::size_t best = gt_ids.size();
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < gt_ids.size(); ++k) {
      if (taken[k]) continue;
      const double dist =
          center_distance(d.center, annotations[gt_ids[k]].center, use_3d);
      if (dist <= dist_threshold && dist < best_dist) {
        best_dist = dist;
        best = k;
      }
    }
    if (best < gt_ids.size()) {
      taken[best] = true;
      out.detections.emplace_back(d, gt_ids[best]);
    } else {
      out.detections.emplace_back(d, std::nullopt);
    }
  }
  return out;
}

PRCurve pr_curve(const MatchSet& matches) {
  PRCurve curve;
  curve.cls = matches.cls;
  std::size_t tp = 0, fp = 0;
  for (const auto& [det, matched] : matches.detections) {
    (void)det;
    if (matched)
      ++tp;
    else
      ++fp;
    if (matches.ground_truth_count == 0) continue;
    PrPoint point;
    point.recall =
        static_cast<double>(tp) /
        static_cast<double>(matches.ground_truth_count);
    point.precision =
        static_cast<double>(tp) / static_cast<double>(tp + fp);
    curve.points.push_back(point);
  }
  return curve;
}

double average_precision(const PRCurve& curve) {
  // Precision envelope sampled at 101 evenly spaced recall levels.
  double total = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double recall = static_cast<double>(i) / 100.0;
    double best = 0.0;
    for (const PrPoint& p : curve.points) {
      if (p.recall >= recall && p.precision > best) best = p.precision;
    }
    total += best;
  }
  return total / 101.0;
}

EvalReport evaluate_scenes(
    const std::vector<std::vector<Detection>>& detections,
    const std::vector<std::vector<ObjectAnnotation>>& annotations,
    double dist_threshold, bool use_3d) {
  if (detections.size() != annotations.size())
    throw std::invalid_argument(
        "evaluate_scenes: detection/annotation scene counts differ");

  EvalReport report;
  report.dist_threshold = dist_threshold;
  report.horizontal_distance = !use_3d;

  double ap_sum = 0.0;
  int ap_classes = 0;

  for (int c = 0; c < kClassCount; ++c) {
    const ObjectClass cls = static_cast<ObjectClass>(c);

    // Match per scene, then pool the sweep across scenes.
    struct SweepEntry {
      Detection det;
      std::size_t scene;
      bool tp;
    };
    std::vector<SweepEntry> pooled;
    std::size_t gt_total = 0;
    for (std::size_t s = 0; s < detections.size(); ++s) {
      const MatchSet m =
          match(detections[s], annotations[s], cls, dist_threshold, use_3d);
      gt_total += m.ground_truth_count;
      for (const auto& [det, matched] : m.detections)
        pooled.push_back({det, s, matched.has_value()});
    }
    std::sort(pooled.begin(), pooled.end(),
              [](const SweepEntry& a, const SweepEntry& b) {
                if (a.det.score != b.det.score) return a.det.score > b.det.score;
                if (a.scene != b.scene) return a.scene < b.scene;
                return score_order(a.det, b.det);
              });

    MatchSet pooled_set;
    pooled_set.cls = cls;
    pooled_set.ground_truth_count = gt_total;
    for (const SweepEntry& e : pooled) {
      pooled_set.detections.emplace_back(
          e.det, e.tp ? std::optional<std::size_t>(0) : std::nullopt);
    }

    ClassResult& result = report.per_class[c];
    result.ground_truths = gt_total;
    result.predictions = pooled.size();
    report.total_predictions += pooled.size();
    report.total_ground_truths += gt_total;
    if (gt_total > 0) {
      result.ap = average_precision(pr_curve(pooled_set));
      ap_sum += *result.ap;
      ++ap_classes;
    }
  }
  report.map = ap_classes > 0 ? ap_sum / ap_classes : 0.0;
  return report;
}

std::string EvalReport::to_json_text() const {
  json j;
  j["dist_threshold"] = dist_threshold;
  j["horizontal_distance"] = horizontal_distance;
  j["map"] = map;
  j["total_predictions"] = total_predictions;
  j["total_ground_truths"] = total_ground_truths;
  j["per_class"] = json::object();
  for (int c = 0; c < kClassCount; ++c) {
    const ClassResult& r = per_class[c];
    json cj = {{"ground_truths", r.ground_truths},
               {"predictions", r.predictions}};
    if (r.ap)
      cj["ap"] = *r.ap;
    else
      cj["ap"] = nullptr;
    j["per_class"][class_name(static_cast<ObjectClass>(c))] = cj;
  }
  return j.dump(2) + "\n";
}

std::string EvalReport::to_table_text() const {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-12s %-6s %-12s %-10s %-10s %-11s %-11s",
                "Model Type", "mAP", "Predictions", "Reef_Ring", "Reef_Cone",
                "Tetrapod_B", "Tetrapod_S");
  out << buf << "\n";
  auto ap_text = [](const std::optional<double>& ap) {
    char cell[32];
    if (ap)
      std::snprintf(cell, sizeof(cell), "%.2f", *ap);
    else
      std::snprintf(cell, sizeof(cell), "n/a");
    return std::string(cell);
  };
  std::snprintf(buf, sizeof(buf), "%-12s %-6.2f %-12zu %-10s %-10s %-11s %-11s",
                "Model-Based", map, total_predictions,
                ap_text(per_class[0].ap).c_str(),
                ap_text(per_class[1].ap).c_str(),
                ap_text(per_class[2].ap).c_str(),
                ap_text(per_class[3].ap).c_str());
  out << buf << "\n";
  return out.str();
}

std::vector<EvalReport> evaluate_dataset(const fs::path& pred_dir,
                                         const fs::path& gt_dir,
                                         const std::vector<double>& thresholds,
                                         bool use_3d) {
  const std::set<std::string> reserved = {"manifest", "run_manifest",
                                          "library", "report"};
  auto list_stems = [&](const fs::path& dir) {
    std::set<std::string> stems;
    if (!fs::is_directory(dir))
      throw IoError("not a directory: " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      if (entry.path().extension() != ".json") continue;
      const std::string stem = entry.path().stem().string();
      if (reserved.count(stem)) continue;
      stems.insert(stem);
    }
    return stems;
  };

  const std::set<std::string> pred_stems = list_stems(pred_dir);
  const std::set<std::string> gt_stems = list_stems(gt_dir);
  std::ostringstream missing;
  for (const std::string& s : gt_stems)
    if (!pred_stems.count(s)) missing << " " << s << " (missing prediction)";
  for (const std::string& s : pred_stems)
    if (!gt_stems.count(s)) missing << " " << s << " (missing ground truth)";
  if (!missing.str().empty())
    throw IoError("evaluate_dataset: unpaired scenes:" + missing.str());

  std::vector<std::vector<Detection>> detections;
  std::vector<std::vector<ObjectAnnotation>> annotations;
  for (const std::string& stem : gt_stems) {
    detections.push_back(load_detections(pred_dir / (stem + ".json")));
    annotations.push_back(load_annotations(gt_dir / (stem + ".json")));
  }

  std::vector<EvalReport> reports;
  reports.reserve(thresholds.size());
  for (const double threshold : thresholds)
    reports.push_back(
        evaluate_scenes(detections, annotations, threshold, use_3d));
  return reports;
}

}  // namespace reefscan::eval
