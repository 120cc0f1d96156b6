#pragma once

#include "reefscan/config.hpp"
#include "reefscan/types.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace reefscan::eval {

// Per-class greedy matching result: detections in descending score order,
// each with the matched ground-truth id or nothing (false positive).
struct MatchSet {
  ObjectClass cls = ObjectClass::reef_ring;
  std::vector<std::pair<Detection, std::optional<std::size_t>>> detections;
  std::size_t ground_truth_count = 0;
};

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

struct PRCurve {
  ObjectClass cls = ObjectClass::reef_ring;
  double dist_threshold = 0.0;
  std::vector<PrPoint> points;
};

struct ClassResult {
  std::size_t ground_truths = 0;
  std::size_t predictions = 0;
  std::optional<double> ap;  // unset when the class has no ground truths
};

struct EvalReport {
  double dist_threshold = 0.0;
  bool horizontal_distance = true;
  std::array<ClassResult, kClassCount> per_class{};
  double map = 0.0;
  std::size_t total_predictions = 0;
  std::size_t total_ground_truths = 0;

  std::string to_json_text() const;
  std::string to_table_text() const;  // mAP | Predictions | per-class AP
};

// Greedy center-distance matching in descending score order: a detection
// matches the nearest unmatched same-class ground truth within
// dist_threshold. Distances are horizontal (x, y) unless use_3d.
MatchSet match(const std::vector<Detection>& detections,
               const std::vector<ObjectAnnotation>& annotations,
               ObjectClass cls, double dist_threshold, bool use_3d = false);

PRCurve pr_curve(const MatchSet& matches);

// Area under the precision envelope, 101-point interpolation over
// recall in [0, 1].
double average_precision(const PRCurve& curve);

EvalReport evaluate_scenes(
    const std::vector<std::vector<Detection>>& detections,
    const std::vector<std::vector<ObjectAnnotation>>& annotations,
    double dist_threshold, bool use_3d = false);

// Pairs prediction and ground-truth files by stem (*.json in both
// directories); a stem present on one side only is an error listing it.
// Returns one report per requested threshold.
std::vector<EvalReport> evaluate_dataset(const std::filesystem::path& pred_dir,
                                         const std::filesystem::path& gt_dir,
                                         const std::vector<double>& thresholds,
                                         bool use_3d = false);

}  // namespace reefscan::eval
