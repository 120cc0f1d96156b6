#pragma once

#include "reefscan/ransac.hpp"
#include "reefscan/types.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace reefscan::noise {

struct NoiseStats {
  double mu = 0.0;
  double sigma = 0.0;
  std::size_t n = 0;
  double skew_statistic = 0.0;
  double skew_p_value = 1.0;
  bool skew_normal_at_05 = true;
  bool trimmed = false;
  double trim_k = 0.0;
};

struct Histogram {
  std::vector<double> bin_left;
  std::vector<double> bin_right;
  std::vector<std::size_t> count;

  std::string to_csv() const;  // bin_left,bin_right,count
};

struct CharacterizeResult {
  detect::PlaneModel plane;
  NoiseStats raw;
  NoiseStats trimmed;
  Histogram raw_hist;
  Histogram trimmed_hist;
};

// Signed orthogonal distance of each point to the plane.
std::vector<double> point_to_plane(const PointCloud& cloud,
                                   const detect::PlaneModel& plane);

// Single-pass Z-score trim: drops values with |v - mean| / std > k, using
// the untrimmed mean and (sample) std. Zero variance returns the input
// unchanged.
std::pair<std::vector<double>, std::size_t> zscore_trim(
    const std::vector<double>& values, double k);

struct SkewnessTest {
  double statistic = 0.0;
  double p_value = 1.0;
  bool normal_at_05 = true;
};

// Skewness z-test for normality (transformed sample skewness, two-sided
// p-value). Requires n >= 20; throws std::invalid_argument below that.
SkewnessTest skewness_test(const std::vector<double>& values);

// Full appendix-style procedure over a near-planar patch: RANSAC plane,
// point-to-plane distances, raw stats, Z-score trim, trimmed stats, and
// histogram bins (Freedman-Diaconis) for both distributions.
CharacterizeResult characterize(const PointCloud& cloud,
                                const RansacParams& ransac, double trim_k,
                                std::uint64_t seed = 0);

}  // namespace reefscan::noise
