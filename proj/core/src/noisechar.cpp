#include "reefscan/noisechar.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace reefscan::noise {

namespace {

double mean_of(const std::vector<double>& v) {
  double sum = 0.0;
  for (const double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (const double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Linear-interpolated percentile over a sorted copy.
double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

Histogram make_histogram(const std::vector<double>& values) {
  Histogram hist;
  if (values.empty()) return hist;
  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *min_it, hi = *max_it;

  // Freedman-Diaconis bin width.
  const double iqr = percentile(values, 0.75) - percentile(values, 0.25);
  const double width =
      2.0 * iqr / std::cbrt(static_cast<double>(values.size()));

  std::size_t bins = 1;
  if (width > 0.0 && hi > lo)
    bins = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil((hi - lo) / width)), 1, 10000);

  hist.bin_left.resize(bins);
  hist.bin_right.resize(bins);
  hist.count.assign(bins, 0);
  const double step = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    hist.bin_left[b] = lo + step * static_cast<double>(b);
    hist.bin_right[b] = lo + step * static_cast<double>(b + 1);
  }
  for (const double x : values) {
    std::size_t b = step > 0.0
                        ? static_cast<std::size_t>((x - lo) / step)
                        : 0;
    if (b >= bins) b = bins - 1;
    ++hist.count[b];
  }
  return hist;
}

NoiseStats stats_of(const std::vector<double>& values, bool trimmed,
                    double trim_k) {
  NoiseStats s;
  s.n = values.size();
  s.trimmed = trimmed;
  s.trim_k = trim_k;
  if (values.empty()) return s;
  s.mu = mean_of(values);
  s.sigma = sample_std(values, s.mu);
  if (values.size() >= 20) {
    const SkewnessTest test = skewness_test(values);
    s.skew_statistic = test.statistic;
    s.skew_p_value = test.p_value;
    s.skew_normal_at_05 = test.normal_at_05;
  }
  return s;
}

}  // namespace

std::string Histogram::to_csv() const {
  std::ostringstream out;
  out << "bin_left,bin_right,count\n";
  for (std::size_t i = 0; i < count.size(); ++i)
    out << bin_left[i] << "," << bin_right[i] << "," << count[i] << "\n";
  return out.str();
}

std::vector<double> point_to_plane(const PointCloud& cloud,
                                   const detect::PlaneModel& plane) {
  std::vector<double> distances;
  distances.reserve(cloud.size());
  for (const Point3& p : cloud) distances.push_back(plane.signed_distance(p));
  return distances;
}

std::pair<std::vector<double>, std::size_t> zscore_trim(
    const std::vector<double>& values, double k) {
  if (values.size() < 2)
    throw std::invalid_argument("zscore_trim: need at least 2 values");
  if (k <= 0.0) throw std::invalid_argument("zscore_trim: k must be > 0");

  const double mean = mean_of(values);
  const double std_dev = sample_std(values, mean);
  if (std_dev == 0.0) return {values, 0};

  std::vector<double> kept;
  kept.reserve(values.size());
  for (const double v : values) {
    if (std::abs(v - mean) / std_dev <= k) kept.push_back(v);
  }
  const std::size_t removed = values.size() - kept.size();
  return {std::move(kept), removed};
}

SkewnessTest skewness_test(const std::vector<double>& values) {
  const double n = static_cast<double>(values.size());
  if (values.size() < 20)
    throw std::invalid_argument(
        "skewness_test: needs n >= 20 for the normal approximation");

  const double mean = mean_of(values);
  double m2 = 0.0, m3 = 0.0;
  for (const double v : values) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;

  SkewnessTest out;
  if (m2 <= 0.0) {
    out.statistic = 0.0;
    out.p_value = 1.0;
    out.normal_at_05 = true;
    return out;
  }

  const double g1 = m3 / std::pow(m2, 1.5);
  const double y = g1 * std::sqrt((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0)));
  const double beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) *
                       (n + 3.0) /
                       ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
  const double w2 = -1.0 + std::sqrt(2.0 * (beta2 - 1.0));
  const double delta = 1.0 / std::sqrt(std::log(std::sqrt(w2)));
  const double alpha = std::sqrt(2.0 / (w2 - 1.0));

  out.statistic = delta * std::asinh(y / alpha);
  out.p_value = std::erfc(std::abs(out.statistic) / std::sqrt(2.0));
  out.normal_at_05 = out.p_value >= 0.05;
  return out;
}

CharacterizeResult characterize(const PointCloud& cloud,
                                const RansacParams& ransac, double trim_k,
                                std::uint64_t seed) {
  CharacterizeResult result;
  result.plane =
      detect::ransac_plane(cloud, ransac.iterations, ransac.inlier_dist, seed);
  const std::vector<double> distances = point_to_plane(cloud, result.plane);

  result.raw = stats_of(distances, /*trimmed=*/false, trim_k);
  result.raw_hist = make_histogram(distances);

  const auto [kept, removed] = zscore_trim(distances, trim_k);
  (void)removed;
  result.trimmed = stats_of(kept, /*trimmed=*/true, trim_k);
  result.trimmed_hist = make_histogram(kept);
  return result;
}

}  // namespace reefscan::noise
