#pragma once

#include "reefscan/rng.hpp"
#include "reefscan/types.hpp"

#include <atomic>
#include <filesystem>
#include <string>

#include <unistd.h>

namespace reefscan::test {

inline PointCloud random_cloud(std::size_t n, Rng& rng, double extent = 10.0) {
  PointCloud cloud;
  cloud.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    cloud.emplace_back(rng.uniform(-extent, extent),
                       rng.uniform(-extent, extent),
                       rng.uniform(-extent, extent));
  }
  return cloud;
}

inline RigidTransform random_transform(Rng& rng, double max_translation = 2.0) {
  const Eigen::Vector3d axis =
      Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized();
  const double angle = rng.uniform(0.0, 3.1);
  RigidTransform t;
  t.rotation = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
  t.translation = Eigen::Vector3d(rng.uniform(-max_translation, max_translation),
                                  rng.uniform(-max_translation, max_translation),
                                  rng.uniform(-max_translation, max_translation));
  return t;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("reefscan_" + tag + "_" + std::to_string(counter.fetch_add(1)) +
             "_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace reefscan::test
