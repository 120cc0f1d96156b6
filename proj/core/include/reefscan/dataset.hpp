#pragma once

#include "reefscan/config.hpp"
#include "reefscan/types.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace reefscan::sim {

struct SceneRecord {
  std::string cloud_file;
  std::string annotation_file;
  std::uint64_t seed = 0;
  std::array<int, kClassCount> class_counts{0, 0, 0, 0};
};

struct DatasetManifest {
  std::uint64_t master_seed = 0;
  std::vector<SceneRecord> scenes;
  std::array<int, kClassCount> total_counts{0, 0, 0, 0};

  std::string to_json_text() const;
  static DatasetManifest from_json_text(const std::string& text);
  static DatasetManifest load(const std::filesystem::path& path);
};

// Builds one scene from its seed (terrain, placement and scan streams are
// split from it).
Scene generate_scene(const Config& config, std::uint64_t scene_seed);

// Writes n scenes (scene_####.ply + scene_####.json) plus manifest.json
// under out_dir. Per-scene seeds derive from master_seed, so the dataset
// is reproducible file-by-file. threads > 1 parallelizes over scenes
// without changing any output byte.
DatasetManifest generate_dataset(const Config& config, int n_scenes,
                                 std::uint64_t master_seed,
                                 const std::filesystem::path& out_dir,
                                 int threads = 1);

}  // namespace reefscan::sim
