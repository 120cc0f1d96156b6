#include "reefscan/dataset.hpp"

#include "reefscan/cloud.hpp"
#include "reefscan/io.hpp"
#include "reefscan/parallel.hpp"
#include "reefscan/rng.hpp"
#include "reefscan/scanner.hpp"
#include "reefscan/scene_gen.hpp"
#include "reefscan/terrain.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace reefscan::sim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json counts_to_json(const std::array<int, kClassCount>& counts) {
  json j = json::object();
  for (int c = 0; c < kClassCount; ++c)
    j[class_name(static_cast<ObjectClass>(c))] = counts[c];
  return j;
}

std::array<int, kClassCount> counts_from_json(const json& j) {
  std::array<int, kClassCount> counts{};
  for (int c = 0; c < kClassCount; ++c)
    counts[c] = j.at(class_name(static_cast<ObjectClass>(c))).get<int>();
  return counts;
}

std::string scene_stem(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%04d", index);
  return buf;
}

}  // namespace

std::string DatasetManifest::to_json_text() const {
  json j;
  j["master_seed"] = master_seed;
  j["total_counts"] = counts_to_json(total_counts);
  j["scenes"] = json::array();
  for (const SceneRecord& s : scenes) {
    j["scenes"].push_back({{"cloud", s.cloud_file},
                           {"annotations", s.annotation_file},
                           {"seed", s.seed},
                           {"class_counts", counts_to_json(s.class_counts)}});
  }
  return j.dump(2) + "\n";
}

DatasetManifest DatasetManifest::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  DatasetManifest m;
  m.master_seed = j.at("master_seed").get<std::uint64_t>();
  m.total_counts = counts_from_json(j.at("total_counts"));
  for (const json& s : j.at("scenes")) {
    SceneRecord rec;
    rec.cloud_file = s.at("cloud").get<std::string>();
    rec.annotation_file = s.at("annotations").get<std::string>();
    rec.seed = s.at("seed").get<std::uint64_t>();
    rec.class_counts = counts_from_json(s.at("class_counts"));
    m.scenes.push_back(std::move(rec));
  }
  return m;
}

DatasetManifest DatasetManifest::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

Scene generate_scene(const Config& config, std::uint64_t scene_seed) {
  const TerrainField terrain = generate_terrain(
      config.scene.bounds(), config.terrain, derive_seed(scene_seed, 1));
  const std::vector<PlacedObject> placed = place_objects(
      terrain, config.scene, config.geometry, derive_seed(scene_seed, 2));
  Scene scene;
  scene.bounds = config.scene.bounds();
  scene.seed = scene_seed;
  scene.cloud = simulate_scan(terrain, placed, config.scanner, config.geometry,
                              derive_seed(scene_seed, 3));
  scene.annotations.reserve(placed.size());
  for (const PlacedObject& obj : placed)
    scene.annotations.push_back(obj.annotation);
  return scene;
}

DatasetManifest generate_dataset(const Config& config, int n_scenes,
                                 std::uint64_t master_seed,
                                 const fs::path& out_dir, int threads) {
  fs::create_directories(out_dir);

  DatasetManifest manifest;
  manifest.master_seed = master_seed;
  manifest.scenes.resize(static_cast<std::size_t>(std::max(n_scenes, 0)));

  parallel_for(manifest.scenes.size(), threads, [&](std::size_t i) {
    const std::uint64_t scene_seed = derive_seed(master_seed, i);
    const Scene scene = generate_scene(config, scene_seed);

    SceneRecord rec;
    rec.seed = scene_seed;
    rec.cloud_file = scene_stem(static_cast<int>(i)) + ".ply";
    rec.annotation_file = scene_stem(static_cast<int>(i)) + ".json";
    for (const ObjectAnnotation& a : scene.annotations)
      ++rec.class_counts[static_cast<int>(a.cls)];

    save_cloud(scene.cloud, out_dir / rec.cloud_file, CloudFormat::ply_binary);
    save_annotations(scene.annotations, out_dir / rec.annotation_file);
    manifest.scenes[i] = std::move(rec);
  });

  for (const SceneRecord& rec : manifest.scenes)
    for (int c = 0; c < kClassCount; ++c)
      manifest.total_counts[c] += rec.class_counts[c];

  write_file_atomic(out_dir / "manifest.json", manifest.to_json_text());
  return manifest;
}

}  // namespace reefscan::sim
