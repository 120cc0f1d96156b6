#include <doctest.h>

#include "reefscan/cloud.hpp"
#include "reefscan/config.hpp"
#include "reefscan/io.hpp"
#include "reefscan/rng.hpp"
#include "reefscan/types.hpp"
#include "support/helpers.hpp"

#include <algorithm>
#include <fstream>
#include <numbers>

using namespace reefscan;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_SUITE_BEGIN("core");

TEST_CASE("load_cloud reads whitespace xyz") {
  test::TempDir dir("xyz");
  const fs::path file = dir.path() / "tri.xyz";
  write_text(file, "0 0 0\n1 0 0\n0 1 0\n");
  const PointCloud cloud = load_cloud(file);
  REQUIRE(cloud.size() == 3);
  CHECK(cloud[1] == Point3(1, 0, 0));
  CHECK(cloud[2] == Point3(0, 1, 0));
}

TEST_CASE("load_cloud accepts empty ply") {
  test::TempDir dir("ply0");
  const fs::path file = dir.path() / "empty.ply";
  write_text(file,
             "ply\nformat ascii 1.0\nelement vertex 0\n"
             "property float x\nproperty float y\nproperty float z\n"
             "end_header\n");
  CHECK(load_cloud(file).empty());
}

TEST_CASE("load_cloud rejects non-finite records with the line number") {
  test::TempDir dir("nan");
  const fs::path file = dir.path() / "bad.xyz";
  write_text(file, "0 0 0\n1 2 NaN\n");
  CHECK_THROWS_WITH_AS(load_cloud(file),
                       doctest::Contains(":2:"), ParseError);
}

TEST_CASE("load_cloud reports malformed ply header") {
  test::TempDir dir("plybad");
  const fs::path file = dir.path() / "bad.ply";
  write_text(file, "ply\nformat ascii 1.0\nelephant vertex 3\nend_header\n");
  CHECK_THROWS_AS(load_cloud(file), ParseError);
}

TEST_CASE("load_cloud reads float32 binary ply (external interchange)") {
  test::TempDir dir("plyf32");
  const fs::path file = dir.path() / "f32.ply";
  {
    std::ofstream out(file, std::ios::binary);
    out << "ply\nformat binary_little_endian 1.0\nelement vertex 2\n"
           "property float x\nproperty float y\nproperty float z\n"
           "end_header\n";
    const float data[6] = {1.5f, -2.0f, 0.25f, 4.0f, 5.0f, 6.0f};
    out.write(reinterpret_cast<const char*>(data), sizeof(data));
  }
  const PointCloud cloud = load_cloud(file);
  REQUIRE(cloud.size() == 2);
  CHECK(cloud[0] == Point3(1.5, -2.0, 0.25));
  CHECK(cloud[1] == Point3(4.0, 5.0, 6.0));
}

TEST_CASE("binary ply round trip is bit exact") {
  test::TempDir dir("rt");
  Rng rng(11);
  const PointCloud cloud = test::random_cloud(1000, rng, 100.0);
  const fs::path file = dir.path() / "cloud.ply";
  save_cloud(cloud, file, CloudFormat::ply_binary);
  const PointCloud back = load_cloud(file);
  REQUIRE(back.size() == cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    CHECK(back[i].x() == cloud[i].x());
    CHECK(back[i].y() == cloud[i].y());
    CHECK(back[i].z() == cloud[i].z());
  }
}

TEST_CASE("text cloud formats round trip within 1e-6") {
  test::TempDir dir("rt_text");
  Rng rng(12);
  const PointCloud cloud = test::random_cloud(200, rng, 50.0);
  for (const CloudFormat fmt : {CloudFormat::ply_ascii, CloudFormat::xyz}) {
    const fs::path file =
        dir.path() / (fmt == CloudFormat::xyz ? "c.xyz" : "c.ply");
    save_cloud(cloud, file, fmt);
    const PointCloud back = load_cloud(file);
    REQUIRE(back.size() == cloud.size());
    double max_err = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i)
      max_err = std::max(max_err, (back[i] - cloud[i]).cwiseAbs().maxCoeff());
    CHECK(max_err <= 1e-6);
  }
}

TEST_CASE("saving an empty cloud produces a loadable file") {
  test::TempDir dir("empty");
  for (const CloudFormat fmt :
       {CloudFormat::ply_binary, CloudFormat::ply_ascii, CloudFormat::xyz}) {
    const fs::path file = dir.path() / "e.out";
    save_cloud({}, file, fmt);
    CHECK(load_cloud(file).empty());
  }
}

TEST_CASE("annotation files round trip") {
  test::TempDir dir("ann");
  const fs::path file = dir.path() / "a.json";

  SUBCASE("single record") {
    const std::vector<ObjectAnnotation> one = {
        {ObjectClass::tetrapod_b, Point3(1, 2, 0.5), 0.0}};
    save_annotations(one, file);
    const auto back = load_annotations(file);
    REQUIRE(back.size() == 1);
    CHECK(back[0].cls == ObjectClass::tetrapod_b);
    CHECK(back[0].center == Point3(1, 2, 0.5));
    CHECK(back[0].yaw == 0.0);
  }

  SUBCASE("empty list") {
    save_annotations({}, file);
    CHECK(load_annotations(file).empty());
  }

  SUBCASE("random round trip is lossless") {
    Rng rng(5);
    std::vector<ObjectAnnotation> items;
    for (int i = 0; i < 64; ++i) {
      items.push_back({static_cast<ObjectClass>(rng.uniform_index(4)),
                       Point3(rng.uniform(-20, 20), rng.uniform(-20, 20),
                              rng.uniform(-1, 1)),
                       rng.uniform(0.0, 2.0 * std::numbers::pi)});
    }
    save_annotations(items, file);
    const auto back = load_annotations(file);
    REQUIRE(back.size() == items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      CHECK(back[i].cls == items[i].cls);
      CHECK(back[i].center == items[i].center);
      CHECK(back[i].yaw == items[i].yaw);
    }
  }
}

TEST_CASE("unknown class names are rejected listing the legal ones") {
  test::TempDir dir("badclass");
  const fs::path file = dir.path() / "a.json";
  write_text(file,
             R"([{"class": "tetrapod_x", "center": [0,0,0], "yaw": 0}])");
  CHECK_THROWS_WITH_AS(load_annotations(file),
                       doctest::Contains("tetrapod_s"), ParseError);
}

TEST_CASE("detection files carry scores") {
  test::TempDir dir("det");
  const fs::path file = dir.path() / "d.json";
  const std::vector<Detection> dets = {
      {ObjectClass::reef_cone, Point3(3, 4, 0.2), 1.0, 0.93}};
  save_detections(dets, file);
  const auto back = load_detections(file);
  REQUIRE(back.size() == 1);
  CHECK(back[0].score == dets[0].score);

  write_text(file, R"([{"class": "reef_cone", "center": [0,0,0], "yaw": 0}])");
  CHECK_THROWS_AS(load_detections(file), ParseError);
}

TEST_CASE("apply_transform basics") {
  const PointCloud cloud = {Point3(0, 0, 0), Point3(1, 0, 0)};

  CHECK(apply_transform(cloud, RigidTransform::identity()) == cloud);

  const auto shifted = apply_transform(
      cloud, RigidTransform::from_translation(Point3(1, 0, 0)));
  CHECK(shifted[0] == Point3(1, 0, 0));

  const auto rotated = apply_transform(
      cloud, RigidTransform::yaw_about_z(std::numbers::pi / 2));
  CHECK((rotated[1] - Point3(0, 1, 0)).norm() < 1e-9);
}

TEST_CASE("transform inverse restores the cloud within 1e-9") {
  Rng rng(7);
  const PointCloud cloud = test::random_cloud(200, rng, 20.0);
  for (int trial = 0; trial < 20; ++trial) {
    const RigidTransform t = test::random_transform(rng);
    CHECK(t.is_rigid(1e-9));
    const PointCloud back =
        apply_transform(apply_transform(cloud, t), t.inverse());
    for (std::size_t i = 0; i < cloud.size(); ++i)
      CHECK((back[i] - cloud[i]).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("tile_scene partitions a uniform cloud") {
  Rng rng(3);
  PointCloud cloud;
  for (int i = 0; i < 4000; ++i)
    cloud.emplace_back(rng.uniform(0, 100), rng.uniform(0, 100), 0.0);
  const auto tiles = tile_scene(cloud, 50.0, 1);
  CHECK(tiles.size() == 4);
  std::size_t total = 0;
  for (const auto& t : tiles) total += t.size();
  CHECK(total == cloud.size());
}

TEST_CASE("tile_scene of empty cloud is empty") {
  CHECK(tile_scene({}, 10.0, 1).empty());
}

TEST_CASE("tile_scene min_points keeps only the corner cluster") {
  Rng rng(4);
  PointCloud cloud;
  for (int i = 0; i < 500; ++i)
    cloud.emplace_back(rng.uniform(0, 10), rng.uniform(0, 10), 0.0);
  // sparse stragglers elsewhere
  cloud.emplace_back(55.0, 5.0, 0.0);
  cloud.emplace_back(95.0, 95.0, 0.0);

  // Brute-force count of the densest 20 m tile anchored at the cloud min.
  const auto tiles = tile_scene(cloud, 20.0, 100);
  REQUIRE(tiles.size() == 1);
  std::size_t expected = 0;
  for (const Point3& p : cloud)
    if (p.x() < 20.0 && p.y() < 20.0) ++expected;
  CHECK(tiles[0].size() == expected);
}

TEST_CASE("tile_scene boundary points go to the lower tile") {
  const PointCloud cloud = {Point3(0, 0, 0), Point3(50, 0, 0),
                            Point3(100, 0, 0)};
  const auto tiles = tile_scene(cloud, 50.0, 1);
  REQUIRE(tiles.size() == 2);
  // x = 50 sits on the shared edge and belongs to the first tile; x = 100
  // terminates the last tile and stays in it.
  CHECK(tiles[0].size() == 2);
  CHECK(tiles[1].size() == 1);
}

TEST_CASE("centroid basics and statistics") {
  CHECK(centroid({Point3(0, 0, 0), Point3(2, 0, 0)}) == Point3(1, 0, 0));
  CHECK(centroid({Point3(4, 5, 6)}) == Point3(4, 5, 6));
  CHECK_THROWS_AS(centroid({}), std::invalid_argument);

  Rng rng(9);
  PointCloud cloud;
  for (int i = 0; i < 10000; ++i)
    cloud.emplace_back(rng.uniform(), rng.uniform(), rng.uniform());
  const Point3 c = centroid(cloud);
  CHECK((c - Point3(0.5, 0.5, 0.5)).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("centroid is permutation invariant") {
  Rng rng(10);
  PointCloud cloud = test::random_cloud(500, rng, 30.0);
  const Point3 before = centroid(cloud);
  // deterministic shuffle
  for (std::size_t i = cloud.size(); i > 1; --i)
    std::swap(cloud[i - 1], cloud[rng.uniform_index(i)]);
  CHECK((centroid(cloud) - before).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("config rejects unknown keys with their path") {
  CHECK_THROWS_WITH_AS(Config::from_json_text(R"({"scanner": {"beams": 64}})"),
                       doctest::Contains("scanner.beams"), ConfigError);
  CHECK_THROWS_AS(Config::from_json_text(R"({"sonar": {}})"), ConfigError);
}

TEST_CASE("config enforces invariants") {
  CHECK_THROWS_AS(
      Config::from_json_text(R"({"scanner": {"beam_count": 2000}})"),
      ConfigError);
  CHECK_THROWS_AS(
      Config::from_json_text(R"({"scanner": {"beam_count": 0}})"),
      ConfigError);
  CHECK_THROWS_AS(
      Config::from_json_text(R"({"detect": {"stride_fraction": 0.0}})"),
      ConfigError);
  CHECK_NOTHROW(
      Config::from_json_text(R"({"scanner": {"beam_count": 1024}})"));
}

TEST_CASE("config overrides follow flag > file > default precedence") {
  Config c = Config::from_json_text(R"({"scanner": {"beam_count": 128}})");
  CHECK(c.scanner.beam_count == 128);
  c.apply_override("scanner.beam_count=512");
  CHECK(c.scanner.beam_count == 512);
  c.apply_override("scanner.direction_mode=both");
  CHECK(c.scanner.direction_mode == ScanDirection::both);
  CHECK_THROWS_AS(c.apply_override("scanner.nope=1"), ConfigError);
  CHECK_THROWS_AS(c.apply_override("scanner.beam_count=9999"), ConfigError);

  // Round trip through text keeps every field.
  const Config copy = Config::from_json_text(c.to_json_text());
  CHECK(copy.scanner.beam_count == 512);
  CHECK(copy.scanner.direction_mode == ScanDirection::both);
}

TEST_SUITE_END();
