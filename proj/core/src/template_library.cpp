#include "reefscan/template_library.hpp"

#include "reefscan/cloud.hpp"
#include "reefscan/io.hpp"
#include "reefscan/scanner.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace reefscan::templates {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flat floor patch under the posed mesh, the virtual analogue of the
// seabed around a lone object.
geom::TriangleMesh make_floor(const geom::Aabb& box, double extent) {
  geom::TriangleMesh floor;
  const double x0 = box.min.x() - extent, x1 = box.max.x() + extent;
  const double y0 = box.min.y() - extent, y1 = box.max.y() + extent;
  floor.vertices = {Point3(x0, y0, 0), Point3(x1, y0, 0), Point3(x1, y1, 0),
                    Point3(x0, y1, 0)};
  floor.triangles = {{0, 1, 2}, {0, 2, 3}};
  return floor;
}

ScannerConfig template_scanner(const ScannerConfig& scanner,
                               ScanDirection direction) {
  ScannerConfig cfg = scanner;
  cfg.noise_sigma = 0.0;
  cfg.dropout_prob = 0.0;
  cfg.direction_mode = direction;
  return cfg;
}

PointCloud scan_posed_mesh(const geom::TriangleMesh& posed,
                           const ScannerConfig& scanner,
                           const TemplateConfig& tmpl,
                           ScanDirection direction) {
  const geom::Aabb box = geom::mesh_aabb(posed);
  geom::Bvh scene;
  scene.add_mesh(make_floor(box, tmpl.floor_extent));
  scene.add_mesh(posed);
  scene.build();

  const Rect bounds{box.min.x() - tmpl.floor_extent,
                    box.min.y() - tmpl.floor_extent,
                    box.max.x() + tmpl.floor_extent,
                    box.max.y() + tmpl.floor_extent};
  PointCloud cloud =
      sim::simulate_scan(scene, bounds, template_scanner(scanner, direction), 0);

  // Keep object returns only.
  PointCloud object_points;
  for (const Point3& p : cloud) {
    if (p.z() > tmpl.floor_margin) object_points.push_back(p);
  }
  return object_points;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::vector<const Template*> TemplateLibrary::of_class(ObjectClass cls) const {
  std::vector<const Template*> out;
  for (const Template& t : templates) {
    if (t.cls == cls) out.push_back(&t);
  }
  return out;
}

Template build_template(const geom::TriangleMesh& mesh, ObjectClass cls,
                        double yaw, const ScannerConfig& scanner,
                        const TemplateConfig& tmpl,
                        const MeshParams& geometry) {
  (void)geometry;
  const geom::TriangleMesh posed =
      geom::transform_mesh(mesh, RigidTransform::yaw_about_z(yaw));
  PointCloud cloud = scan_posed_mesh(posed, scanner, tmpl, ScanDirection::both);
  if (cloud.size() < 20) {
    std::ostringstream msg;
    msg << "build_template: only " << cloud.size() << " returns for "
        << class_name(cls)
        << "; object too small for the scan configuration";
    throw std::runtime_error(msg.str());
  }

  const Point3 center = centroid(cloud);
  for (Point3& p : cloud) p -= center;

  Template t;
  t.cls = cls;
  t.cloud = std::move(cloud);
  t.source_yaw = normalize_yaw(yaw);
  t.rmse_threshold = tmpl.rmse_threshold[static_cast<int>(cls)];
  t.min_points = std::max<std::size_t>(
      20, static_cast<std::size_t>(
              std::lround(tmpl.min_points_factor *
                          static_cast<double>(t.cloud.size()))));
  t.origin_offset = -center;  // mesh-frame origin in the centered cloud frame
  return t;
}

TemplateLibrary build_library(const Config& config) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  TemplateLibrary library;

  for (const ObjectClass cls : all_classes()) {
    const geom::TriangleMesh mesh = geom::make_mesh(cls, config.geometry);
    library.dims[static_cast<int>(cls)] = geom::class_dims(cls, config.geometry);

    const bool rotsym =
        cls == ObjectClass::reef_ring || cls == ObjectClass::reef_cone;
    const int yaw_count = rotsym ? config.templates.rotsym_yaw_count
                                 : config.templates.tetrapod_yaw_count;

    std::size_t class_min_points = 0;
    for (int k = 0; k < yaw_count; ++k) {
      const double yaw = two_pi * k / yaw_count;
      Template t = build_template(mesh, cls, yaw, config.scanner,
                                  config.templates, config.geometry);
      if (k == 0) {
        // Expected noiseless return count under the deployed direction
        // mode; its mean over {x, y, both} when the mode is random.
        double expected = static_cast<double>(t.cloud.size());
        if (config.scanner.direction_mode == ScanDirection::random) {
          const geom::TriangleMesh posed =
              geom::transform_mesh(mesh, RigidTransform::yaw_about_z(yaw));
          double total = 0.0;
          for (const ScanDirection d :
               {ScanDirection::x, ScanDirection::y, ScanDirection::both}) {
            total += static_cast<double>(
                scan_posed_mesh(posed, config.scanner, config.templates, d)
                    .size());
          }
          expected = total / 3.0;
        } else if (config.scanner.direction_mode != ScanDirection::both) {
          const geom::TriangleMesh posed =
              geom::transform_mesh(mesh, RigidTransform::yaw_about_z(yaw));
          expected = static_cast<double>(
              scan_posed_mesh(posed, config.scanner, config.templates,
                              config.scanner.direction_mode)
                  .size());
        }
        class_min_points = std::max<std::size_t>(
            20, static_cast<std::size_t>(std::lround(
                    config.templates.min_points_factor * expected)));
      }
      t.min_points = class_min_points;
      library.templates.push_back(std::move(t));
    }
  }

  Config fingerprint_cfg = config;
  const std::string fingerprint_basis =
      fingerprint_cfg.to_json_text(-1);  // full generation config snapshot
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(fingerprint_basis)));
  library.fingerprint = buf;
  return library;
}

void save_library(const TemplateLibrary& library, const fs::path& dir) {
  fs::create_directories(dir);
  json meta;
  meta["fingerprint"] = library.fingerprint;
  meta["dims"] = json::object();
  for (int c = 0; c < kClassCount; ++c) {
    meta["dims"][class_name(static_cast<ObjectClass>(c))] = {
        {"height", library.dims[c].height},
        {"footprint_diameter", library.dims[c].footprint_diameter}};
  }
  meta["templates"] = json::array();
  std::array<int, kClassCount> counters{0, 0, 0, 0};
  for (const Template& t : library.templates) {
    const int k = counters[static_cast<int>(t.cls)]++;
    char name[64];
    std::snprintf(name, sizeof(name), "template_%s_%02d.ply",
                  class_name(t.cls).c_str(), k);
    save_cloud(t.cloud, dir / name, CloudFormat::ply_binary);
    meta["templates"].push_back(
        {{"file", name},
         {"class", class_name(t.cls)},
         {"yaw", t.source_yaw},
         {"rmse_threshold", t.rmse_threshold},
         {"min_points", t.min_points},
         {"origin_offset",
          {t.origin_offset.x(), t.origin_offset.y(), t.origin_offset.z()}}});
  }
  write_file_atomic(dir / "library.json", meta.dump(2) + "\n");
}

TemplateLibrary load_library(const fs::path& dir) {
  const fs::path meta_path = dir / "library.json";
  std::ifstream in(meta_path);
  if (!in) throw IoError("cannot open " + meta_path.string());
  json meta;
  try {
    meta = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(meta_path.string() + ": " + e.what());
  }

  TemplateLibrary library;
  library.fingerprint = meta.at("fingerprint").get<std::string>();
  for (int c = 0; c < kClassCount; ++c) {
    const json& d = meta.at("dims").at(class_name(static_cast<ObjectClass>(c)));
    library.dims[c].height = d.at("height").get<double>();
    library.dims[c].footprint_diameter =
        d.at("footprint_diameter").get<double>();
  }
  for (const json& jt : meta.at("templates")) {
    Template t;
    t.cls = class_from_name(jt.at("class").get<std::string>());
    t.cloud = load_cloud(dir / jt.at("file").get<std::string>());
    t.source_yaw = jt.at("yaw").get<double>();
    t.rmse_threshold = jt.at("rmse_threshold").get<double>();
    t.min_points = jt.at("min_points").get<std::size_t>();
    const json& o = jt.at("origin_offset");
    t.origin_offset =
        Point3(o[0].get<double>(), o[1].get<double>(), o[2].get<double>());
    if (t.cloud.empty())
      throw ParseError(meta_path.string() + ": template with empty cloud");
    library.templates.push_back(std::move(t));
  }
  return library;
}

}  // namespace reefscan::templates
