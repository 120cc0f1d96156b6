#include "reefscan/config.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace reefscan {

using nlohmann::json;

namespace {

const std::array<std::string, 4> kDirectionNames = {"x", "y", "both",
                                                    "random"};

json class_map(const std::array<double, kClassCount>& values) {
  json j = json::object();
  for (int i = 0; i < kClassCount; ++i)
    j[class_name(static_cast<ObjectClass>(i))] = values[i];
  return j;
}

json class_map(const std::array<int, kClassCount>& values) {
  json j = json::object();
  for (int i = 0; i < kClassCount; ++i)
    j[class_name(static_cast<ObjectClass>(i))] = values[i];
  return j;
}

template <typename T>
void class_map_from(const json& j, std::array<T, kClassCount>& out) {
  for (int i = 0; i < kClassCount; ++i)
    out[i] = j.at(class_name(static_cast<ObjectClass>(i))).get<T>();
}

json to_json(const Config& c) {
  json j;
  j["geometry"] = {
      {"resolution", c.geometry.resolution},
      {"ring_diameter", c.geometry.ring_diameter},
      {"ring_height", c.geometry.ring_height},
      {"cone_base_diameter", c.geometry.cone_base_diameter},
      {"cone_top_diameter", c.geometry.cone_top_diameter},
      {"cone_height", c.geometry.cone_height},
      {"cone_wall", c.geometry.cone_wall},
      {"tetrapod_height", c.geometry.tetrapod_height},
      {"tetrapod_s_scale", c.geometry.tetrapod_s_scale},
  };
  j["terrain"] = {
      {"octaves", c.terrain.octaves},
      {"base_amplitude", c.terrain.base_amplitude},
      {"base_wavelength", c.terrain.base_wavelength},
      {"persistence", c.terrain.persistence},
      {"lacunarity", c.terrain.lacunarity},
      {"grid_step", c.terrain.grid_step},
  };
  j["scene"] = {
      {"bounds_x", c.scene.bounds_x},
      {"bounds_y", c.scene.bounds_y},
      {"objects_per_scene", c.scene.objects_per_scene},
      {"class_counts", class_map(c.scene.class_counts)},
      {"min_separation", c.scene.min_separation},
      {"margin", c.scene.margin},
      {"sink_allowance", c.scene.sink_allowance},
      {"max_tilt_deg", c.scene.max_tilt_deg},
      {"max_attempts_per_object", c.scene.max_attempts_per_object},
  };
  j["scanner"] = {
      {"beam_count", c.scanner.beam_count},
      {"swath_half_angle_deg", c.scanner.swath_half_angle_deg},
      {"sensor_height", c.scanner.sensor_height},
      {"ping_spacing", c.scanner.ping_spacing},
      {"line_spacing", c.scanner.line_spacing},
      {"dropout_prob", c.scanner.dropout_prob},
      {"noise_sigma", c.scanner.noise_sigma},
      {"direction_mode", scan_direction_name(c.scanner.direction_mode)},
  };
  j["templates"] = {
      {"tetrapod_yaw_count", c.templates.tetrapod_yaw_count},
      {"rotsym_yaw_count", c.templates.rotsym_yaw_count},
      {"min_points_factor", c.templates.min_points_factor},
      {"floor_margin", c.templates.floor_margin},
      {"floor_extent", c.templates.floor_extent},
      {"rmse_threshold", class_map(c.templates.rmse_threshold)},
  };
  j["detect"] = {
      {"ransac",
       {{"iterations", c.detect.ransac.iterations},
        {"inlier_dist", c.detect.ransac.inlier_dist},
        {"clearance", c.detect.ransac.clearance}}},
      {"icp",
       {{"max_iterations", c.detect.icp.max_iterations},
        {"corr_dist_initial", c.detect.icp.corr_dist_initial},
        {"corr_dist_final", c.detect.icp.corr_dist_final},
        {"convergence_tol", c.detect.icp.convergence_tol}}},
      {"window_mode",
       c.detect.window_mode == WindowMode::per_class ? "per_class" : "global"},
      {"window_size_factor", c.detect.window_size_factor},
      {"global_window_size", c.detect.global_window_size},
      {"stride_fraction", c.detect.stride_fraction},
      {"nms_radius_factor", c.detect.nms_radius_factor},
      {"min_inlier_fraction", c.detect.min_inlier_fraction},
      {"min_height_fraction", c.detect.min_height_fraction},
      {"icp_abort_factor", c.detect.icp_abort_factor},
      {"free_space_dist", c.detect.free_space_dist},
      {"free_space_zmin", c.detect.free_space_zmin},
      {"free_space_max_fraction", c.detect.free_space_max_fraction},
      {"init_ground_band", c.detect.init_ground_band},
      {"rmse_threshold", class_map(c.detect.rmse_threshold)},
      {"min_points", class_map(c.detect.min_points)},
      {"seed", c.detect.seed},
  };
  j["evaluate"] = {
      {"dist_threshold", c.evaluate.dist_threshold},
      {"multi_thresholds", c.evaluate.multi_thresholds},
      {"use_multi", c.evaluate.use_multi},
      {"use_3d", c.evaluate.use_3d},
      {"map_gate", c.evaluate.map_gate},
  };
  j["tiling"] = {
      {"tile_size", c.tiling.tile_size},
      {"min_points", c.tiling.min_points},
  };
  j["noisechar"] = {
      {"trim_k", c.noisechar.trim_k},
  };
  return j;
}

Config from_json(const json& j) {
  Config c;
  const json& g = j.at("geometry");
  c.geometry.resolution = g.at("resolution").get<int>();
  c.geometry.ring_diameter = g.at("ring_diameter").get<double>();
  c.geometry.ring_height = g.at("ring_height").get<double>();
  c.geometry.cone_base_diameter = g.at("cone_base_diameter").get<double>();
  c.geometry.cone_top_diameter = g.at("cone_top_diameter").get<double>();
  c.geometry.cone_height = g.at("cone_height").get<double>();
  c.geometry.cone_wall = g.at("cone_wall").get<double>();
  c.geometry.tetrapod_height = g.at("tetrapod_height").get<double>();
  c.geometry.tetrapod_s_scale = g.at("tetrapod_s_scale").get<double>();

  const json& t = j.at("terrain");
  c.terrain.octaves = t.at("octaves").get<int>();
  c.terrain.base_amplitude = t.at("base_amplitude").get<double>();
  c.terrain.base_wavelength = t.at("base_wavelength").get<double>();
  c.terrain.persistence = t.at("persistence").get<double>();
  c.terrain.lacunarity = t.at("lacunarity").get<double>();
  c.terrain.grid_step = t.at("grid_step").get<double>();

  const json& s = j.at("scene");
  c.scene.bounds_x = s.at("bounds_x").get<double>();
  c.scene.bounds_y = s.at("bounds_y").get<double>();
  c.scene.objects_per_scene = s.at("objects_per_scene").get<int>();
  class_map_from(s.at("class_counts"), c.scene.class_counts);
  c.scene.min_separation = s.at("min_separation").get<double>();
  c.scene.margin = s.at("margin").get<double>();
  c.scene.sink_allowance = s.at("sink_allowance").get<double>();
  c.scene.max_tilt_deg = s.at("max_tilt_deg").get<double>();
  c.scene.max_attempts_per_object =
      s.at("max_attempts_per_object").get<int>();

  const json& sc = j.at("scanner");
  c.scanner.beam_count = sc.at("beam_count").get<int>();
  c.scanner.swath_half_angle_deg = sc.at("swath_half_angle_deg").get<double>();
  c.scanner.sensor_height = sc.at("sensor_height").get<double>();
  c.scanner.ping_spacing = sc.at("ping_spacing").get<double>();
  c.scanner.line_spacing = sc.at("line_spacing").get<double>();
  c.scanner.dropout_prob = sc.at("dropout_prob").get<double>();
  c.scanner.noise_sigma = sc.at("noise_sigma").get<double>();
  c.scanner.direction_mode =
      scan_direction_from_name(sc.at("direction_mode").get<std::string>());

  const json& tp = j.at("templates");
  c.templates.tetrapod_yaw_count = tp.at("tetrapod_yaw_count").get<int>();
  c.templates.rotsym_yaw_count = tp.at("rotsym_yaw_count").get<int>();
  c.templates.min_points_factor = tp.at("min_points_factor").get<double>();
  c.templates.floor_margin = tp.at("floor_margin").get<double>();
  c.templates.floor_extent = tp.at("floor_extent").get<double>();
  class_map_from(tp.at("rmse_threshold"), c.templates.rmse_threshold);

  const json& d = j.at("detect");
  c.detect.ransac.iterations = d.at("ransac").at("iterations").get<int>();
  c.detect.ransac.inlier_dist = d.at("ransac").at("inlier_dist").get<double>();
  c.detect.ransac.clearance = d.at("ransac").at("clearance").get<double>();
  c.detect.icp.max_iterations = d.at("icp").at("max_iterations").get<int>();
  c.detect.icp.corr_dist_initial =
      d.at("icp").at("corr_dist_initial").get<double>();
  c.detect.icp.corr_dist_final =
      d.at("icp").at("corr_dist_final").get<double>();
  c.detect.icp.convergence_tol =
      d.at("icp").at("convergence_tol").get<double>();
  const std::string mode = d.at("window_mode").get<std::string>();
  if (mode == "per_class")
    c.detect.window_mode = WindowMode::per_class;
  else if (mode == "global")
    c.detect.window_mode = WindowMode::global;
  else
    throw ConfigError("detect.window_mode must be \"per_class\" or \"global\"");
  c.detect.window_size_factor = d.at("window_size_factor").get<double>();
  c.detect.global_window_size = d.at("global_window_size").get<double>();
  c.detect.stride_fraction = d.at("stride_fraction").get<double>();
  c.detect.nms_radius_factor = d.at("nms_radius_factor").get<double>();
  c.detect.min_inlier_fraction = d.at("min_inlier_fraction").get<double>();
  c.detect.min_height_fraction = d.at("min_height_fraction").get<double>();
  c.detect.icp_abort_factor = d.at("icp_abort_factor").get<double>();
  c.detect.free_space_dist = d.at("free_space_dist").get<double>();
  c.detect.free_space_zmin = d.at("free_space_zmin").get<double>();
  c.detect.free_space_max_fraction =
      d.at("free_space_max_fraction").get<double>();
  c.detect.init_ground_band = d.at("init_ground_band").get<double>();
  class_map_from(d.at("rmse_threshold"), c.detect.rmse_threshold);
  class_map_from(d.at("min_points"), c.detect.min_points);
  c.detect.seed = d.at("seed").get<std::uint64_t>();

  const json& e = j.at("evaluate");
  c.evaluate.dist_threshold = e.at("dist_threshold").get<double>();
  c.evaluate.multi_thresholds =
      e.at("multi_thresholds").get<std::vector<double>>();
  c.evaluate.use_multi = e.at("use_multi").get<bool>();
  c.evaluate.use_3d = e.at("use_3d").get<bool>();
  c.evaluate.map_gate = e.at("map_gate").get<double>();

  const json& ti = j.at("tiling");
  c.tiling.tile_size = ti.at("tile_size").get<double>();
  c.tiling.min_points = ti.at("min_points").get<int>();

  c.noisechar.trim_k = j.at("noisechar").at("trim_k").get<double>();
  return c;
}

// Overlays user values onto the defaults, rejecting any key the schema
// does not know.
void merge_strict(json& base, const json& user, const std::string& path) {
  if (!user.is_object()) {
    base = user;
    return;
  }
  for (const auto& [key, value] : user.items()) {
    const std::string child = path.empty() ? key : path + "." + key;
    if (!base.contains(key))
      throw ConfigError("unknown config key \"" + child + "\"");
    if (base[key].is_object()) {
      if (!value.is_object())
        throw ConfigError("config key \"" + child + "\" must be an object");
      merge_strict(base[key], value, child);
    } else {
      if (value.is_object())
        throw ConfigError("config key \"" + child + "\" is not a section");
      base[key] = value;
    }
  }
}

void check(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

ScanDirection scan_direction_from_name(const std::string& name) {
  for (std::size_t i = 0; i < kDirectionNames.size(); ++i)
    if (kDirectionNames[i] == name) return static_cast<ScanDirection>(i);
  throw ConfigError("scanner.direction_mode must be one of x, y, both, random");
}

const std::string& scan_direction_name(ScanDirection d) {
  return kDirectionNames[static_cast<int>(d)];
}

Config Config::from_json_text(const std::string& text) {
  json user;
  try {
    user = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!user.is_object()) throw ConfigError("config root must be an object");
  json base = to_json(Config{});
  merge_strict(base, user, "");
  Config c = from_json(base);
  c.validate();
  return c;
}

Config Config::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string Config::to_json_text(int indent) const {
  return to_json(*this).dump(indent);
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like section.key=value: \"" +
                      assignment + "\"");
  const std::string key_path = assignment.substr(0, eq);
  const std::string value_text = assignment.substr(eq + 1);

  json value;
  try {
    value = json::parse(value_text);
  } catch (const json::parse_error&) {
    value = value_text;  // bare strings (e.g. direction_mode=random)
  }

  json root = to_json(*this);
  json* node = &root;
  std::string consumed;
  std::size_t pos = 0;
  while (true) {
    const auto dot = key_path.find('.', pos);
    const std::string part = key_path.substr(
        pos, dot == std::string::npos ? std::string::npos : dot - pos);
    consumed = consumed.empty() ? part : consumed + "." + part;
    if (!node->contains(part))
      throw ConfigError("unknown config key \"" + consumed + "\"");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  if (node->is_object())
    throw ConfigError("config key \"" + key_path + "\" is a section");
  *node = value;
  Config candidate = from_json(root);
  candidate.validate();
  *this = candidate;
}

void Config::validate() const {
  check(geometry.resolution >= 8, "geometry.resolution must be >= 8");
  check(geometry.ring_diameter > 0 && geometry.ring_height > 0 &&
            geometry.ring_diameter > 2 * geometry.ring_height,
        "geometry: ring_diameter must exceed twice ring_height");
  check(geometry.cone_base_diameter > 0 && geometry.cone_top_diameter > 0 &&
            geometry.cone_height > 0,
        "geometry: cone dimensions must be positive");
  check(geometry.cone_top_diameter < geometry.cone_base_diameter,
        "geometry: cone top must be narrower than its base");
  check(geometry.cone_wall > 0 &&
            2 * geometry.cone_wall < geometry.cone_top_diameter,
        "geometry.cone_wall must be positive and fit inside the top opening");
  check(geometry.tetrapod_height > 0, "geometry.tetrapod_height must be > 0");
  check(geometry.tetrapod_s_scale > 0 && geometry.tetrapod_s_scale <= 1,
        "geometry.tetrapod_s_scale must be in (0, 1]");

  check(terrain.octaves >= 1, "terrain.octaves must be >= 1");
  check(terrain.base_amplitude >= 0, "terrain.base_amplitude must be >= 0");
  check(terrain.base_wavelength > 0, "terrain.base_wavelength must be > 0");
  check(terrain.persistence > 0, "terrain.persistence must be > 0");
  check(terrain.lacunarity >= 1, "terrain.lacunarity must be >= 1");
  check(terrain.grid_step > 0, "terrain.grid_step must be > 0");

  check(scene.bounds_x > 0 && scene.bounds_y > 0,
        "scene bounds must be positive");
  check(scene.objects_per_scene >= 0, "scene.objects_per_scene must be >= 0");
  for (int v : scene.class_counts)
    check(v >= 0, "scene.class_counts entries must be >= 0");
  check(scene.min_separation >= 0, "scene.min_separation must be >= 0");
  check(scene.margin >= 0 &&
            2 * scene.margin < std::min(scene.bounds_x, scene.bounds_y),
        "scene.margin must leave a usable placement area");
  check(scene.sink_allowance >= 0, "scene.sink_allowance must be >= 0");
  check(scene.max_tilt_deg >= 0 && scene.max_tilt_deg <= 45,
        "scene.max_tilt_deg must be in [0, 45]");
  check(scene.max_attempts_per_object >= 1,
        "scene.max_attempts_per_object must be >= 1");

  check(scanner.beam_count >= 1 && scanner.beam_count <= 1024,
        "scanner.beam_count must be in [1, 1024]");
  check(scanner.swath_half_angle_deg > 0 && scanner.swath_half_angle_deg < 90,
        "scanner.swath_half_angle_deg must be in (0, 90)");
  check(scanner.sensor_height > 0, "scanner.sensor_height must be > 0");
  check(scanner.ping_spacing > 0, "scanner.ping_spacing must be > 0");
  check(scanner.line_spacing > 0, "scanner.line_spacing must be > 0");
  check(scanner.dropout_prob >= 0 && scanner.dropout_prob < 1,
        "scanner.dropout_prob must be in [0, 1)");
  check(scanner.noise_sigma >= 0, "scanner.noise_sigma must be >= 0");

  check(templates.tetrapod_yaw_count >= 1,
        "templates.tetrapod_yaw_count must be >= 1");
  check(templates.rotsym_yaw_count >= 1,
        "templates.rotsym_yaw_count must be >= 1");
  check(templates.min_points_factor > 0 && templates.min_points_factor <= 1,
        "templates.min_points_factor must be in (0, 1]");
  check(templates.floor_margin > 0, "templates.floor_margin must be > 0");
  check(templates.floor_extent > 0, "templates.floor_extent must be > 0");
  for (double v : templates.rmse_threshold)
    check(v > 0, "templates.rmse_threshold entries must be > 0");

  check(detect.ransac.iterations >= 1, "detect.ransac.iterations must be >= 1");
  check(detect.ransac.inlier_dist > 0, "detect.ransac.inlier_dist must be > 0");
  check(detect.ransac.clearance > 0, "detect.ransac.clearance must be > 0");
  check(detect.icp.max_iterations >= 1,
        "detect.icp.max_iterations must be >= 1");
  check(detect.icp.corr_dist_initial > 0 && detect.icp.corr_dist_final > 0,
        "detect.icp correspondence distances must be > 0");
  check(detect.icp.corr_dist_final <= detect.icp.corr_dist_initial,
        "detect.icp.corr_dist_final must be <= corr_dist_initial");
  check(detect.icp.convergence_tol > 0,
        "detect.icp.convergence_tol must be > 0");
  check(detect.window_size_factor > 0,
        "detect.window_size_factor must be > 0");
  check(detect.global_window_size >= 0,
        "detect.global_window_size must be >= 0");
  check(detect.stride_fraction > 0 && detect.stride_fraction <= 1,
        "detect.stride_fraction must be in (0, 1]");
  check(detect.nms_radius_factor > 0, "detect.nms_radius_factor must be > 0");
  check(detect.min_inlier_fraction >= 0 && detect.min_inlier_fraction <= 1,
        "detect.min_inlier_fraction must be in [0, 1]");
  check(detect.min_height_fraction >= 0 && detect.min_height_fraction < 1,
        "detect.min_height_fraction must be in [0, 1)");
  check(detect.icp_abort_factor >= 0, "detect.icp_abort_factor must be >= 0");
  check(detect.free_space_dist > 0, "detect.free_space_dist must be > 0");
  check(detect.free_space_zmin >= 0, "detect.free_space_zmin must be >= 0");
  check(detect.free_space_max_fraction > 0,
        "detect.free_space_max_fraction must be > 0");
  check(detect.init_ground_band >= 0,
        "detect.init_ground_band must be >= 0");
  for (double v : detect.rmse_threshold)
    check(v >= 0, "detect.rmse_threshold entries must be >= 0");
  for (int v : detect.min_points)
    check(v >= 0, "detect.min_points entries must be >= 0");

  check(evaluate.dist_threshold > 0, "evaluate.dist_threshold must be > 0");
  check(!evaluate.multi_thresholds.empty(),
        "evaluate.multi_thresholds must not be empty");
  for (double v : evaluate.multi_thresholds)
    check(v > 0, "evaluate.multi_thresholds entries must be > 0");
  check(evaluate.map_gate >= 0 && evaluate.map_gate <= 1,
        "evaluate.map_gate must be in [0, 1]");

  check(tiling.tile_size > 0, "tiling.tile_size must be > 0");
  check(tiling.min_points >= 0, "tiling.min_points must be >= 0");

  check(noisechar.trim_k > 0, "noisechar.trim_k must be > 0");
}

}  // namespace reefscan
