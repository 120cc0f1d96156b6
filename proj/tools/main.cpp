// reefscan: procedural MBES survey simulation, template-matching object
// detection and center-distance mAP evaluation, wired into reproducible
// experiments.

#include "reefscan/cloud.hpp"
#include "reefscan/config.hpp"
#include "reefscan/dataset.hpp"
#include "reefscan/detector.hpp"
#include "reefscan/evaluate.hpp"
#include "reefscan/io.hpp"
#include "reefscan/noisechar.hpp"
#include "reefscan/parallel.hpp"
#include "reefscan/template_library.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace reefscan;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitGate = 4;

struct GateFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  int threads = 0;
};

Config resolve_config(const CommonArgs& args) {
  Config config = args.config_path.empty()
                      ? Config{}
                      : Config::load_file(args.config_path);
  for (const std::string& assignment : args.overrides)
    config.apply_override(assignment);
  config.validate();
  return config;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_path,
                  "JSON config file (defaults apply when omitted)");
  cmd->add_option("--set", args.overrides,
                  "Override a config key, e.g. --set scanner.beam_count=512 "
                  "(flag > file > default)");
  cmd->add_option("--threads", args.threads,
                  "Worker threads (0 = REEFSCAN_THREADS env or hardware)");
}

class ManifestWriter {
 public:
  ManifestWriter(std::string command, const Config& config,
                 std::uint64_t seed)
      : start_(std::chrono::steady_clock::now()) {
    manifest_["command"] = std::move(command);
    manifest_["tool_version"] = kVersion;
    manifest_["config"] = json::parse(config.to_json_text());
    manifest_["master_seed"] = seed;
    manifest_["inputs"] = json::object();
    manifest_["outputs"] = json::object();
  }

  void add_input(const std::string& key, const fs::path& path) {
    manifest_["inputs"][key] = path.string();
  }
  void add_output(const std::string& key, const fs::path& path) {
    manifest_["outputs"][key] = path.string();
  }
  void add_result(const std::string& key, const json& value) {
    manifest_["results"][key] = value;
  }

  void write(const fs::path& dir) {
    const auto elapsed = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start_)
                             .count();
    manifest_["timing"] = {{"duration_seconds", elapsed}};
    fs::create_directories(dir);
    write_file_atomic(dir / "run_manifest.json", manifest_.dump(2) + "\n");
  }

 private:
  json manifest_;
  std::chrono::steady_clock::time_point start_;
};

// Minimal '*' wildcard match for scene globs.
bool wildcard_match(const std::string& pattern, const std::string& text) {
  std::size_t p = 0, t = 0, star = std::string::npos, mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() &&
        (pattern[p] == text[t] || pattern[p] == '?')) {
      ++p;
      ++t;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = t;
    } else if (star != std::string::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

std::vector<fs::path> resolve_scene_clouds(const std::string& spec) {
  std::vector<fs::path> clouds;
  const fs::path as_path(spec);
  if (fs::is_directory(as_path)) {
    for (const auto& entry : fs::directory_iterator(as_path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".ply")
        clouds.push_back(entry.path());
    }
  } else if (fs::is_regular_file(as_path)) {
    clouds.push_back(as_path);
  } else {
    const fs::path dir = as_path.parent_path().empty()
                             ? fs::path(".")
                             : as_path.parent_path();
    const std::string pattern = as_path.filename().string();
    if (fs::is_directory(dir)) {
      for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() &&
            wildcard_match(pattern, entry.path().filename().string()))
          clouds.push_back(entry.path());
      }
    }
  }
  std::sort(clouds.begin(), clouds.end());
  if (clouds.empty())
    throw IoError("no scenes matched \"" + spec + "\"");
  return clouds;
}

int cmd_simulate(const CommonArgs& common, const std::string& out,
                 int n_scenes, std::uint64_t seed) {
  const Config config = resolve_config(common);
  ManifestWriter manifest("simulate", config, seed);
  const fs::path out_dir(out);
  const sim::DatasetManifest result = sim::generate_dataset(
      config, n_scenes, seed, out_dir, resolve_threads(common.threads));
  manifest.add_output("dataset", out_dir);
  int total = 0;
  for (int c = 0; c < kClassCount; ++c) total += result.total_counts[c];
  manifest.add_result("scenes", result.scenes.size());
  manifest.add_result("objects", total);
  manifest.write(out_dir);
  std::cout << "wrote " << result.scenes.size() << " scenes (" << total
            << " objects) to " << out_dir.string() << "\n";
  return 0;
}

int cmd_templates(const CommonArgs& common, const std::string& out) {
  const Config config = resolve_config(common);
  ManifestWriter manifest("templates", config, 0);
  const templates::TemplateLibrary library = templates::build_library(config);
  const fs::path out_dir(out);
  templates::save_library(library, out_dir);
  manifest.add_output("library", out_dir);
  manifest.add_result("templates", library.templates.size());
  manifest.add_result("fingerprint", library.fingerprint);
  manifest.write(out_dir);
  std::cout << "wrote " << library.templates.size() << " templates to "
            << out_dir.string() << " (fingerprint " << library.fingerprint
            << ")\n";
  return 0;
}

int cmd_detect(const CommonArgs& common, const std::string& scenes,
               const std::string& library_dir, const std::string& out,
               bool debug) {
  const Config config = resolve_config(common);
  ManifestWriter manifest("detect", config, config.detect.seed);
  const std::vector<fs::path> clouds = resolve_scene_clouds(scenes);
  const templates::TemplateLibrary library =
      templates::load_library(library_dir);
  const fs::path out_dir(out);
  fs::create_directories(out_dir);

  std::size_t total = 0;
  for (const fs::path& cloud_path : clouds) {
    const PointCloud cloud = load_cloud(cloud_path);
    detect::DetectDebug dbg;
    const std::vector<Detection> detections =
        detect::detect_scene(cloud, library, config.detect,
                             resolve_threads(common.threads), &dbg);
    total += detections.size();
    const fs::path out_file = out_dir / (cloud_path.stem().string() + ".json");
    save_detections(detections, out_file);
    if (debug) {
      json dj = {{"plane_normal",
                  {dbg.plane.normal.x(), dbg.plane.normal.y(),
                   dbg.plane.normal.z()}},
                 {"plane_offset", dbg.plane.offset},
                 {"plane_inliers", dbg.plane.inlier_count},
                 {"residual_points", dbg.residual_points},
                 {"segments", dbg.segment_count},
                 {"hypotheses", dbg.hypothesis_count},
                 {"detections", detections.size()}};
      write_file_atomic(
          out_dir / (cloud_path.stem().string() + ".debug.json"),
          dj.dump(2) + "\n");
    }
    std::cout << cloud_path.filename().string() << ": " << detections.size()
              << " detections\n";
  }
  manifest.add_input("scenes", scenes);
  manifest.add_input("library", library_dir);
  manifest.add_output("detections", out_dir);
  manifest.add_result("scenes", clouds.size());
  manifest.add_result("detections", total);
  manifest.write(out_dir);
  return 0;
}

int run_evaluation(const Config& config, const fs::path& pred_dir,
                   const fs::path& gt_dir, const fs::path& out_dir,
                   ManifestWriter& manifest) {
  std::vector<double> thresholds = {config.evaluate.dist_threshold};
  if (config.evaluate.use_multi)
    thresholds = config.evaluate.multi_thresholds;

  const std::vector<eval::EvalReport> reports = eval::evaluate_dataset(
      pred_dir, gt_dir, thresholds, config.evaluate.use_3d);

  fs::create_directories(out_dir);
  json combined = json::array();
  double multi_sum = 0.0;
  for (const eval::EvalReport& report : reports) {
    combined.push_back(json::parse(report.to_json_text()));
    multi_sum += report.map;
    std::cout << "@ " << report.dist_threshold << " m ("
              << (report.horizontal_distance ? "horizontal" : "3D")
              << " distance)\n"
              << report.to_table_text();
  }
  if (config.evaluate.use_multi && !reports.empty()) {
    std::cout << "multi-threshold mAP (mean over " << reports.size()
              << " thresholds): " << multi_sum / reports.size() << "\n";
  }
  write_file_atomic(out_dir / "report.json", combined.dump(2) + "\n");

  manifest.add_input("predictions", pred_dir);
  manifest.add_input("ground_truth", gt_dir);
  manifest.add_output("report", out_dir / "report.json");
  manifest.add_result("map", reports.front().map);
  manifest.write(out_dir);

  if (reports.front().map < config.evaluate.map_gate) {
    std::ostringstream msg;
    msg << "mAP " << reports.front().map << " below gate "
        << config.evaluate.map_gate;
    throw GateFailure(msg.str());
  }
  return 0;
}

int cmd_evaluate(const CommonArgs& common, const std::string& pred,
                 const std::string& gt, const std::string& out) {
  const Config config = resolve_config(common);
  ManifestWriter manifest("evaluate", config, 0);
  return run_evaluation(config, pred, gt, out, manifest);
}

int cmd_noise_char(const CommonArgs& common, const std::string& cloud_path,
                   const std::string& out) {
  const Config config = resolve_config(common);
  ManifestWriter manifest("noise-char", config, 0);
  const PointCloud cloud = load_cloud(cloud_path);
  const noise::CharacterizeResult result = noise::characterize(
      cloud, config.detect.ransac, config.noisechar.trim_k);

  auto stats_json = [](const noise::NoiseStats& s) {
    return json{{"mu", s.mu},
                {"sigma", s.sigma},
                {"n", s.n},
                {"skew_statistic", s.skew_statistic},
                {"skew_p_value", s.skew_p_value},
                {"skew_normal_at_05", s.skew_normal_at_05},
                {"trimmed", s.trimmed},
                {"trim_k", s.trim_k}};
  };
  const fs::path out_dir(out);
  fs::create_directories(out_dir);
  json stats = {{"raw", stats_json(result.raw)},
                {"trimmed", stats_json(result.trimmed)},
                {"plane",
                 {{"normal",
                   {result.plane.normal.x(), result.plane.normal.y(),
                    result.plane.normal.z()}},
                  {"offset", result.plane.offset},
                  {"inliers", result.plane.inlier_count}}}};
  write_file_atomic(out_dir / "stats.json", stats.dump(2) + "\n");
  write_file_atomic(out_dir / "histogram_raw.csv", result.raw_hist.to_csv());
  write_file_atomic(out_dir / "histogram_trimmed.csv",
                    result.trimmed_hist.to_csv());

  manifest.add_input("cloud", cloud_path);
  manifest.add_output("stats", out_dir / "stats.json");
  manifest.write(out_dir);

  std::cout << "raw:     mu " << result.raw.mu << " m, sigma "
            << result.raw.sigma << " m, n " << result.raw.n << "\n";
  std::cout << "trimmed: mu " << result.trimmed.mu << " m, sigma "
            << result.trimmed.sigma << " m, n " << result.trimmed.n
            << " (skewness test "
            << (result.trimmed.skew_normal_at_05 ? "passes" : "fails")
            << " at alpha 0.05)\n";
  return 0;
}

int cmd_end_to_end(const CommonArgs& common, const std::string& out,
                   int n_scenes, std::uint64_t seed) {
  const Config config = resolve_config(common);
  ManifestWriter manifest("end-to-end", config, seed);
  const fs::path out_dir(out);
  const int threads = resolve_threads(common.threads);

  const fs::path scene_dir = out_dir / "scenes";
  const fs::path library_dir = out_dir / "library";
  const fs::path detection_dir = out_dir / "detections";

  std::cout << "[1/4] simulating " << n_scenes << " scenes\n";
  sim::generate_dataset(config, n_scenes, seed, scene_dir, threads);

  std::cout << "[2/4] building the template library\n";
  const templates::TemplateLibrary library = templates::build_library(config);
  templates::save_library(library, library_dir);

  std::cout << "[3/4] detecting\n";
  fs::create_directories(detection_dir);
  std::vector<fs::path> clouds;
  for (const auto& entry : fs::directory_iterator(scene_dir)) {
    if (entry.path().extension() == ".ply") clouds.push_back(entry.path());
  }
  std::sort(clouds.begin(), clouds.end());
  for (const fs::path& cloud_path : clouds) {
    const PointCloud cloud = load_cloud(cloud_path);
    const std::vector<Detection> detections =
        detect::detect_scene(cloud, library, config.detect, threads);
    save_detections(detections,
                    detection_dir / (cloud_path.stem().string() + ".json"));
  }

  std::cout << "[4/4] evaluating\n";
  manifest.add_output("scenes", scene_dir);
  manifest.add_output("library", library_dir);
  manifest.add_output("detections", detection_dir);
  return run_evaluation(config, detection_dir, scene_dir, out_dir, manifest);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "reefscan: simulated multibeam surveys of artificial reef objects, "
      "training-free template-matching detection, and mAP evaluation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonArgs sim_args;
  std::string sim_out = "dataset";
  int sim_n = 100;
  std::uint64_t sim_seed = 0;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "Generate a synthetic survey dataset");
  add_common(sim_cmd, sim_args);
  sim_cmd->add_option("-o,--out", sim_out, "Output directory");
  sim_cmd->add_option("-n,--scenes", sim_n, "Number of scenes");
  sim_cmd->add_option("--seed", sim_seed, "Master seed");

  CommonArgs tmpl_args;
  std::string tmpl_out = "library";
  CLI::App* tmpl_cmd =
      app.add_subcommand("templates", "Build the template library");
  add_common(tmpl_cmd, tmpl_args);
  tmpl_cmd->add_option("-o,--out", tmpl_out, "Library output directory");

  CommonArgs det_args;
  std::string det_scenes, det_library = "library", det_out = "detections";
  bool det_debug = false;
  CLI::App* det_cmd = app.add_subcommand(
      "detect", "Run the detection pipeline over scene clouds");
  add_common(det_cmd, det_args);
  det_cmd->add_option("--scenes", det_scenes,
                      "Scene directory, file, or glob (scene_*.ply)")
      ->required();
  det_cmd->add_option("--library", det_library, "Template library directory");
  det_cmd->add_option("-o,--out", det_out, "Detection output directory");
  det_cmd->add_flag("--debug", det_debug, "Write per-scene debug dumps");

  CommonArgs eval_args;
  std::string eval_pred, eval_gt, eval_out = "eval";
  CLI::App* eval_cmd = app.add_subcommand(
      "evaluate", "Score detections against ground-truth annotations");
  add_common(eval_cmd, eval_args);
  eval_cmd->add_option("--pred", eval_pred, "Detections directory")
      ->required();
  eval_cmd->add_option("--gt", eval_gt, "Ground-truth directory")->required();
  eval_cmd->add_option("-o,--out", eval_out, "Report output directory");

  CommonArgs noise_args;
  std::string noise_cloud, noise_out = "noise";
  CLI::App* noise_cmd = app.add_subcommand(
      "noise-char", "Characterize sensor noise from a near-planar cloud");
  add_common(noise_cmd, noise_args);
  noise_cmd->add_option("--cloud", noise_cloud, "Point cloud file")
      ->required();
  noise_cmd->add_option("-o,--out", noise_out, "Output directory");

  CommonArgs e2e_args;
  std::string e2e_out = "run";
  int e2e_n = 20;
  std::uint64_t e2e_seed = 0;
  CLI::App* e2e_cmd = app.add_subcommand(
      "end-to-end", "simulate -> templates -> detect -> evaluate");
  add_common(e2e_cmd, e2e_args);
  e2e_cmd->add_option("-o,--out", e2e_out, "Working directory");
  e2e_cmd->add_option("-n,--scenes", e2e_n, "Number of test scenes");
  e2e_cmd->add_option("--seed", e2e_seed, "Master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (sim_cmd->parsed())
      return cmd_simulate(sim_args, sim_out, sim_n, sim_seed);
    if (tmpl_cmd->parsed()) return cmd_templates(tmpl_args, tmpl_out);
    if (det_cmd->parsed())
      return cmd_detect(det_args, det_scenes, det_library, det_out, det_debug);
    if (eval_cmd->parsed())
      return cmd_evaluate(eval_args, eval_pred, eval_gt, eval_out);
    if (noise_cmd->parsed())
      return cmd_noise_char(noise_args, noise_cloud, noise_out);
    if (e2e_cmd->parsed())
      return cmd_end_to_end(e2e_args, e2e_out, e2e_n, e2e_seed);
  } catch (const GateFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitGate;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
