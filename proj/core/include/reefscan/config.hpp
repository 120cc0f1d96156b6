#pragma once

#include "reefscan/types.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace reefscan {

// Parametric object geometry. Heights default to the published object
// sizes; footprints follow from the canonical proportions.
struct MeshParams {
  int resolution = 32;  // segments per revolution, >= 8

  double ring_diameter = 3.0;   // outer diameter of the annulus
  double ring_height = 0.75;    // = tube diameter
  double cone_base_diameter = 2.0;
  double cone_top_diameter = 0.8;
  double cone_height = 1.2;
  double cone_wall = 0.15;
  double tetrapod_height = 2.08;
  double tetrapod_s_scale = 0.6;  // uniform scale of tetrapod_b
};

struct TerrainParams {
  int octaves = 4;
  double base_amplitude = 0.25;   // meters, first octave
  double base_wavelength = 20.0;  // meters, first octave
  double persistence = 0.5;
  double lacunarity = 2.0;
  double grid_step = 0.25;  // sampling step of the terrain mesh
};

enum class ScanDirection { x, y, both, random };

ScanDirection scan_direction_from_name(const std::string& name);
const std::string& scan_direction_name(ScanDirection d);

struct ScannerConfig {
  int beam_count = 256;  // hardware maximum is 1024 beams
  double swath_half_angle_deg = 60.0;
  double sensor_height = 15.0;  // above mean seabed
  double ping_spacing = 0.2;
  double line_spacing = 10.0;
  double dropout_prob = 0.02;
  double noise_sigma = 0.01;  // range noise, meters
  ScanDirection direction_mode = ScanDirection::random;
};

struct SceneSpec {
  double bounds_x = 40.0;
  double bounds_y = 40.0;
  int objects_per_scene = 50;  // used with a near-uniform class mix
  // Explicit per-class counts; any value > 0 switches to explicit mode.
  std::array<int, kClassCount> class_counts{0, 0, 0, 0};
  double min_separation = 2.5;
  double margin = 2.0;  // keep object centers this far from the bounds
  double sink_allowance = 0.05;
  double max_tilt_deg = 5.0;
  int max_attempts_per_object = 200;

  bool explicit_counts() const {
    for (int c : class_counts)
      if (c > 0) return true;
    return false;
  }
  Rect bounds() const { return {0.0, 0.0, bounds_x, bounds_y}; }
};

struct TemplateConfig {
  int tetrapod_yaw_count = 8;
  int rotsym_yaw_count = 1;  // reef_ring / reef_cone are surfaces of revolution
  double min_points_factor = 0.3;
  double floor_margin = 0.08;  // height cut separating object from the floor
  double floor_extent = 3.0;   // virtual floor inflation around the mesh
  // Acceptance threshold on post-registration RMSE, per class. The beam
  // sampling mismatch between template and survey grids floors the RMSE
  // of a correct alignment near 0.05-0.065 m at default densities.
  std::array<double, kClassCount> rmse_threshold{0.08, 0.08, 0.08, 0.08};
};

struct RansacParams {
  int iterations = 128;
  double inlier_dist = 0.03;
  double clearance = 0.04;  // seabed removal margin, ~4 sigma of range noise
};

struct IcpParams {
  int max_iterations = 50;
  double corr_dist_initial = 0.5;
  double corr_dist_final = 0.1;
  double convergence_tol = 1e-5;
  // Abort hopeless registrations once past half the schedule; 0 disables.
  double abort_rmse = 0.0;
};

enum class WindowMode { per_class, global };

struct DetectorConfig {
  RansacParams ransac;
  IcpParams icp;
  WindowMode window_mode = WindowMode::per_class;
  double window_size_factor = 1.5;  // x class footprint diameter
  double global_window_size = 0.0;  // 0 = max over classes
  double stride_fraction = 0.5;
  double nms_radius_factor = 0.5;  // x class footprint diameter
  double min_inlier_fraction = 0.5;
  // Segments whose z extent is below this fraction of the class height are
  // skipped before registration; 0 disables.
  double min_height_fraction = 0.35;
  double icp_abort_factor = 4.0;  // x rmse threshold, 0 disables early abort
  // Free-space consistency gate: segment points inside the aligned
  // template's footprint and above free_space_zmin (template frame, above
  // the resting plane) must lie near the template surface. Smooth seabed
  // bumps fill an object's empty interior and fail this.
  double free_space_dist = 0.15;
  double free_space_zmin = 0.3;
  double free_space_max_fraction = 0.2;  // >= 1 disables
  // The centroid used for the initial template alignment ignores points
  // within this band of the segment's lowest point, so residual seabed
  // undulation does not drag the start pose off the object; 0 disables.
  double init_ground_band = 0.25;
  // Per-class overrides; 0 = take the value stored in the template library.
  std::array<double, kClassCount> rmse_threshold{0, 0, 0, 0};
  std::array<int, kClassCount> min_points{0, 0, 0, 0};
  std::uint64_t seed = 13;
};

struct EvalConfig {
  double dist_threshold = 0.5;
  std::vector<double> multi_thresholds{0.5, 1.0, 2.0, 4.0};
  bool use_multi = false;  // report the multi-threshold average as well
  bool use_3d = false;     // full 3D center distance instead of horizontal
  double map_gate = 0.0;   // CI gate; evaluate exits nonzero below this
};

struct TilingConfig {
  double tile_size = 40.0;
  int min_points = 100;
};

struct NoiseCharConfig {
  double trim_k = 2.0;  // Z-score cutoff for the outlier trim
};

struct Config {
  MeshParams geometry;
  TerrainParams terrain;
  SceneSpec scene;
  ScannerConfig scanner;
  TemplateConfig templates;
  DetectorConfig detect;
  EvalConfig evaluate;
  TilingConfig tiling;
  NoiseCharConfig noisechar;

  // Strict parse: unknown keys are rejected with their full key path.
  static Config from_json_text(const std::string& text);
  static Config load_file(const std::filesystem::path& path);

  std::string to_json_text(int indent = 2) const;

  // Applies a "section.key=value" override (value parsed as JSON scalar).
  void apply_override(const std::string& assignment);

  // Throws ConfigError on invariant violations (non-positive thresholds,
  // beam_count outside [1, 1024], ...).
  void validate() const;
};

}  // namespace reefscan
