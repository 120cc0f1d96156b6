#pragma once

#include "reefscan/bvh.hpp"
#include "reefscan/config.hpp"
#include "reefscan/scene_gen.hpp"
#include "reefscan/terrain.hpp"
#include "reefscan/types.hpp"

#include <cstdint>
#include <vector>

namespace reefscan::sim {

// Triangle scene (terrain plus posed object meshes) ready for ray queries.
geom::Bvh build_scene_geometry(const TerrainField& terrain,
                               const std::vector<PlacedObject>& objects,
                               const MeshParams& geometry);

// Virtual multibeam survey: straight lines at sensor_height, a fan of
// beam_count rays per ping spanning +-swath_half_angle across-track. Each
// beam's nearest scene intersection becomes a point; beams drop out with
// dropout_prob and surviving ranges are perturbed by N(0, noise_sigma^2)
// along the beam. Deterministic in (scene, scanner, seed) regardless of
// evaluation order.
PointCloud simulate_scan(const TerrainField& terrain,
                         const std::vector<PlacedObject>& objects,
                         const ScannerConfig& scanner,
                         const MeshParams& geometry, std::uint64_t seed);

// Same scan against a prebuilt scene (the terrain only bounds the survey).
PointCloud simulate_scan(const geom::Bvh& scene, const Rect& bounds,
                         const ScannerConfig& scanner, std::uint64_t seed);

}  // namespace reefscan::sim
