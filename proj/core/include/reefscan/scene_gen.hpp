#pragma once

#include "reefscan/config.hpp"
#include "reefscan/terrain.hpp"
#include "reefscan/types.hpp"

#include <cstdint>
#include <vector>

namespace reefscan::sim {

// One object instance: the recorded annotation plus the full pose used to
// render it (the pose may include a small random tilt the annotation does
// not carry).
struct PlacedObject {
  ObjectAnnotation annotation;
  RigidTransform pose;  // mesh frame -> scene frame
};

// Samples object placements: uniform (x, y) inside the margin-shrunk
// bounds, uniform yaw, tilt up to max_tilt_deg, z settled so the posed
// mesh rests on the terrain (lowest vertex at contact, then sunk by up to
// sink_allowance). Rejection sampling enforces min_separation between
// centers; throws std::runtime_error reporting the achieved count when a
// placement cannot be found.
std::vector<PlacedObject> place_objects(const TerrainField& terrain,
                                        const SceneSpec& spec,
                                        const MeshParams& geometry,
                                        std::uint64_t seed);

}  // namespace reefscan::sim
