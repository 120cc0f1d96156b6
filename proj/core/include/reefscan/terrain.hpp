#pragma once

#include "reefscan/config.hpp"
#include "reefscan/mesh.hpp"
#include "reefscan/types.hpp"

#include <cstdint>
#include <vector>

namespace reefscan::sim {

// Classic lattice-gradient noise in [-1, 1]: zero at integer lattice
// points, smooth (quintic fade), deterministic in (x, y, seed).
double perlin(double x, double y, std::uint64_t seed);

// Fractal-sum heightfield over a rectangle. Heights are a pure function of
// (x, y, seed, params); the sampled grid only backs the triangle mesh.
class TerrainField {
 public:
  TerrainField(Rect bounds, TerrainParams params, std::uint64_t seed);

  double height(double x, double y) const;  // analytic fractal sum
  const Rect& bounds() const { return bounds_; }
  std::uint64_t seed() const { return seed_; }
  const TerrainParams& params() const { return params_; }

  // Piecewise-linear terrain surface sampled at params.grid_step, the
  // geometry every simulated beam actually intersects.
  geom::TriangleMesh to_mesh() const;

  // Sampled height grid, row-major, ny rows of nx samples.
  const std::vector<double>& grid() const { return grid_; }
  std::size_t grid_nx() const { return nx_; }
  std::size_t grid_ny() const { return ny_; }

 private:
  Rect bounds_;
  TerrainParams params_;
  std::uint64_t seed_;
  std::size_t nx_ = 0, ny_ = 0;
  std::vector<double> grid_;
};

TerrainField generate_terrain(const Rect& bounds, const TerrainParams& params,
                              std::uint64_t seed);

}  // namespace reefscan::sim
