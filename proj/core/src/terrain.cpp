#include "reefscan/terrain.hpp"

#include "reefscan/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace reefscan::sim {

namespace {

// Unit gradient at a lattice corner, drawn from the hash of (ix, iy, seed).
inline void corner_gradient(std::int64_t ix, std::int64_t iy,
                            std::uint64_t seed, double& gx, double& gy) {
  const std::uint64_t h =
      derive_seed(derive_seed(seed, static_cast<std::uint64_t>(ix)),
                  static_cast<std::uint64_t>(iy));
  const double angle = static_cast<double>(h >> 11) *
                       (2.0 * std::numbers::pi * 0x1.0p-53);
  gx = std::cos(angle);
  gy = std::sin(angle);
}

inline double fade(double t) { return t * t * t * (t * (6.0 * t - 15.0) + 10.0); }

inline double lerp(double a, double b, double t) { return a + (b - a) * t; }

}  // namespace

double perlin(double x, double y, std::uint64_t seed) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const std::int64_t ix = static_cast<std::int64_t>(fx);
  const std::int64_t iy = static_cast<std::int64_t>(fy);
  const double sx = x - fx;
  const double sy = y - fy;

  double g00x, g00y, g10x, g10y, g01x, g01y, g11x, g11y;
  corner_gradient(ix, iy, seed, g00x, g00y);
  corner_gradient(ix + 1, iy, seed, g10x, g10y);
  corner_gradient(ix, iy + 1, seed, g01x, g01y);
  corner_gradient(ix + 1, iy + 1, seed, g11x, g11y);

  const double n00 = g00x * sx + g00y * sy;
  const double n10 = g10x * (sx - 1.0) + g10y * sy;
  const double n01 = g01x * sx + g01y * (sy - 1.0);
  const double n11 = g11x * (sx - 1.0) + g11y * (sy - 1.0);

  const double u = fade(sx);
  const double v = fade(sy);
  const double value = lerp(lerp(n00, n10, u), lerp(n01, n11, u), v);
  // sqrt(2) rescales the raw +-sqrt(2)/2 range onto [-1, 1].
  return std::numbers::sqrt2 * value;
}

TerrainField::TerrainField(Rect bounds, TerrainParams params,
                           std::uint64_t seed)
    : bounds_(bounds), params_(params), seed_(seed) {
  if (!bounds_.valid())
    throw std::invalid_argument("TerrainField: bounds must be non-empty");
  nx_ = static_cast<std::size_t>(
            std::ceil(bounds_.width() / params_.grid_step)) +
        1;
  ny_ = static_cast<std::size_t>(
            std::ceil(bounds_.height() / params_.grid_step)) +
        1;
  nx_ = std::max<std::size_t>(nx_, 2);
  ny_ = std::max<std::size_t>(ny_, 2);
  grid_.resize(nx_ * ny_);
  const double dx = bounds_.width() / static_cast<double>(nx_ - 1);
  const double dy = bounds_.height() / static_cast<double>(ny_ - 1);
  for (std::size_t j = 0; j < ny_; ++j) {
    for (std::size_t i = 0; i < nx_; ++i) {
      grid_[j * nx_ + i] =
          height(bounds_.min_x + dx * static_cast<double>(i),
                 bounds_.min_y + dy * static_cast<double>(j));
    }
  }
}

double TerrainField::height(double x, double y) const {
  double sum = 0.0;
  double amplitude = params_.base_amplitude;
  double frequency = 1.0 / params_.base_wavelength;
  for (int octave = 0; octave < params_.octaves; ++octave) {
    if (amplitude != 0.0) {
      const std::uint64_t octave_seed =
          derive_seed(seed_, static_cast<std::uint64_t>(octave));
      sum += amplitude * perlin(x * frequency, y * frequency, octave_seed);
    }
    amplitude *= params_.persistence;
    frequency *= params_.lacunarity;
  }
  return sum;
}

geom::TriangleMesh TerrainField::to_mesh() const {
  geom::TriangleMesh mesh;
  mesh.vertices.reserve(nx_ * ny_);
  const double dx = bounds_.width() / static_cast<double>(nx_ - 1);
  const double dy = bounds_.height() / static_cast<double>(ny_ - 1);
  for (std::size_t j = 0; j < ny_; ++j) {
    for (std::size_t i = 0; i < nx_; ++i) {
      mesh.vertices.emplace_back(bounds_.min_x + dx * static_cast<double>(i),
                                 bounds_.min_y + dy * static_cast<double>(j),
                                 grid_[j * nx_ + i]);
    }
  }
  auto vid = [&](std::size_t i, std::size_t j) {
    return static_cast<std::uint32_t>(j * nx_ + i);
  };
  mesh.triangles.reserve(2 * (nx_ - 1) * (ny_ - 1));
  for (std::size_t j = 0; j + 1 < ny_; ++j) {
    for (std::size_t i = 0; i + 1 < nx_; ++i) {
      // Upward-facing winding.
      mesh.triangles.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      mesh.triangles.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }
  return mesh;
}

TerrainField generate_terrain(const Rect& bounds, const TerrainParams& params,
                              std::uint64_t seed) {
  return TerrainField(bounds, params, seed);
}

}  // namespace reefscan::sim
