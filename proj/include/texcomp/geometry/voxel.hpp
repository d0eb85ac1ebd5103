#pragma once

#include "texcomp/geometry/mesh.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace texcomp {

// Grids cover the cube [-0.5, 0.5]^3. Voxel (i, j, k) spans x in
// [-0.5 + i/N, -0.5 + (i+1)/N) and so on; storage is x-major:
// index = (i * N + j) * N + k.
constexpr double kDomainMin = -0.5;
constexpr double kDomainMax = 0.5;

inline std::size_t voxel_index(int n, int i, int j, int k) {
  return (static_cast<std::size_t>(i) * n + j) * n + k;
}

inline Vec3 voxel_center(int n, int i, int j, int k) {
  return {kDomainMin + (i + 0.5) / n, kDomainMin + (j + 0.5) / n,
          kDomainMin + (k + 0.5) / n};
}

struct VoxelGrid {
  int resolution = 0;
  std::vector<std::uint8_t> occupancy;

  VoxelGrid() = default;
  explicit VoxelGrid(int n)
      : resolution(n), occupancy(static_cast<std::size_t>(n) * n * n, 0) {}
  std::size_t occupied_count() const;
  friend bool operator==(const VoxelGrid&, const VoxelGrid&) = default;
};

// Unoccupied voxels hold (-1, -1, -1).
struct ColorVoxelGrid {
  int resolution = 0;
  std::vector<float> colors;  // 3 floats per voxel

  ColorVoxelGrid() = default;
  explicit ColorVoxelGrid(int n)
      : resolution(n), colors(static_cast<std::size_t>(n) * n * n * 3, -1.0f) {}
  bool occupied(std::size_t voxel) const { return colors[3 * voxel] >= 0.0f; }
  friend bool operator==(const ColorVoxelGrid&, const ColorVoxelGrid&) = default;
};

// Real-valued scalar volume on the same lattice (e.g. occupancy probability).
struct Volume {
  int resolution = 0;
  std::vector<float> values;

  Volume() = default;
  explicit Volume(int n, float fill = 0.0f)
      : resolution(n), values(static_cast<std::size_t>(n) * n * n, fill) {}
};

// Index of the voxel containing p. Points outside the domain are clamped to
// the boundary voxel and reported through *clamped.
std::array<int, 3> containing_voxel(const Vec3& p, int n, bool* clamped = nullptr);

VoxelGrid voxelize_occupancy(std::span<const Vec3> points, int resolution,
                             std::size_t* clamped_count = nullptr);

// Last write wins for points sharing a voxel.
ColorVoxelGrid voxelize_color(std::span<const Vec3> points, std::span<const Rgb> colors,
                              int resolution, std::size_t* clamped_count = nullptr);

// Network inputs for a textured scan: occupancy and color grids built from
// `points` area-uniform surface samples. Throws missing_colors when the mesh
// has neither an atlas nor vertex colors.
struct ScanGrids {
  VoxelGrid occupancy;
  ColorVoxelGrid colors;
};
ScanGrids voxelize_scan(const TexturedMesh& mesh, int resolution, std::size_t points,
                        std::uint64_t seed);

Volume to_volume(const VoxelGrid& grid);

// Raw little-endian payload at `path` and a one-line sidecar at
// `path` + ".hdr": "resolution=<N> type=<uint8|float32> channels=<C>
// domain=-0.5,0.5 order=x-major".
void save_voxel_grid(const std::filesystem::path& path, const VoxelGrid& grid);
void save_color_grid(const std::filesystem::path& path, const ColorVoxelGrid& grid);
void save_volume(const std::filesystem::path& path, const Volume& volume);
VoxelGrid load_voxel_grid(const std::filesystem::path& path);
ColorVoxelGrid load_color_grid(const std::filesystem::path& path);
Volume load_volume(const std::filesystem::path& path);

}  // namespace texcomp
