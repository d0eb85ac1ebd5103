#pragma once

#include "texcomp/implicit/joint_model.hpp"

#include <cstddef>

namespace texcomp {
inline namespace TEXCOMP_PRECISION_NS {

constexpr std::size_t kDefaultChunkPoints = 32 * 32 * 32;

// Occupancy probability at the center of every voxel of an
// out_resolution^3 lattice, evaluated chunk_points queries at a time.
Volume predict_occupancy_volume(const JointModel& model, const VoxelGrid& occupancy, int out_resolution,
                                std::size_t chunk_points = kDefaultChunkPoints);

// Geometry of the completed scan: the 0.5 level set of the volume.
TexturedMesh extract_completed_mesh(const Volume& probabilities, double threshold = 0.5);

// One color in [0, 1]^3 per mesh vertex. Vertices outside the unit cube are
// clamped onto it before querying; their number goes to *clamped.
std::vector<Rgb> predict_vertex_colors(const JointModel& model, const VoxelGrid& occupancy,
                                       const ColorVoxelGrid& colors, const TexturedMesh& mesh,
                                       std::size_t chunk_points = kDefaultChunkPoints,
                                       std::size_t* clamped = nullptr);

struct CompletionOptions {
  int out_resolution = 256;
  std::size_t chunk_points = kDefaultChunkPoints;
  int voxel_points = 100000;  // surface samples used to voxelize the scan
  std::uint64_t seed = 0;
};

struct Completion {
  ScanGrids inputs;
  Volume probabilities;
  TexturedMesh mesh;  // geometry plus vertex colors
};

// Full coarse completion of a normalized partial scan.
Completion complete_scan(const JointModel& model, const TexturedMesh& partial, const CompletionOptions& options);

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp
