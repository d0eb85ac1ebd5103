#pragma once

#include "texcomp/geometry/mesh.hpp"
#include "texcomp/geometry/voxel.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace texcomp {

using Containment = std::function<bool(const Vec3&)>;

struct SampleOptions {
  int bank_size = 100000;
  int voxel_points = 100000;  // surface samples used to voxelize the partial scan
  double sigma_near = 0.01;
  double sigma_far = 0.1;
  // Accept a ground truth with boundary edges; labels then come from a
  // winding number that is no longer exactly 0 or 1 near the openings.
  bool allow_open_ground_truth = false;
};

struct TrainingSample {
  std::string name;
  VoxelGrid occupancy;   // partial-scan occupancy grid
  ColorVoxelGrid colors;  // partial-scan color grid

  // Shape bank: the first `near_count` points carry sigma_near noise, the rest
  // sigma_far. Labels are 1 inside the ground truth.
  std::vector<Vec3> shape_points;
  std::vector<float> shape_labels;
  int near_count = 0;

  // Texture bank: noise-free ground-truth surface points and their colors.
  std::vector<Vec3> texture_points;
  std::vector<Rgb> texture_colors;
};

// Both meshes must already be in the normalized frame of the ground truth.
// Occupancy labels use `inside` when given (analytic fixtures), otherwise the
// generalized winding number of the ground truth.
TrainingSample build_training_sample(const TexturedMesh& ground_truth, const TexturedMesh& partial,
                                     int resolution, std::uint64_t seed,
                                     const SampleOptions& options = {},
                                     const Containment& inside = {});

}  // namespace texcomp
