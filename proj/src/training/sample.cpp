#include "texcomp/training/sample.hpp"

#include "texcomp/error.hpp"
#include "texcomp/geometry/containment.hpp"
#include "texcomp/geometry/normalize.hpp"
#include "texcomp/geometry/sampling.hpp"

#include <random>

namespace texcomp {

TrainingSample build_training_sample(const TexturedMesh& ground_truth, const TexturedMesh& partial,
                                     int resolution, std::uint64_t seed,
                                     const SampleOptions& options, const Containment& inside) {
  if (options.bank_size <= 0 || options.voxel_points <= 0)
    throw Error(Errc::invalid_argument, "bank and voxelization sizes must be positive");
  if (options.sigma_near < 0.0 || options.sigma_far < 0.0)
    throw Error(Errc::invalid_argument, "noise sigmas must be non-negative");
  if (!is_normalized(ground_truth) || !is_normalized(partial))
    throw Error(Errc::unnormalized_input, "ground truth and partial scan must lie in [-0.5, 0.5]^3");
  if (!ground_truth.has_atlas() && !ground_truth.has_vertex_colors())
    throw Error(Errc::missing_atlas, "ground truth has no texture to supervise colors");
  if (!inside && !options.allow_open_ground_truth && !is_watertight(ground_truth))
    throw Error(Errc::non_watertight, "ground truth is not closed; containment labels are undefined");

  TrainingSample out;
  auto grids = voxelize_scan(partial, resolution, std::size_t(options.voxel_points), derive_seed(seed, 1));
  out.occupancy = std::move(grids.occupancy);
  out.colors = std::move(grids.colors);

  const std::size_t bank = std::size_t(options.bank_size);
  const PointSample surface = sample_surface_points(ground_truth, bank, derive_seed(seed, 2));
  std::mt19937_64 noise_rng(derive_seed(seed, 3));
  std::normal_distribution<double> normal(0.0, 1.0);
  out.near_count = int(bank / 2);
  out.shape_points.resize(bank);
  for (std::size_t i = 0; i < bank; ++i) {
    const double sigma = int(i) < out.near_count ? options.sigma_near : options.sigma_far;
    Vec3 noise;
    for (int a = 0; a < 3; ++a) noise[a] = normal(noise_rng);
    out.shape_points[i] = surface.positions[i] + sigma * noise;
  }
  out.shape_labels.resize(bank);
  if (inside) {
    for (std::size_t i = 0; i < bank; ++i) out.shape_labels[i] = inside(out.shape_points[i]) ? 1.0f : 0.0f;
  } else {
    const auto flags = inside_by_winding_number(ground_truth, out.shape_points);
    for (std::size_t i = 0; i < bank; ++i) out.shape_labels[i] = float(flags[i]);
  }

  const PointSample texture = sample_surface_points(ground_truth, bank, derive_seed(seed, 4));
  out.texture_points = texture.positions;
  out.texture_colors.resize(bank);
  for (std::size_t i = 0; i < bank; ++i) out.texture_colors[i] = texture.colors[i].cwiseMax(0.0).cwiseMin(1.0);
  return out;
}

}  // namespace texcomp
