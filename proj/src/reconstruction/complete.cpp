#include "texcomp/reconstruction/complete.hpp"

#include "texcomp/error.hpp"
#include "texcomp/geometry/marching_cubes.hpp"
#include "texcomp/geometry/normalize.hpp"
#include "texcomp/geometry/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace texcomp {
inline namespace TEXCOMP_PRECISION_NS {

using nn::Real;
using nn::Tensor;

namespace {

void require_trained(const JointModel& model) {
  if (model.trained_steps <= 0)
    throw Error(Errc::untrained_model, "the model has never been optimized; run `texcomp train` first");
}

void require_grid(const JointModel& model, int resolution) {
  if (resolution != model.config().resolution)
    throw Error(Errc::resolution_mismatch, "input grid is " + std::to_string(resolution) + "^3, model expects " +
                                               std::to_string(model.config().resolution) + "^3");
}

Tensor chunk_tensor(std::span<const Vec3> points) {
  Tensor t({1, int(points.size()), 3});
  for (std::size_t i = 0; i < points.size(); ++i)
    for (int a = 0; a < 3; ++a) t.data[3 * i + a] = Real(points[i][a]);
  return t;
}

}  // namespace

Volume predict_occupancy_volume(const JointModel& model, const VoxelGrid& occupancy, int out_resolution,
                                std::size_t chunk_points) {
  require_trained(model);
  require_grid(model, occupancy.resolution);
  if (out_resolution <= 0 || (out_resolution & (out_resolution - 1)) != 0)
    throw Error(Errc::invalid_argument, "output resolution must be a power of two, got " +
                                            std::to_string(out_resolution));
  if (chunk_points == 0) throw Error(Errc::invalid_argument, "chunk size must be positive");

  const Pyramid shape = model.encode_shape(occupancy_tensor(occupancy));
  const int n = out_resolution;
  Volume out(n);
  const std::size_t total = out.values.size();
  std::vector<Vec3> points;
  points.reserve(std::min(chunk_points, total));
  for (std::size_t first = 0; first < total; first += chunk_points) {
    const std::size_t last = std::min(total, first + chunk_points);
    points.clear();
    for (std::size_t v = first; v < last; ++v) {
      const int i = int(v / (std::size_t(n) * n)), j = int(v / n % n), k = int(v % n);
      points.push_back(voxel_center(n, i, j, k));
    }
    const Tensor logits = model.decode_shape(shape, chunk_tensor(points));
    for (std::size_t v = first; v < last; ++v)
      out.values[v] = float(1.0 / (1.0 + std::exp(-double(logits.data[v - first]))));
  }
  return out;
}

TexturedMesh extract_completed_mesh(const Volume& probabilities, double threshold) {
  return marching_cubes(probabilities, threshold);
}

std::vector<Rgb> predict_vertex_colors(const JointModel& model, const VoxelGrid& occupancy,
                                       const ColorVoxelGrid& colors, const TexturedMesh& mesh,
                                       std::size_t chunk_points, std::size_t* clamped) {
  require_trained(model);
  require_grid(model, occupancy.resolution);
  require_grid(model, colors.resolution);
  if (mesh.vertices.empty()) throw Error(Errc::degenerate_mesh, "cannot color an empty mesh");
  if (chunk_points == 0) throw Error(Errc::invalid_argument, "chunk size must be positive");

  const Pyramid shape = model.encode_shape(occupancy_tensor(occupancy));
  const Pyramid texture = model.encode_texture(color_tensor(colors));
  std::vector<Rgb> out(mesh.vertices.size());
  std::vector<Vec3> points;
  std::size_t outside = 0;
  for (std::size_t first = 0; first < mesh.vertices.size(); first += chunk_points) {
    const std::size_t last = std::min(mesh.vertices.size(), first + chunk_points);
    points.clear();
    for (std::size_t v = first; v < last; ++v) {
      const Vec3& p = mesh.vertices[v];
      const Vec3 q = p.cwiseMax(kDomainMin).cwiseMin(kDomainMax);
      outside += (q != p);
      points.push_back(q);
    }
    const Tensor rgb = model.decode_texture(shape, texture, chunk_tensor(points));
    for (std::size_t v = first; v < last; ++v)
      for (int c = 0; c < 3; ++c) out[v][c] = std::clamp(double(rgb.data[3 * (v - first) + c]), 0.0, 1.0);
  }
  if (outside > 0)
    std::cerr << "warning: " << outside << " vertices outside the unit cube were clamped before color queries\n";
  if (clamped) *clamped = outside;
  return out;
}

Completion complete_scan(const JointModel& model, const TexturedMesh& partial, const CompletionOptions& options) {
  require_trained(model);
  if (!is_normalized(partial))
    throw Error(Errc::unnormalized_input, "partial scan must lie in [-0.5, 0.5]^3");
  Completion c;
  c.inputs = voxelize_scan(partial, model.config().resolution, std::size_t(options.voxel_points),
                           derive_seed(options.seed, 1));
  c.probabilities = predict_occupancy_volume(model, c.inputs.occupancy, options.out_resolution, options.chunk_points);
  c.mesh = extract_completed_mesh(c.probabilities);
  if (!c.mesh.vertices.empty())
    c.mesh.vertex_colors =
        predict_vertex_colors(model, c.inputs.occupancy, c.inputs.colors, c.mesh, options.chunk_points);
  return c;
}

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp
