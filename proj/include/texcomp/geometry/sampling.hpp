#pragma once

#include "texcomp/geometry/mesh.hpp"

#include <cstdint>
#include <vector>

namespace texcomp {

struct PointSample {
  std::vector<Vec3> positions;
  std::vector<Rgb> colors;     // empty when the source had no texture
  std::vector<int> faces;      // empty when the points have no source mesh
  std::vector<Vec3> barycentrics;

  std::size_t size() const { return positions.size(); }
  bool has_colors() const { return !colors.empty(); }
};

// Area-uniform surface samples. Colors are filled from the atlas (or vertex
// colors) when the mesh carries them. Deterministic in (mesh, count, seed).
PointSample sample_surface_points(const TexturedMesh& mesh, std::size_t count,
                                  std::uint64_t seed);

// Independent, reproducible stream seeds derived from one user seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Bilinear atlas sample at the barycentric uv of the face.
Rgb atlas_lookup(const TexturedMesh& mesh, int face, const Vec3& bary);

}  // namespace texcomp
