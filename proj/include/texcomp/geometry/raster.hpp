#pragma once

#include "texcomp/geometry/mesh.hpp"

#include <array>
#include <functional>

namespace texcomp {

using TexelVisitor = std::function<void(int x, int y, const Vec3& bary)>;
using MeshTexelVisitor = std::function<void(int x, int y, int face, const Vec3& bary)>;

// Visits every texel whose center lies inside the uv triangle. Vertices are
// snapped to 1/256 texel and tested with exact integer edge functions and a
// top-left fill rule, so two triangles sharing an edge never claim the same
// texel. Barycentric weights refer to the corners in the given order.
void rasterize_uv_triangle(const std::array<Vec2, 3>& uv, int width, int height,
                           const TexelVisitor& visit);

// Rasterizes every triangle of the mesh in face order. Throws if the mesh has
// no uvs.
void rasterize_uv(const TexturedMesh& mesh, int width, int height,
                  const MeshTexelVisitor& visit);

// Per-texel count of covering triangles.
std::vector<int> uv_coverage_counts(const TexturedMesh& mesh, int width, int height);

// Grows covered texels outward into uncovered ones (mean of covered
// 8-neighbors), `iterations` rings. Keeps bilinear lookups near chart borders
// from bleeding background color.
void dilate_atlas(Image& atlas, std::vector<std::uint8_t>& covered, int iterations);

}  // namespace texcomp
