#pragma once

#include "texcomp/geometry/mesh.hpp"

#include <filesystem>

namespace texcomp {

// Masks are one-channel images holding exactly 0 (masked) or 1 (unmasked);
// on disk they are 8-bit gray with 255 for unmasked.
//
//   transferred      A    colors copied from the partial scan
//   missing_mask     M    unmasked where A holds an observed color
//   background_mask  M_b  unmasked inside the rasterized uv triangles
//   coarse           A_c  A with vertex colors projected into the holes
//   coarse_mask      M_c  M plus the texels filled by projection
struct AtlasMaskSet {
  Image transferred;
  Image missing_mask;
  Image background_mask;
  Image coarse;
  Image coarse_mask;
};

constexpr double kDefaultTransferDistance = 0.02;
const Rgb kBackgroundColor{0.5, 0.5, 0.5};

// For every texel covered by a uv triangle of `completed`, casts a line along
// the interpolated vertex normal through the texel's surface point and copies
// the partial scan's color at the nearest hit within max_distance. The
// completed mesh must carry uvs and an allocated atlas (its size sets the
// atlas resolution). Throws frame_mismatch when the partial scan is not
// contained in the completed mesh's box grown by 10% of its diagonal.
AtlasMaskSet transfer_texture_raycast(const TexturedMesh& completed, const TexturedMesh& partial,
                                      double max_distance = kDefaultTransferDistance);

// Fills M-masked covered texels with barycentric vertex colors of the
// covering triangle, producing A_c and M_c in `set`.
void project_vertex_colors(AtlasMaskSet& set, const TexturedMesh& completed);

// A where M is unmasked, the inpainted color where M is masked inside the
// charts, and the background color elsewhere.
Image compose_final_texture(const Image& inpainted, const Image& transferred, const Image& missing_mask,
                            const Image& background_mask, const Rgb& background = kBackgroundColor);

// Extends chart colors `rings` texels into the background so bilinear lookups
// at chart borders do not pick up the background color.
void pad_chart_borders(Image& atlas, const Image& background_mask, int rings);

// Atlas holding the barycentric interpolation of vertex colors over every
// covered texel; the rest is background.
Image render_vertex_colors(const TexturedMesh& completed, const Rgb& background = kBackgroundColor);

std::size_t count_unmasked(const Image& mask);

void save_mask(const std::filesystem::path& path, const Image& mask);
Image load_mask(const std::filesystem::path& path);

}  // namespace texcomp
