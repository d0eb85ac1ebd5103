#include "texcomp/texture/atlas_masks.hpp"

#include "texcomp/error.hpp"
#include "texcomp/geometry/bvh.hpp"
#include "texcomp/geometry/raster.hpp"

#include <algorithm>

namespace texcomp {
namespace {

void require_layout(const TexturedMesh& mesh) {
  if (!mesh.empty() && !mesh.has_uvs()) throw Error(Errc::missing_uv, "completed mesh has no uv layout");
  if (!mesh.has_atlas()) throw Error(Errc::missing_atlas, "completed mesh has no atlas to fill");
}

void require_same_size(const Image& a, const Image& b, const char* what) {
  if (a.width != b.width || a.height != b.height)
    throw Error(Errc::invalid_argument, std::string(what) + ": images differ in size (" + std::to_string(a.width) +
                                            "x" + std::to_string(a.height) + " vs " + std::to_string(b.width) +
                                            "x" + std::to_string(b.height) + ")");
}

void check_frames(const TexturedMesh& completed, const TexturedMesh& partial) {
  if (partial.vertices.empty() || completed.vertices.empty()) return;
  const BoundingBox inner = bounding_box(partial);
  const BoundingBox outer = bounding_box(completed);
  const double margin = 0.1 * outer.extent().norm();
  if ((inner.min.array() < outer.min.array() - margin).any() || (inner.max.array() > outer.max.array() + margin).any())
    throw Error(Errc::frame_mismatch, "partial scan extends beyond the completed mesh; are both normalized with "
                                      "the same transform?");
}

}  // namespace

AtlasMaskSet transfer_texture_raycast(const TexturedMesh& completed, const TexturedMesh& partial,
                                      double max_distance) {
  require_layout(completed);
  if (!(max_distance >= 0.0)) throw Error(Errc::invalid_argument, "max_distance must be non-negative");
  if (!partial.empty() && !partial.has_atlas() && !partial.has_vertex_colors())
    throw Error(Errc::missing_colors, "partial scan has no texture to transfer");
  check_frames(completed, partial);

  const int w = completed.atlas.width, h = completed.atlas.height;
  AtlasMaskSet set;
  set.transferred = Image(w, h, 3, 0.0f);
  set.missing_mask = Image(w, h, 1, 0.0f);
  set.background_mask = Image(w, h, 1, 0.0f);

  const TriangleBvh bvh = partial.empty() ? TriangleBvh() : TriangleBvh(partial);
  const std::vector<Vec3> normals = vertex_normals(completed);
  rasterize_uv(completed, w, h, [&](int x, int y, int face, const Vec3& bary) {
    set.background_mask.at(x, y) = 1.0f;
    if (bvh.empty()) return;
    const Triangle& t = completed.triangles[face];
    Vec3 n = bary[0] * normals[t[0]] + bary[1] * normals[t[1]] + bary[2] * normals[t[2]];
    if (n.norm() < 1e-12) n = face_normal(completed, face);
    if (n.norm() < 1e-12) return;
    const auto hit = bvh.nearest_line_hit(interpolate_position(completed, face, bary), n.normalized(), max_distance);
    if (!hit) return;
    set.transferred.set_rgb(x, y, surface_color(partial, hit->face, hit->bary).cwiseMax(0.0).cwiseMin(1.0));
    set.missing_mask.at(x, y) = 1.0f;
  });
  set.coarse = set.transferred;
  set.coarse_mask = set.missing_mask;
  return set;
}

void project_vertex_colors(AtlasMaskSet& set, const TexturedMesh& completed) {
  require_layout(completed);
  if (completed.vertex_colors.size() != completed.vertices.size())
    throw Error(Errc::missing_colors, "completed mesh has no vertex colors to project");
  require_same_size(completed.atlas, set.transferred, "project_vertex_colors");
  set.coarse = set.transferred;
  set.coarse_mask = set.missing_mask;
  rasterize_uv(completed, set.coarse.width, set.coarse.height, [&](int x, int y, int face, const Vec3& bary) {
    if (set.missing_mask.at(x, y) != 0.0f) return;
    const Triangle& t = completed.triangles[face];
    const Rgb c = bary[0] * completed.vertex_colors[t[0]] + bary[1] * completed.vertex_colors[t[1]] +
                  bary[2] * completed.vertex_colors[t[2]];
    set.coarse.set_rgb(x, y, c);
    set.coarse_mask.at(x, y) = 1.0f;
  });
}

Image compose_final_texture(const Image& inpainted, const Image& transferred, const Image& missing_mask,
                            const Image& background_mask, const Rgb& background) {
  require_same_size(inpainted, transferred, "compose_final_texture");
  require_same_size(missing_mask, transferred, "compose_final_texture");
  require_same_size(background_mask, transferred, "compose_final_texture");
  Image out(transferred.width, transferred.height, 3);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) {
      if (missing_mask.at(x, y) != 0.0f) {
        for (int c = 0; c < 3; ++c) out.at(x, y, c) = transferred.at(x, y, c);
      } else if (background_mask.at(x, y) != 0.0f) {
        for (int c = 0; c < 3; ++c) out.at(x, y, c) = std::clamp(inpainted.at(x, y, c), 0.0f, 1.0f);
      } else {
        out.set_rgb(x, y, background);
      }
    }
  return out;
}

void pad_chart_borders(Image& atlas, const Image& background_mask, int rings) {
  require_same_size(atlas, background_mask, "pad_chart_borders");
  std::vector<std::uint8_t> covered(std::size_t(atlas.width) * atlas.height);
  for (std::size_t i = 0; i < covered.size(); ++i) covered[i] = background_mask.pixels[i] != 0.0f;
  dilate_atlas(atlas, covered, rings);
}

Image render_vertex_colors(const TexturedMesh& completed, const Rgb& background) {
  require_layout(completed);
  if (completed.vertex_colors.size() != completed.vertices.size())
    throw Error(Errc::missing_colors, "completed mesh has no vertex colors to render");
  Image out(completed.atlas.width, completed.atlas.height, 3);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) out.set_rgb(x, y, background);
  rasterize_uv(completed, out.width, out.height, [&](int x, int y, int face, const Vec3& bary) {
    const Triangle& t = completed.triangles[face];
    out.set_rgb(x, y, bary[0] * completed.vertex_colors[t[0]] + bary[1] * completed.vertex_colors[t[1]] +
                          bary[2] * completed.vertex_colors[t[2]]);
  });
  return out;
}

std::size_t count_unmasked(const Image& mask) {
  return std::size_t(std::count_if(mask.pixels.begin(), mask.pixels.end(), [](float v) { return v != 0.0f; }));
}

void save_mask(const std::filesystem::path& path, const Image& mask) {
  if (mask.channels != 1) throw Error(Errc::invalid_argument, "masks have one channel");
  write_png(path, mask);
}

Image load_mask(const std::filesystem::path& path) {
  Image m = read_png(path);
  if (m.channels != 1) throw Error(Errc::invalid_argument, path.string() + " is not a one-channel mask");
  for (float& v : m.pixels) v = v >= 0.5f ? 1.0f : 0.0f;
  return m;
}

}  // namespace texcomp
