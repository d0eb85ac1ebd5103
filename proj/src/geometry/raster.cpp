#include "texcomp/geometry/raster.hpp"

#include "texcomp/error.hpp"

#include <algorithm>
#include <cmath>

namespace texcomp {
namespace {

constexpr std::int64_t kSubpixel = 256;

struct Fixed {
  std::int64_t x, y;
};

std::int64_t edge(const Fixed& a, const Fixed& b, const Fixed& p) {
  return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
}

// Direction half-plane used to break ties on shared edges: of two opposite
// directions exactly one qualifies.
bool owns_edge(const Fixed& a, const Fixed& b) {
  const std::int64_t dx = b.x - a.x, dy = b.y - a.y;
  return dy > 0 || (dy == 0 && dx < 0);
}

}  // namespace

void rasterize_uv_triangle(const std::array<Vec2, 3>& uv, int width, int height,
                           const TexelVisitor& visit) {
  std::array<Fixed, 3> v{};
  for (int k = 0; k < 3; ++k) {
    v[k].x = std::llround(uv[k].x() * width * kSubpixel);
    v[k].y = std::llround((1.0 - uv[k].y()) * height * kSubpixel);
  }
  std::array<int, 3> order{0, 1, 2};
  std::int64_t area = edge(v[0], v[1], v[2]);
  if (area == 0) return;
  if (area < 0) {
    std::swap(order[1], order[2]);
    area = -area;
  }
  const Fixed& a = v[order[0]];
  const Fixed& b = v[order[1]];
  const Fixed& c = v[order[2]];
  const bool own_bc = owns_edge(b, c), own_ca = owns_edge(c, a), own_ab = owns_edge(a, b);

  const std::int64_t min_x = std::min({a.x, b.x, c.x}), max_x = std::max({a.x, b.x, c.x});
  const std::int64_t min_y = std::min({a.y, b.y, c.y}), max_y = std::max({a.y, b.y, c.y});
  // Texel x has its center at (2x + 1) * kSubpixel / 2.
  const int x0 = std::max(0, int((min_x - kSubpixel / 2) / kSubpixel) - 1);
  const int x1 = std::min(width - 1, int((max_x - kSubpixel / 2) / kSubpixel) + 1);
  const int y0 = std::max(0, int((min_y - kSubpixel / 2) / kSubpixel) - 1);
  const int y1 = std::min(height - 1, int((max_y - kSubpixel / 2) / kSubpixel) + 1);

  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const Fixed p{x * kSubpixel + kSubpixel / 2, y * kSubpixel + kSubpixel / 2};
      const std::int64_t w0 = edge(b, c, p), w1 = edge(c, a, p), w2 = edge(a, b, p);
      if (w0 < 0 || w1 < 0 || w2 < 0) continue;
      if ((w0 == 0 && !own_bc) || (w1 == 0 && !own_ca) || (w2 == 0 && !own_ab)) continue;
      Vec3 bary;
      bary[order[0]] = double(w0) / double(area);
      bary[order[1]] = double(w1) / double(area);
      bary[order[2]] = double(w2) / double(area);
      visit(x, y, bary);
    }
  }
}

void rasterize_uv(const TexturedMesh& mesh, int width, int height, const MeshTexelVisitor& visit) {
  if (mesh.empty()) return;
  if (!mesh.has_uvs()) throw Error(Errc::missing_uv, "mesh has no uv coordinates");
  for (int f = 0; f < int(mesh.triangles.size()); ++f) {
    rasterize_uv_triangle({mesh.uv(f, 0), mesh.uv(f, 1), mesh.uv(f, 2)}, width, height,
                          [&](int x, int y, const Vec3& bary) { visit(x, y, f, bary); });
  }
}

std::vector<int> uv_coverage_counts(const TexturedMesh& mesh, int width, int height) {
  std::vector<int> counts(std::size_t(width) * height, 0);
  rasterize_uv(mesh, width, height,
               [&](int x, int y, int, const Vec3&) { ++counts[std::size_t(y) * width + x]; });
  return counts;
}

void dilate_atlas(Image& atlas, std::vector<std::uint8_t>& covered, int iterations) {
  const int w = atlas.width, h = atlas.height;
  for (int it = 0; it < iterations; ++it) {
    std::vector<std::uint8_t> next = covered;
    Image grown = atlas;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (covered[std::size_t(y) * w + x]) continue;
        Rgb sum = Rgb::Zero();
        int n = 0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            if (!covered[std::size_t(ny) * w + nx]) continue;
            sum += atlas.rgb(nx, ny);
            ++n;
          }
        if (n > 0) {
          grown.set_rgb(x, y, sum / n);
          next[std::size_t(y) * w + x] = 1;
        }
      }
    atlas = std::move(grown);
    covered = std::move(next);
  }
}

}  // namespace texcomp
