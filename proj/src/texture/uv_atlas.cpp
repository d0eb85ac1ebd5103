#include "texcomp/texture/uv_atlas.hpp"

#include "texcomp/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <unordered_map>

namespace texcomp {
namespace {

using Tri2 = std::array<Vec2, 3>;

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b);
}

// Label 2*axis + (normal points along -axis).
int dominant_label(const Vec3& n) {
  int axis = 0;
  n.cwiseAbs().maxCoeff(&axis);
  return 2 * axis + (n[axis] < 0.0 ? 1 : 0);
}

// Projection onto the plane orthogonal to the label axis; mirrored for
// negative labels so that outward triangles keep counter-clockwise uvs.
Vec2 project(const Vec3& p, int label) {
  const int axis = label / 2;
  Vec2 q(p[(axis + 1) % 3], p[(axis + 2) % 3]);
  if (label % 2) q.x() = -q.x();
  return q;
}

bool separated_along(const Tri2& a, const Tri2& b, const Vec2& normal, double eps) {
  double amin = INFINITY, amax = -INFINITY, bmin = INFINITY, bmax = -INFINITY;
  for (int k = 0; k < 3; ++k) {
    const double pa = normal.dot(a[k]), pb = normal.dot(b[k]);
    amin = std::min(amin, pa), amax = std::max(amax, pa);
    bmin = std::min(bmin, pb), bmax = std::max(bmax, pb);
  }
  return amax <= bmin + eps || bmax <= amin + eps;
}

// Interiors overlap; triangles that only touch along edges or corners do not.
bool interiors_overlap(const Tri2& a, const Tri2& b, double eps) {
  for (const Tri2* t : {&a, &b})
    for (int e = 0; e < 3; ++e) {
      const Vec2 d = (*t)[(e + 1) % 3] - (*t)[e];
      const double len = d.norm();
      if (len == 0.0) continue;
      if (separated_along(a, b, Vec2(-d.y(), d.x()) / len, eps)) return false;
    }
  return true;
}

class CellHash {
 public:
  explicit CellHash(double cell) : cell_(cell) {}

  template <typename F>
  void for_cells(const Tri2& t, F&& f) const {
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const Vec2& p : t) {
      x0 = std::min(x0, p.x()), x1 = std::max(x1, p.x());
      y0 = std::min(y0, p.y()), y1 = std::max(y1, p.y());
    }
    for (long i = long(std::floor(x0 / cell_)); i <= long(std::floor(x1 / cell_)); ++i)
      for (long j = long(std::floor(y0 / cell_)); j <= long(std::floor(y1 / cell_)); ++j)
        f((std::uint64_t(std::uint32_t(i)) << 32) | std::uint32_t(j));
  }
  void insert(const Tri2& t, int face) {
    for_cells(t, [&](std::uint64_t key) { cells_[key].push_back(face); });
  }
  template <typename F>
  bool any_of(const Tri2& t, F&& pred) const {
    bool hit = false;
    for_cells(t, [&](std::uint64_t key) {
      if (hit) return;
      auto it = cells_.find(key);
      if (it == cells_.end()) return;
      for (int f : it->second)
        if (pred(f)) {
          hit = true;
          return;
        }
    });
    return hit;
  }

 private:
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

struct Chart {
  int label = 0;
  std::vector<int> faces;
  Vec2 min = Vec2::Constant(INFINITY);
  Vec2 max = Vec2::Constant(-INFINITY);
};

struct Placement {
  int x = 0, y = 0;
};

// Shelf packing of rectangles sorted by decreasing height. Returns false when
// the shelves run past the top of the atlas.
bool shelf_pack(const std::vector<std::array<int, 2>>& sizes, const std::vector<int>& order, int resolution,
                std::vector<Placement>& placed) {
  placed.assign(sizes.size(), {});
  int x = 0, y = 0, shelf = 0;
  for (int c : order) {
    const auto [w, h] = sizes[c];
    if (w > resolution) return false;
    if (x + w > resolution) {
      y += shelf;
      x = 0;
      shelf = 0;
    }
    if (y + h > resolution) return false;
    placed[c] = {x, y};
    x += w;
    shelf = std::max(shelf, h);
  }
  return true;
}

}  // namespace

TexturedMesh generate_uv_atlas(const TexturedMesh& mesh, const UvAtlasOptions& options) {
  if (options.resolution <= 0 || options.gutter < 0)
    throw Error(Errc::invalid_argument, "atlas resolution must be positive and the gutter non-negative");
  TexturedMesh out;
  out.vertices = mesh.vertices;
  out.triangles = mesh.triangles;
  out.vertex_colors = mesh.vertex_colors;
  if (mesh.empty()) return out;

  const int faces = int(mesh.triangles.size());
  std::unordered_map<std::uint64_t, std::vector<int>> edge_faces;
  double edge_length = 0.0;
  for (int f = 0; f < faces; ++f)
    for (int k = 0; k < 3; ++k) {
      const int a = mesh.triangles[f][k], b = mesh.triangles[f][(k + 1) % 3];
      edge_faces[edge_key(a, b)].push_back(f);
      edge_length += (mesh.vertices[a] - mesh.vertices[b]).norm();
    }
  edge_length /= 3.0 * faces;
  const double cell = std::max(2.0 * edge_length, 1e-9);
  const double eps = 1e-9 * cell;

  std::vector<Vec3> normal(faces);
  std::vector<int> label(faces);
  for (int f = 0; f < faces; ++f) {
    normal[f] = face_normal(mesh, f);
    label[f] = dominant_label(normal[f]);
  }
  // Marching-cubes staircases alternate between axis-aligned and diagonal
  // faces, so per-face labels shatter into tiny charts. Labels follow a
  // normal smoothed over the neighborhood instead, restricted to axes the
  // face itself still faces with cosine >= kMinCosine; that keeps texel
  // density within a factor 1/kMinCosine across the atlas.
  constexpr double kMinCosine = 0.55;
  std::vector<std::vector<int>> neighbors(faces);
  for (int f = 0; f < faces; ++f)
    for (int k = 0; k < 3; ++k)
      for (int g : edge_faces[edge_key(mesh.triangles[f][k], mesh.triangles[f][(k + 1) % 3])])
        if (g != f) neighbors[f].push_back(g);
  std::vector<Vec3> smooth = normal;
  for (int round = 0; round < 8; ++round) {
    std::vector<Vec3> next(faces);
    for (int f = 0; f < faces; ++f) {
      Vec3 sum = smooth[f];
      for (int g : neighbors[f]) sum += smooth[g];
      next[f] = sum.normalized();
    }
    smooth.swap(next);
  }
  for (int f = 0; f < faces; ++f) {
    double best = -INFINITY;
    for (int l = 0; l < 6; ++l) {
      const double sign = l % 2 ? -1.0 : 1.0;
      if (sign * normal[f][l / 2] < kMinCosine) continue;
      if (sign * smooth[f][l / 2] > best) best = sign * smooth[f][l / 2], label[f] = l;
    }
  }
  std::vector<Tri2> projected(faces);
  for (int f = 0; f < faces; ++f)
    for (int k = 0; k < 3; ++k) projected[f][k] = project(mesh.corner(f, k), label[f]);

  std::vector<int> chart_of(faces, -1);
  std::vector<Chart> charts;
  for (int seed = 0; seed < faces; ++seed) {
    if (chart_of[seed] >= 0) continue;
    const int id = int(charts.size());
    charts.push_back({label[seed], {}, Vec2::Constant(INFINITY), Vec2::Constant(-INFINITY)});
    CellHash hash(cell);
    std::deque<int> queue{seed};
    chart_of[seed] = id;
    hash.insert(projected[seed], seed);
    while (!queue.empty()) {
      const int f = queue.front();
      queue.pop_front();
      charts[id].faces.push_back(f);
      for (int k = 0; k < 3; ++k) {
        const auto& around = edge_faces[edge_key(mesh.triangles[f][k], mesh.triangles[f][(k + 1) % 3])];
        for (int g : around) {
          if (chart_of[g] >= 0 || label[g] != label[seed]) continue;
          if (hash.any_of(projected[g], [&](int h) { return interiors_overlap(projected[g], projected[h], eps); }))
            continue;
          chart_of[g] = id;
          hash.insert(projected[g], g);
          queue.push_back(g);
        }
      }
    }
    for (int f : charts[id].faces)
      for (const Vec2& p : projected[f]) {
        charts[id].min = charts[id].min.cwiseMin(p);
        charts[id].max = charts[id].max.cwiseMax(p);
      }
  }

  const int res = options.resolution, gutter = options.gutter;
  std::vector<int> order(charts.size());
  std::iota(order.begin(), order.end(), 0);
  auto sizes_at = [&](double scale) {
    std::vector<std::array<int, 2>> sizes(charts.size());
    for (std::size_t c = 0; c < charts.size(); ++c) {
      const Vec2 extent = charts[c].max - charts[c].min;
      sizes[c] = {std::max(1, int(std::ceil(extent.x() * scale))) + 2 * gutter,
                  std::max(1, int(std::ceil(extent.y() * scale))) + 2 * gutter};
    }
    return sizes;
  };
  auto fits = [&](double scale, std::vector<Placement>& placed) {
    const auto sizes = sizes_at(scale);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return sizes[a][1] > sizes[b][1]; });
    return shelf_pack(sizes, order, res, placed);
  };

  double largest = 0.0;
  for (const Chart& c : charts) largest = std::max({largest, c.max.x() - c.min.x(), c.max.y() - c.min.y()});
  std::vector<Placement> placed;
  if (!fits(0.0, placed))
    throw Error(Errc::packing_failure, std::to_string(charts.size()) + " charts do not fit a " +
                                           std::to_string(res) + "^2 atlas");
  double lo = 0.0, hi = largest > 0.0 ? double(res) / largest : 1.0;
  for (int it = 0; it < 50; ++it) {
    const double mid = 0.5 * (lo + hi);
    (fits(mid, placed) ? lo : hi) = mid;
  }
  const double scale = lo;
  fits(scale, placed);

  double projected_area = 0.0;
  for (int f = 0; f < faces; ++f) {
    const Tri2& t = projected[f];
    projected_area += 0.5 * std::abs((t[1] - t[0]).x() * (t[2] - t[0]).y() - (t[1] - t[0]).y() * (t[2] - t[0]).x());
  }
  const double texels_per_triangle = scale * scale * projected_area / faces;
  if (texels_per_triangle < options.min_texels_per_triangle)
    throw Error(Errc::packing_failure, "only " + std::to_string(texels_per_triangle) +
                                           " texels per triangle at atlas size " + std::to_string(res) +
                                           "; the mesh has too many triangles");

  out.uvs.resize(std::size_t(3) * faces);
  for (std::size_t c = 0; c < charts.size(); ++c) {
    const Vec2 origin(placed[c].x + gutter, placed[c].y + gutter);
    for (int f : charts[c].faces)
      for (int k = 0; k < 3; ++k)
        out.uvs[3 * f + k] = (origin + (projected[f][k] - charts[c].min) * scale) / double(res);
  }
  out.atlas = Image(res, res, 3, 0.0f);
  return out;
}

std::vector<int> uv_chart_ids(const TexturedMesh& mesh) {
  if (!mesh.has_uvs()) throw Error(Errc::missing_uv, "mesh has no uv coordinates");
  const int faces = int(mesh.triangles.size());
  std::vector<int> parent(faces);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  // (edge, face, corner of the edge's first vertex)
  std::unordered_map<std::uint64_t, std::vector<std::pair<int, int>>> edges;
  for (int f = 0; f < faces; ++f)
    for (int k = 0; k < 3; ++k)
      edges[edge_key(mesh.triangles[f][k], mesh.triangles[f][(k + 1) % 3])].push_back({f, k});
  auto uv_of = [&](int f, int vertex) {
    for (int k = 0; k < 3; ++k)
      if (mesh.triangles[f][k] == vertex) return mesh.uv(f, k);
    return mesh.uv(f, 0);
  };
  for (const auto& [key, list] : edges)
    for (std::size_t i = 1; i < list.size(); ++i) {
      const auto [f, k] = list[0];
      const auto [g, l] = list[i];
      const int a = mesh.triangles[f][k], b = mesh.triangles[f][(k + 1) % 3];
      if (uv_of(f, a) == uv_of(g, a) && uv_of(f, b) == uv_of(g, b)) parent[find(f)] = find(g);
    }
  std::vector<int> ids(faces, -1);
  std::unordered_map<int, int> dense;
  for (int f = 0; f < faces; ++f) {
    const auto [it, fresh] = dense.emplace(find(f), int(dense.size()));
    ids[f] = it->second;
  }
  return ids;
}

}  // namespace texcomp
