#include "texcomp/geometry/marching_cubes.hpp"

#include <unordered_map>

namespace texcomp {
namespace {

// Corner c of a cell sits at offset (c & 1, (c >> 1) & 1, (c >> 2) & 1).
struct CaseTable {
  std::array<std::array<int, 2>, 12> edge_corners{};
  std::array<std::vector<std::array<int, 3>>, 256> triangles;  // edge ids
  std::array<std::vector<std::vector<int>>, 256> center_loops;  // for ids >= 12

  CaseTable() {
    int edge_id[8][8];
    int e = 0;
    for (int a = 0; a < 8; ++a)
      for (int axis = 0; axis < 3; ++axis)
        if (!(a & (1 << axis))) {
          const int b = a | (1 << axis);
          edge_corners[e] = {a, b};
          edge_id[a][b] = edge_id[b][a] = e;
          ++e;
        }

    // Face corners in counter-clockwise order seen from outside the cell.
    std::array<std::array<int, 4>, 6> faces{};
    int f = 0;
    for (int axis = 0; axis < 3; ++axis) {
      const int u = (axis + 1) % 3, v = (axis + 2) % 3;
      for (int side = 0; side < 2; ++side) {
        const int uv[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        for (int k = 0; k < 4; ++k) {
          const int src = side ? k : 3 - k;
          faces[f][k] = (side << axis) | (uv[src][0] << u) | (uv[src][1] << v);
        }
        ++f;
      }
    }

    for (int mask = 0; mask < 256; ++mask) triangles[mask] = polygonize(mask, faces, edge_id, center_loops[mask]);

    // Orient so normals leave the inside region: check the single-corner case.
    const auto& t = triangles[1].front();
    auto mid = [&](int edge) {
      Vec3 p = Vec3::Zero();
      for (int c : edge_corners[edge]) p += Vec3(c & 1, (c >> 1) & 1, (c >> 2) & 1);
      return Vec3(0.5 * p);
    };
    const Vec3 n = (mid(t[1]) - mid(t[0])).cross(mid(t[2]) - mid(t[0]));
    const Vec3 centroid = (mid(t[0]) + mid(t[1]) + mid(t[2])) / 3.0;
    if (n.dot(centroid) < 0.0)
      for (auto& list : triangles)
        for (auto& tri : list) std::swap(tri[1], tri[2]);
  }

  bool share_face(int e0, int e1) const {
    const int corners[4] = {edge_corners[e0][0], edge_corners[e0][1], edge_corners[e1][0], edge_corners[e1][1]};
    for (int axis = 0; axis < 3; ++axis) {
      const int bit = corners[0] & (1 << axis);
      bool same = true;
      for (int c : corners) same &= (c & (1 << axis)) == bit;
      if (same) return true;
    }
    return false;
  }

  std::vector<std::array<int, 3>> polygonize(int mask,
                                                    const std::array<std::array<int, 4>, 6>& faces,
                                                    const int (&edge_id)[8][8],
                                                    std::vector<std::vector<int>>& center_loops) const {
    auto inside = [mask](int c) { return bool(mask & (1 << c)); };
    std::array<int, 12> next;
    next.fill(-1);
    for (const auto& q : faces) {
      auto crossing = [&](int k) { return inside(q[k]) != inside(q[(k + 1) % 4]); };
      for (int k = 0; k < 4; ++k) {
        // An inside->outside crossing closes an inside arc; link it to the
        // crossing that opened the same arc, cutting that arc off alone.
        if (!crossing(k) || !inside(q[k])) continue;
        int j = (k + 3) % 4;
        while (!crossing(j)) j = (j + 3) % 4;
        next[edge_id[q[k]][q[(k + 1) % 4]]] = edge_id[q[j]][q[(j + 1) % 4]];
      }
    }
    std::vector<std::array<int, 3>> tris;
    std::array<bool, 12> seen{};
    for (int start = 0; start < 12; ++start) {
      if (next[start] < 0 || seen[start]) continue;
      std::vector<int> loop;
      for (int e = start; !seen[e]; e = next[e]) {
        seen[e] = true;
        loop.push_back(e);
      }
      const int n = int(loop.size());
      // A fan diagonal lying in a cube face could be produced again by the
      // neighboring cell; pick a fan apex whose diagonals avoid the faces.
      int apex = -1;
      for (int s = 0; s < n && apex < 0; ++s) {
        bool ok = true;
        for (int d = 2; d + 1 < n && ok; ++d) ok = !share_face(loop[s], loop[(s + d) % n]);
        if (ok) apex = s;
      }
      if (apex >= 0) {
        for (int d = 1; d + 1 < n; ++d)
          tris.push_back({loop[apex], loop[(apex + d) % n], loop[(apex + d + 1) % n]});
      } else {
        // Ids from 12 up name the centroid of a loop.
        const int center = 12 + int(center_loops.size());
        center_loops.push_back(loop);
        for (int d = 0; d < n; ++d) tris.push_back({center, loop[d], loop[(d + 1) % n]});
      }
    }
    return tris;
  }
};

const CaseTable& case_table() {
  static const CaseTable table;
  return table;
}

}  // namespace

TexturedMesh marching_cubes(const Volume& volume, double threshold) {
  TexturedMesh mesh;
  const int n = volume.resolution;
  if (n <= 0) return mesh;
  const int p = n + 2;  // padded lattice
  const CaseTable& table = case_table();

  auto value = [&](int i, int j, int k) -> double {
    if (i == 0 || j == 0 || k == 0 || i == p - 1 || j == p - 1 || k == p - 1) return 0.0;
    return volume.values[voxel_index(n, i - 1, j - 1, k - 1)];
  };
  auto position = [&](int i, int j, int k) {
    return Vec3(kDomainMin + (i - 0.5) / n, kDomainMin + (j - 0.5) / n, kDomainMin + (k - 0.5) / n);
  };

  std::unordered_map<std::uint64_t, int> vertex_of_edge;
  auto edge_vertex = [&](int i, int j, int k, int a, int b, double va, double vb) {
    const int lo = std::min(a, b);
    const int axis = (a ^ b) == 1 ? 0 : (a ^ b) == 2 ? 1 : 2;
    const int li = i + (lo & 1), lj = j + ((lo >> 1) & 1), lk = k + ((lo >> 2) & 1);
    const std::uint64_t key = ((std::uint64_t(li) * p + lj) * p + lk) * 3 + axis;
    auto [it, inserted] = vertex_of_edge.try_emplace(key, int(mesh.vertices.size()));
    if (inserted) {
      const Vec3 pa = position(i + (a & 1), j + ((a >> 1) & 1), k + ((a >> 2) & 1));
      const Vec3 pb = position(i + (b & 1), j + ((b >> 1) & 1), k + ((b >> 2) & 1));
      const double t = (threshold - va) / (vb - va);
      // Crossings against the padding layer can fall outside the domain.
      const Vec3 v = pa + t * (pb - pa);
      mesh.vertices.push_back(v.cwiseMax(kDomainMin).cwiseMin(kDomainMax));
    }
    return it->second;
  };

  for (int i = 0; i + 1 < p; ++i)
    for (int j = 0; j + 1 < p; ++j)
      for (int k = 0; k + 1 < p; ++k) {
        double v[8];
        int mask = 0;
        for (int c = 0; c < 8; ++c) {
          v[c] = value(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
          if (v[c] > threshold) mask |= 1 << c;
        }
        if (mask == 0 || mask == 255) continue;
        auto vertex = [&](int edge) {
          const auto [a, b] = table.edge_corners[edge];
          return edge_vertex(i, j, k, a, b, v[a], v[b]);
        };
        std::vector<int> centers;
        for (const auto& loop : table.center_loops[mask]) {
          Vec3 c = Vec3::Zero();
          for (int edge : loop) c += mesh.vertices[vertex(edge)];
          centers.push_back(int(mesh.vertices.size()));
          mesh.vertices.push_back(c / double(loop.size()));
        }
        for (const auto& tri : table.triangles[mask]) {
          Triangle t{};
          for (int s = 0; s < 3; ++s) t[s] = tri[s] < 12 ? vertex(tri[s]) : centers[tri[s] - 12];
          mesh.triangles.push_back(t);
        }
      }
  return mesh;
}

TexturedMesh marching_cubes(const VoxelGrid& grid, double threshold) {
  return marching_cubes(to_volume(grid), threshold);
}

}  // namespace texcomp
