#include "texcomp/geometry/mesh.hpp"

#include "texcomp/error.hpp"
#include "texcomp/geometry/sampling.hpp"

#include <map>
#include <unordered_map>

namespace texcomp {

void TexturedMesh::validate() const {
  const int n = int(vertices.size());
  for (std::size_t f = 0; f < triangles.size(); ++f) {
    for (int idx : triangles[f]) {
      if (idx < 0 || idx >= n)
        throw Error(Errc::index_out_of_range,
                    "triangle " + std::to_string(f) + " references vertex " +
                        std::to_string(idx) + " of " + std::to_string(n));
    }
  }
  if (!uvs.empty()) {
    if (uvs.size() != 3 * triangles.size())
      throw Error(Errc::malformed_geometry, "uv count must be three per triangle");
    for (const Vec2& uv : uvs) {
      if (!(uv.x() >= 0.0 && uv.x() <= 1.0 && uv.y() >= 0.0 && uv.y() <= 1.0))
        throw Error(Errc::malformed_geometry, "uv coordinate outside [0,1]^2");
    }
  }
  if (!vertex_colors.empty() && vertex_colors.size() != vertices.size())
    throw Error(Errc::malformed_geometry, "vertex color count differs from vertex count");
  if (!atlas.pixels.empty() &&
      (atlas.width <= 0 || atlas.height <= 0 || atlas.channels != 3 ||
       atlas.pixels.size() != std::size_t(atlas.width) * atlas.height * 3))
    throw Error(Errc::malformed_geometry, "atlas must be a non-empty RGB image");
}

BoundingBox bounding_box(const TexturedMesh& mesh) {
  BoundingBox box;
  for (const Vec3& v : mesh.vertices) box.extend(v);
  return box;
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

double triangle_area(const TexturedMesh& mesh, int face) {
  return triangle_area(mesh.corner(face, 0), mesh.corner(face, 1), mesh.corner(face, 2));
}

double surface_area(const TexturedMesh& mesh) {
  double total = 0.0;
  for (int f = 0; f < int(mesh.triangles.size()); ++f) total += triangle_area(mesh, f);
  return total;
}

Vec3 face_normal(const TexturedMesh& mesh, int face) {
  const Vec3 n = (mesh.corner(face, 1) - mesh.corner(face, 0))
                     .cross(mesh.corner(face, 2) - mesh.corner(face, 0));
  const double len = n.norm();
  return len > 0.0 ? Vec3(n / len) : Vec3::Zero();
}

std::vector<Vec3> vertex_normals(const TexturedMesh& mesh) {
  std::vector<Vec3> normals(mesh.vertices.size(), Vec3::Zero());
  for (const Triangle& t : mesh.triangles) {
    // Cross product length is twice the area: area weighting for free.
    const Vec3 n = (mesh.vertices[t[1]] - mesh.vertices[t[0]])
                       .cross(mesh.vertices[t[2]] - mesh.vertices[t[0]]);
    for (int k : t) normals[k] += n;
  }
  for (Vec3& n : normals) {
    const double len = n.norm();
    if (len > 0.0) n /= len;
  }
  return normals;
}

Vec3 interpolate_position(const TexturedMesh& mesh, int face, const Vec3& bary) {
  return bary[0] * mesh.corner(face, 0) + bary[1] * mesh.corner(face, 1) +
         bary[2] * mesh.corner(face, 2);
}

Vec2 interpolate_uv(const TexturedMesh& mesh, int face, const Vec3& bary) {
  return bary[0] * mesh.uv(face, 0) + bary[1] * mesh.uv(face, 1) + bary[2] * mesh.uv(face, 2);
}

TexturedMesh extract_triangles(const TexturedMesh& mesh, const std::vector<int>& faces) {
  TexturedMesh out;
  out.atlas = mesh.atlas;
  std::vector<int> remap(mesh.vertices.size(), -1);
  out.triangles.reserve(faces.size());
  if (mesh.has_uvs()) out.uvs.reserve(3 * faces.size());
  for (int f : faces) {
    Triangle t{};
    for (int k = 0; k < 3; ++k) {
      const int v = mesh.triangles[f][k];
      if (remap[v] < 0) {
        remap[v] = int(out.vertices.size());
        out.vertices.push_back(mesh.vertices[v]);
        if (mesh.has_vertex_colors()) out.vertex_colors.push_back(mesh.vertex_colors[v]);
      }
      t[k] = remap[v];
      if (mesh.has_uvs()) out.uvs.push_back(mesh.uv(f, k));
    }
    out.triangles.push_back(t);
  }
  return out;
}

namespace {

std::uint64_t edge_key(int a, int b) {
  return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b);
}

}  // namespace

bool is_watertight(const TexturedMesh& mesh) {
  std::unordered_map<std::uint64_t, int> directed;
  directed.reserve(mesh.triangles.size() * 3);
  for (const Triangle& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      if (++directed[edge_key(t[k], t[(k + 1) % 3])] > 1) return false;
    }
  }
  for (const auto& [key, count] : directed) {
    const int a = int(key >> 32);
    const int b = int(key & 0xffffffffu);
    auto it = directed.find(edge_key(b, a));
    if (it == directed.end() || it->second != 1) return false;
  }
  return true;
}

int euler_characteristic(const TexturedMesh& mesh) {
  std::unordered_map<std::uint64_t, int> edges;
  std::vector<std::uint8_t> used(mesh.vertices.size(), 0);
  for (const Triangle& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const int a = std::min(t[k], t[(k + 1) % 3]);
      const int b = std::max(t[k], t[(k + 1) % 3]);
      edges[edge_key(a, b)] = 1;
      used[t[k]] = 1;
    }
  }
  int v = 0;
  for (auto u : used) v += u;
  return v - int(edges.size()) + int(mesh.triangles.size());
}

Rgb surface_color(const TexturedMesh& mesh, int face, const Vec3& bary) {
  if (mesh.has_atlas()) return atlas_lookup(mesh, face, bary);
  if (mesh.has_vertex_colors()) {
    const Triangle& t = mesh.triangles[face];
    return bary[0] * mesh.vertex_colors[t[0]] + bary[1] * mesh.vertex_colors[t[1]] +
           bary[2] * mesh.vertex_colors[t[2]];
  }
  throw Error(Errc::missing_colors, "mesh has neither an atlas nor vertex colors");
}

}  // namespace texcomp
