#pragma once

#include "texcomp/geometry/image.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <limits>
#include <vector>

namespace texcomp {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Triangle = std::array<int, 3>;

// Triangle mesh with per-corner uv coordinates and an optional atlas.
// uvs is either empty or holds three entries per triangle.
struct TexturedMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<Vec2> uvs;
  Image atlas;
  std::vector<Rgb> vertex_colors;

  bool empty() const { return triangles.empty(); }
  bool has_uvs() const { return !uvs.empty(); }
  bool has_atlas() const { return !atlas.empty(); }
  bool has_vertex_colors() const { return !vertex_colors.empty(); }

  const Vec2& uv(int face, int corner) const { return uvs[3 * face + corner]; }
  const Vec3& corner(int face, int k) const { return vertices[triangles[face][k]]; }

  // Throws Error on any violated invariant.
  void validate() const;
};

struct BoundingBox {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  bool valid() const { return (max.array() >= min.array()).all(); }
  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
};

BoundingBox bounding_box(const TexturedMesh& mesh);

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);
double triangle_area(const TexturedMesh& mesh, int face);
double surface_area(const TexturedMesh& mesh);
Vec3 face_normal(const TexturedMesh& mesh, int face);  // unit, zero if degenerate
std::vector<Vec3> vertex_normals(const TexturedMesh& mesh);

Vec3 interpolate_position(const TexturedMesh& mesh, int face, const Vec3& bary);
Vec2 interpolate_uv(const TexturedMesh& mesh, int face, const Vec3& bary);

// Keeps the listed triangles, drops unreferenced vertices, carries uvs, atlas
// and vertex colors along.
TexturedMesh extract_triangles(const TexturedMesh& mesh, const std::vector<int>& faces);

// Every undirected edge used by exactly two triangles, in opposite directions.
bool is_watertight(const TexturedMesh& mesh);
int euler_characteristic(const TexturedMesh& mesh);

// Color at a surface location: atlas if present, otherwise
// barycentric vertex colors.
Rgb surface_color(const TexturedMesh& mesh, int face, const Vec3& bary);

}  // namespace texcomp
