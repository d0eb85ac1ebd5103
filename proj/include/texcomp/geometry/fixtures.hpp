#pragma once

#include "texcomp/geometry/mesh.hpp"

#include <functional>
#include <string>
#include <vector>

namespace texcomp {

// Procedural textured shapes used as the in-repo dataset. Every fixture is
// generated directly inside [-0.45, 0.45]^3 with welded vertices, outward
// orientation, and its own uv layout; the atlas is baked from a pattern
// defined in 3D, so the exact color of any surface point is known.
enum class FixtureShape { sphere, ellipsoid, capsule, box, torus, plane };
enum class FixturePattern { solid, checker, stripes, gradient };

struct FixtureOptions {
  FixtureShape shape = FixtureShape::sphere;
  FixturePattern pattern = FixturePattern::solid;
  Rgb color_a{0.85, 0.25, 0.2};
  Rgb color_b{0.2, 0.35, 0.85};
  double cell = 0.3;      // checker / stripe period in normalized units
  int atlas_size = 256;
  int tessellation = 24;  // shape-specific density
};

struct Fixture {
  std::string name;
  TexturedMesh mesh;
  std::function<bool(const Vec3&)> inside;
  std::function<Rgb(const Vec3&)> color;
};

Fixture make_fixture(const FixtureOptions& options);

// The five-shape desk-scale training set.
std::vector<Fixture> standard_fixtures(int atlas_size = 256);
Fixture fixture_by_name(const std::string& name, int atlas_size = 256);
std::vector<std::string> standard_fixture_names();

// Lat-long sphere: slices * (stacks - 1) + 2 vertices,
// 2 * slices * (stacks - 1) triangles.
TexturedMesh make_uv_sphere(int slices, int stacks, double radius);

// Square [-half, half]^2 at z = 0 split into cells x cells quads, normal +z.
TexturedMesh make_plane(int cells, double half);

// Bakes a position -> color function into the mesh atlas through its uvs.
void bake_atlas(TexturedMesh& mesh, int size, const std::function<Rgb(const Vec3&)>& color);

}  // namespace texcomp
