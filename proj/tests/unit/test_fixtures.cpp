#include "texcomp/geometry/fixtures.hpp"
#include "texcomp/geometry/raster.hpp"
#include "texcomp/geometry/sampling.hpp"

#include <doctest.h>

using namespace texcomp;

TEST_CASE("standard fixtures are closed, outward, normalized and textured") {
  for (const Fixture& fx : standard_fixtures(64)) {
    CAPTURE(fx.name);
    CHECK(is_watertight(fx.mesh));
    CHECK(fx.mesh.has_atlas());
    BoundingBox box = bounding_box(fx.mesh);
    CHECK(box.min.minCoeff() >= -0.45 - 1e-12);
    CHECK(box.max.maxCoeff() <= 0.45 + 1e-12);
    // Outward: the vertex furthest along +x has a normal pointing along +x.
    std::vector<Vec3> normals = vertex_normals(fx.mesh);
    std::size_t far = 0;
    for (std::size_t i = 0; i < fx.mesh.vertices.size(); ++i)
      if (fx.mesh.vertices[i].x() > fx.mesh.vertices[far].x()) far = i;
    CHECK(normals[far].x() > 0.5);
    const int expected_chi = fx.name == "torus" ? 0 : 2;
    CHECK(euler_characteristic(fx.mesh) == expected_chi);
    // No two triangles overlap in the atlas.
    for (int c : uv_coverage_counts(fx.mesh, 64, 64)) REQUIRE(c <= 1);
  }
}

TEST_CASE("baked atlas reproduces the 3D pattern away from pattern edges") {
  for (const char* name : {"capsule", "torus"}) {
    Fixture fx = fixture_by_name(name, 256);
    PointSample s = sample_surface_points(fx.mesh, 2000, 1);
    double worst = 0;
    for (std::size_t i = 0; i < s.size(); ++i) worst = std::max(worst, (s.colors[i] - fx.color(s.positions[i])).norm());
    // Smooth patterns only: sampling the baked atlas is close to the exact color.
    CHECK(worst < 0.05);
  }
}

TEST_CASE("plane fixture is open") {
  Fixture fx = fixture_by_name("plane", 16);
  CHECK_FALSE(is_watertight(fx.mesh));
  CHECK(fx.mesh.triangles.size() == 2u * 200 * 200);
}
