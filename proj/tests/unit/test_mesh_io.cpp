#include "test_support.hpp"

#include "texcomp/error.hpp"
#include "texcomp/geometry/fixtures.hpp"
#include "texcomp/geometry/mesh_io.hpp"
#include "texcomp/geometry/normalize.hpp"

#include <doctest.h>

#include <fstream>
#include <random>

using namespace texcomp;

TEST_CASE("unit quad with checker atlas loads back with its topology") {
  auto dir = test::scratch_dir("quad");
  save_textured_mesh(test::unit_quad(), dir / "quad.obj");
  TexturedMesh m = load_textured_mesh(dir / "quad.obj");
  CHECK(m.vertices.size() == 4);
  CHECK(m.triangles.size() == 2);
  REQUIRE(m.has_atlas());
  CHECK(m.atlas.width == 4);
  CHECK(m.atlas.rgb(1, 0).x() == doctest::Approx(1.0));
  CHECK(m.atlas.rgb(0, 0).x() == doctest::Approx(0.0));
}

TEST_CASE("out-of-range index is rejected") {
  auto dir = test::scratch_dir("badindex");
  std::ofstream(dir / "bad.obj") << "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 11\n";
  try {
    load_textured_mesh(dir / "bad.obj");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::index_out_of_range);
  }
}

TEST_CASE("missing file and missing atlas produce distinct errors") {
  auto dir = test::scratch_dir("missing");
  Errc a{}, b{};
  try {
    load_textured_mesh(dir / "nope.obj");
  } catch (const Error& e) {
    a = e.code();
  }
  std::ofstream(dir / "m.obj") << "mtllib m.mtl\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nf 1/1 2/2 3/3\n";
  std::ofstream(dir / "m.mtl") << "newmtl a\nmap_Kd gone.png\n";
  try {
    load_textured_mesh(dir / "m.obj");
  } catch (const Error& e) {
    b = e.code();
  }
  CHECK(a == Errc::missing_file);
  CHECK(b == Errc::missing_atlas);
  std::ofstream(dir / "g.obj") << "v 0 0 zz\nf 1 2 3\n";
  CHECK_THROWS_AS(load_textured_mesh(dir / "g.obj"), Error);
}

TEST_CASE("sphere fixture has 482 vertices and 960 triangles and round-trips exactly") {
  TexturedMesh sphere = make_uv_sphere(24, 21, 0.45);
  // Lat-long counts: slices*(stacks-1) ring vertices plus two poles.
  CHECK(sphere.vertices.size() == std::size_t(24 * 20 + 2));
  CHECK(sphere.triangles.size() == std::size_t(2 * 24 * 20));
  CHECK(sphere.vertices.size() == 482);
  CHECK(sphere.triangles.size() == 960);
  CHECK(is_watertight(sphere));
  CHECK(euler_characteristic(sphere) == 2);
  bake_atlas(sphere, 32, [](const Vec3& p) { return Rgb(0.5 + p.x(), 0.5, 0.5 - p.z()); });

  auto dir = test::scratch_dir("sphere");
  save_textured_mesh(sphere, dir / "sphere.obj");
  TexturedMesh back = load_textured_mesh(dir / "sphere.obj");
  REQUIRE(back.vertices.size() == sphere.vertices.size());
  CHECK(back.triangles == sphere.triangles);
  bool identical = true;
  for (std::size_t i = 0; i < sphere.vertices.size(); ++i) identical &= back.vertices[i] == sphere.vertices[i];
  for (std::size_t i = 0; i < sphere.uvs.size(); ++i) identical &= back.uvs[i] == sphere.uvs[i];
  CHECK(identical);
}

TEST_CASE("cube (0,0,0)-(2,2,2) normalizes with scale 0.45 about its center") {
  TexturedMesh cube = make_fixture({.shape = FixtureShape::box, .atlas_size = 16}).mesh;
  for (Vec3& v : cube.vertices) v = (v.array() / Vec3(0.45, 0.3, 0.35).array() + 1.0).matrix();
  auto [normalized, t] = normalize_to_unit_cube(cube);
  // Side 2 maps to 0.9 of the unit cube.
  CHECK(t.scale == doctest::Approx(0.9 / 2.0));
  CHECK((t.apply(Vec3(1, 1, 1))).norm() == doctest::Approx(0.0));
  BoundingBox box = bounding_box(normalized);
  CHECK(box.min.x() == doctest::Approx(-0.45));
  CHECK(box.max.z() == doctest::Approx(0.45));
  CHECK(is_normalized(normalized));
}

TEST_CASE("normalizing an already-normalized mesh only applies the fill rescale") {
  TexturedMesh m = test::single_triangle({-0.5, -0.5, 0}, {0.5, -0.5, 0}, {-0.5, 0.5, 0});
  auto [out, t] = normalize_to_unit_cube(m);
  CHECK(t.scale == doctest::Approx(0.9));
  CHECK(t.translation.norm() == doctest::Approx(0.0));
}

TEST_CASE("repeated point is degenerate") {
  TexturedMesh m = test::single_triangle({1, 2, 3}, {1, 2, 3}, {1, 2, 3});
  try {
    normalize_to_unit_cube(m);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::degenerate_mesh);
  }
}

TEST_CASE("property: normalize then invert reproduces vertices") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coord(-50, 50), spread(1e-3, 20);
  for (int trial = 0; trial < 50; ++trial) {
    TexturedMesh m;
    const Vec3 c(coord(rng), coord(rng), coord(rng));
    const double s = spread(rng);
    for (int i = 0; i < 12; ++i) m.vertices.push_back(c + s * Vec3(coord(rng), coord(rng), coord(rng)) / 50);
    for (int i = 0; i + 2 < 12; i += 3) m.triangles.push_back({i, i + 1, i + 2});
    auto [out, t] = normalize_to_unit_cube(m);
    CHECK(is_normalized(out));
    TexturedMesh back = invert_transform(out, t);
    const double side = bounding_box(m).extent().maxCoeff();
    double worst = 0;
    for (std::size_t i = 0; i < m.vertices.size(); ++i)
      worst = std::max(worst, (back.vertices[i] - m.vertices[i]).norm());
    CHECK(worst <= 1e-5 * side);
  }
}
