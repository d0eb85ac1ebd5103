#include "test_support.hpp"

#include "texcomp/geometry/bvh.hpp"
#include "texcomp/geometry/containment.hpp"
#include "texcomp/geometry/fixtures.hpp"
#include "texcomp/geometry/raster.hpp"

#include <doctest.h>

#include <random>

using namespace texcomp;

TEST_CASE("two triangles sharing the diagonal cover every texel exactly once") {
  TexturedMesh m = test::unit_quad();
  for (int size : {1, 3, 16, 37}) {
    std::vector<int> counts = uv_coverage_counts(m, size, size);
    for (int c : counts) REQUIRE(c == 1);
  }
}

TEST_CASE("property: a triangle fan covers each texel in its hull once") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int trial = 0; trial < 30; ++trial) {
    const Vec2 c(u(rng), u(rng));
    TexturedMesh m;
    const int spokes = 5 + int(rng() % 6);
    m.vertices.push_back(Vec3::Zero());
    std::vector<Vec2> ring;
    for (int s = 0; s < spokes; ++s) {
      const double a = 2 * 3.14159265358979 * s / spokes;
      ring.push_back(Vec2(0.5 + 0.45 * std::cos(a), 0.5 + 0.45 * std::sin(a)));
      m.vertices.push_back(Vec3::Zero());
    }
    for (int s = 0; s < spokes; ++s) {
      m.triangles.push_back({0, 1 + s, 1 + (s + 1) % spokes});
      m.uvs.insert(m.uvs.end(), {c, ring[s], ring[(s + 1) % spokes]});
    }
    // c lies inside the convex ring only if it is within the inscribed circle.
    if ((c - Vec2(0.5, 0.5)).norm() > 0.45 * std::cos(3.14159265358979 / spokes)) continue;
    std::vector<int> counts = uv_coverage_counts(m, 41, 29);
    for (int c2 : counts) REQUIRE(c2 <= 1);
  }
}

TEST_CASE("dilation fills uncovered texels from covered neighbors") {
  Image img(5, 1, 3);
  std::vector<std::uint8_t> covered{0, 0, 1, 0, 0};
  img.set_rgb(2, 0, Rgb(1, 0.5, 0));
  dilate_atlas(img, covered, 1);
  CHECK(covered == std::vector<std::uint8_t>{0, 1, 1, 1, 0});
  CHECK(img.rgb(1, 0).y() == doctest::Approx(0.5));
  dilate_atlas(img, covered, 5);
  CHECK(img.rgb(0, 0).x() == doctest::Approx(1.0));
}

TEST_CASE("BVH queries match brute force") {
  Fixture fx = fixture_by_name("torus", 16);
  TriangleBvh bvh(fx.mesh);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec3 p(u(rng), u(rng), u(rng));
    Vec3 dir(u(rng), u(rng), u(rng));
    dir.normalize();

    double best_d = 1e30, best_t = 1e30, best_abs = 1e30;
    for (int f = 0; f < int(fx.mesh.triangles.size()); ++f) {
      Vec3 b;
      const Vec3 q = closest_point_on_triangle(p, fx.mesh.corner(f, 0), fx.mesh.corner(f, 1), fx.mesh.corner(f, 2), &b);
      best_d = std::min(best_d, (q - p).norm());
      if (auto hit = intersect_triangle(p, dir, fx.mesh.corner(f, 0), fx.mesh.corner(f, 1), fx.mesh.corner(f, 2))) {
        if (hit->t >= 0) best_t = std::min(best_t, hit->t);
        if (std::abs(hit->t) <= 0.3) best_abs = std::min(best_abs, std::abs(hit->t));
      }
    }
    REQUIRE(bvh.closest_point(p).distance == doctest::Approx(best_d).epsilon(1e-12));
    auto hit = bvh.first_hit(p, dir, 0.0, 1e30);
    REQUIRE(hit.has_value() == (best_t < 1e30));
    if (hit) REQUIRE(hit->t == doctest::Approx(best_t).epsilon(1e-12));
    auto line = bvh.nearest_line_hit(p, dir, 0.3);
    REQUIRE(line.has_value() == (best_abs < 1e30));
    if (line) REQUIRE(std::abs(line->t) == doctest::Approx(best_abs).epsilon(1e-12));
  }
}

TEST_CASE("winding number agrees with analytic containment") {
  for (const char* name : {"sphere", "torus", "capsule"}) {
    Fixture fx = fixture_by_name(name, 16);
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    std::vector<Vec3> pts;
    for (int i = 0; i < 400; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
    std::vector<std::uint8_t> inside = inside_by_winding_number(fx.mesh, pts);
    int disagree = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) disagree += bool(inside[i]) != fx.inside(pts[i]);
    // Only points in the thin sliver between the polygon and the true surface may differ.
    CHECK(disagree <= 8);
  }
}
