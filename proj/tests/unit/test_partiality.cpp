#include "test_support.hpp"

#include "texcomp/error.hpp"
#include "texcomp/geometry/fixtures.hpp"
#include "texcomp/partiality/partiality.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

using namespace texcomp;

namespace {

// Moller-Trumbore, brute force over every triangle.
bool occluded(const TexturedMesh& m, int self, const Vec3& origin, const Vec3& dir) {
  for (int f = 0; f < int(m.triangles.size()); ++f) {
    if (f == self) continue;
    const Vec3 a = m.corner(f, 0), b = m.corner(f, 1), c = m.corner(f, 2);
    const Vec3 e1 = b - a, e2 = c - a, p = dir.cross(e2);
    const double det = e1.dot(p);
    if (std::abs(det) < 1e-14) continue;
    const Vec3 s = origin - a;
    const double u = s.dot(p) / det;
    if (u < 0 || u > 1) continue;
    const Vec3 q = s.cross(e1);
    const double v = dir.dot(q) / det;
    if (v < 0 || u + v > 1) continue;
    if (e2.dot(q) / det > 1e-9) return true;
  }
  return false;
}

std::set<std::array<double, 9>> triangle_set(const TexturedMesh& m) {
  std::set<std::array<double, 9>> out;
  for (int f = 0; f < int(m.triangles.size()); ++f) {
    std::array<double, 9> key{};
    for (int k = 0; k < 3; ++k)
      for (int d = 0; d < 3; ++d) key[3 * k + d] = m.corner(f, k)[d];
    out.insert(key);
  }
  return out;
}

template <typename F>
void expect_error(Errc code, F&& f) {
  try {
    f();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == code);
  }
}

}  // namespace

TEST_CASE("view partiality of a convex sphere keeps about a hemisphere, as a visibility oracle says") {
  const Fixture fx = fixture_by_name("sphere", 64);
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    CAPTURE(seed);
    const ViewPartial p = make_view_partial(fx.mesh, seed);
    const double fraction = double(p.kept_faces.size()) / double(fx.mesh.triangles.size());
    CHECK(fraction >= 0.35);
    CHECK(fraction <= 0.65);
    const Vec3 dir = (p.viewpoint - bounding_box(fx.mesh).center()).normalized();
    std::vector<int> oracle;
    for (int f = 0; f < int(fx.mesh.triangles.size()); ++f) {
      const Vec3 c = (fx.mesh.corner(f, 0) + fx.mesh.corner(f, 1) + fx.mesh.corner(f, 2)) / 3.0;
      if (face_normal(fx.mesh, f).dot(dir) > 0 && !occluded(fx.mesh, f, c, dir)) oracle.push_back(f);
    }
    CHECK(p.kept_faces == oracle);
    p.mesh.validate();
  }
}

TEST_CASE("view partiality is a deterministic subset and handles occlusion") {
  const Fixture fx = fixture_by_name("torus", 64);
  const ViewPartial a = make_view_partial(fx.mesh, 11), b = make_view_partial(fx.mesh, 11);
  CHECK(a.kept_faces == b.kept_faces);
  CHECK(a.mesh.vertices == b.mesh.vertices);
  const auto all = triangle_set(fx.mesh);
  for (const auto& t : triangle_set(a.mesh)) CHECK(all.count(t) == 1);
  CHECK(surface_area(a.mesh) < surface_area(fx.mesh));
  CHECK(a.mesh.atlas == fx.mesh.atlas);
  expect_error(Errc::degenerate_mesh, [] { make_view_partial(TexturedMesh{}, 1); });
}

TEST_CASE("a single back-facing triangle has nothing visible from behind") {
  const TexturedMesh tri = test::single_triangle({0, 0, 0}, {1, 0, 0}, {0, 1, 0});
  int failures = 0, successes = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    try {
      const ViewPartial p = make_view_partial(tri, seed);
      CHECK(p.viewpoint.z() > bounding_box(tri).center().z());
      ++successes;
    } catch (const Error& e) {
      CHECK(e.code() == Errc::no_visible_triangles);
      ++failures;
    }
  }
  CHECK(failures > 0);
  CHECK(successes > 0);
}

TEST_CASE("zero holes is the identity") {
  const Fixture fx = fixture_by_name("box", 64);
  const HolePartial p = make_hole_partial(fx.mesh, {.count = 0}, 5);
  CHECK(p.mesh.vertices == fx.mesh.vertices);
  CHECK(p.mesh.triangles == fx.mesh.triangles);
  CHECK(p.removed_fraction == 0.0);
  CHECK(surface_area(p.mesh) == surface_area(fx.mesh));
}

TEST_CASE("one hole in a fine plane removes about the disk area") {
  const TexturedMesh plane = make_plane(100, 0.45);
  const double r = 0.2;
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 200 && checked < 5; ++seed) {
    const HolePartial p = make_hole_partial(plane, {.count = 1, .radius_min = r, .radius_max = r}, seed);
    if (p.balls[0].center.head<2>().norm() > 0.45 - r - 0.01) continue;
    ++checked;
    const double removed = surface_area(plane) - surface_area(p.mesh);
    const double disk = std::numbers::pi * r * r;
    CAPTURE(seed);
    CHECK(std::abs(removed - disk) <= 0.2 * disk);
  }
  CHECK(checked == 5);
}

TEST_CASE("property: removed area never shrinks as holes are added") {
  for (const Fixture& fx : standard_fixtures(32)) {
    CAPTURE(fx.name);
    for (std::uint64_t seed : {3u, 9u}) {
      double last = 0.0;
      std::set<int> previous_removed;
      for (int k = 0; k <= 6; ++k) {
        const HolePartial p = make_hole_partial(fx.mesh, {.count = k, .radius_min = 0.03, .radius_max = 0.08}, seed);
        REQUIRE(p.attempts == 1);
        CHECK(p.removed_fraction >= last);
        last = p.removed_fraction;
        std::set<int> kept(p.kept_faces.begin(), p.kept_faces.end());
        for (int f : previous_removed) CHECK(kept.count(f) == 0);
        previous_removed.clear();
        for (int f = 0; f < int(fx.mesh.triangles.size()); ++f)
          if (!kept.count(f)) previous_removed.insert(f);
        CHECK(surface_area(p.mesh) <= surface_area(fx.mesh));
        if (!p.mesh.empty()) p.mesh.validate();
      }
    }
  }
}

TEST_CASE("oversized holes shrink on retry and eventually give up") {
  const Fixture fx = fixture_by_name("sphere", 32);
  const HolePartial p = make_hole_partial(fx.mesh, {.count = 3, .radius_min = 2.0, .radius_max = 2.0}, 1);
  CHECK(p.attempts > 1);
  CHECK(p.removed_fraction <= 0.9);
  expect_error(Errc::removal_exhausted, [&] {
    make_hole_partial(fx.mesh, {.count = 3, .radius_min = 2.0, .radius_max = 2.0, .max_attempts = 1}, 1);
  });
  expect_error(Errc::invalid_argument, [&] { make_hole_partial(fx.mesh, {.count = -1}, 1); });
}

TEST_CASE("provenance records the generator parameters") {
  const Fixture fx = fixture_by_name("capsule", 32);
  const HoleOptions opt{.count = 2};
  const nlohmann::json j = provenance(make_hole_partial(fx.mesh, opt, 4), opt, 4);
  CHECK(j["type"] == "t1");
  CHECK(j["seed"] == 4);
  CHECK(j["balls"].size() == 2);
  CHECK(j["parameters"]["count"] == 2);
  CHECK(provenance(make_view_partial(fx.mesh, 2), 2)["type"] == "t2");
  CHECK(partiality_from_string("t1") == PartialityType::holes);
  expect_error(Errc::invalid_argument, [] { partiality_from_string("t3"); });
}
