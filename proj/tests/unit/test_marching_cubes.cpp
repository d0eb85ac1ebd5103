#include "test_support.hpp"

#include "texcomp/geometry/containment.hpp"
#include "texcomp/geometry/marching_cubes.hpp"
#include "texcomp/geometry/voxel.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

using namespace texcomp;

namespace {

// Every undirected edge must be used by exactly two triangles.
bool every_edge_twice(const TexturedMesh& m) {
  std::map<std::pair<int, int>, int> uses;
  for (const Triangle& t : m.triangles)
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      ++uses[{a, b}];
    }
  for (const auto& [edge, n] : uses)
    if (n != 2) return false;
  return true;
}

double signed_volume(const TexturedMesh& m) {
  double v = 0;
  for (int f = 0; f < int(m.triangles.size()); ++f) v += m.corner(f, 0).dot(m.corner(f, 1).cross(m.corner(f, 2))) / 6;
  return v;
}

}  // namespace

TEST_CASE("all-zero volume gives an empty mesh") {
  CHECK(marching_cubes(Volume(8, 0.0f), 0.5).empty());
  CHECK(marching_cubes(VoxelGrid(8)).empty());
}

TEST_CASE("analytic sphere: area within 5 percent and Euler characteristic 2") {
  const int n = 64;
  const double r = 0.4;
  Volume vol(n);
  // Smooth occupancy ramp across one voxel so the iso-level lands on the sphere.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double d = voxel_center(n, i, j, k).norm() - r;
        vol.values[voxel_index(n, i, j, k)] = float(1.0 / (1.0 + std::exp(d * n * 4.0)));
      }
  TexturedMesh m = marching_cubes(vol, 0.5);
  const double expected = 4 * std::numbers::pi * r * r;
  CHECK(std::abs(surface_area(m) - expected) / expected < 0.05);
  CHECK(euler_characteristic(m) == 2);
  CHECK(is_watertight(m));
  CHECK(signed_volume(m) > 0);
}

TEST_CASE("all-one volume yields a closed box at the padding boundary") {
  const int n = 6;
  TexturedMesh m = marching_cubes(Volume(n, 1.0f), 0.5);
  CHECK(is_watertight(m));
  CHECK(every_edge_twice(m));
  CHECK(euler_characteristic(m) == 2);
  BoundingBox box = bounding_box(m);
  // Outer voxel centers sit at +-(0.5 - 0.5/n); the surface is half a voxel out.
  CHECK(box.max.x() == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(box.min.y() == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(signed_volume(m) > 0);
}

TEST_CASE("property: random volumes extract watertight outward meshes") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<float> u(0, 1);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + int(rng() % 7);
    Volume vol(n);
    for (float& v : vol.values) v = u(rng);
    const double threshold = 0.2 + 0.6 * u(rng);
    TexturedMesh m = marching_cubes(vol, threshold);
    if (m.empty()) continue;
    REQUIRE(is_watertight(m));
    REQUIRE(every_edge_twice(m));
    REQUIRE(signed_volume(m) > 0);
    for (const Vec3& v : m.vertices) REQUIRE(v.cwiseAbs().maxCoeff() <= 0.5 + 1e-12);
  }
}

TEST_CASE("property: extracted surface separates inside from outside voxels") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 6;
    VoxelGrid g(n);
    for (auto& v : g.occupancy) v = (rng() % 3) == 0;
    TexturedMesh m = marching_cubes(g);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const double w = winding_number(m, voxel_center(n, i, j, k));
          REQUIRE((w > 0.5) == bool(g.occupancy[voxel_index(n, i, j, k)]));
        }
  }
}
