#pragma once

#include "texcomp/geometry/mesh.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

namespace texcomp::test {

// Fresh scratch directory under the build tree's temp location.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("texcomp-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline TexturedMesh unit_quad() {
  TexturedMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  m.triangles = {{0, 1, 2}, {0, 2, 3}};
  m.uvs = {{0, 0}, {1, 0}, {1, 1}, {0, 0}, {1, 1}, {0, 1}};
  m.atlas = Image(4, 4, 3);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) m.atlas.set_rgb(x, y, Rgb::Constant((x + y) % 2));
  return m;
}

inline TexturedMesh single_triangle(const Vec3& a, const Vec3& b, const Vec3& c) {
  TexturedMesh m;
  m.vertices = {a, b, c};
  m.triangles = {{0, 1, 2}};
  return m;
}

inline Vec3 random_barycentric(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double a = u(rng), b = u(rng);
  if (a + b > 1) a = 1 - a, b = 1 - b;
  return {1 - a - b, a, b};
}

}  // namespace texcomp::test
