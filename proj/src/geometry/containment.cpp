#include "texcomp/geometry/containment.hpp"

#include <cmath>
#include <numbers>

namespace texcomp {

double winding_number(const TexturedMesh& mesh, const Vec3& p) {
  double total = 0.0;
  for (const Triangle& t : mesh.triangles) {
    const Vec3 a = mesh.vertices[t[0]] - p;
    const Vec3 b = mesh.vertices[t[1]] - p;
    const Vec3 c = mesh.vertices[t[2]] - p;
    const double la = a.norm(), lb = b.norm(), lc = c.norm();
    const double num = a.dot(b.cross(c));
    const double den = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
    total += 2.0 * std::atan2(num, den);
  }
  return total / (4.0 * std::numbers::pi);
}

std::vector<std::uint8_t> inside_by_winding_number(const TexturedMesh& mesh,
                                                   std::span<const Vec3> points) {
  std::vector<std::uint8_t> inside(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    inside[i] = winding_number(mesh, points[i]) > 0.5 ? 1 : 0;
  return inside;
}

}  // namespace texcomp
