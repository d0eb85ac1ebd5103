#pragma once

#include "texcomp/geometry/mesh.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace texcomp {

// Generalized winding number: sum of signed solid angles over 4*pi. Close to
// 1 inside a closed outward-oriented mesh and 0 outside, and degrades
// gracefully for small holes.
double winding_number(const TexturedMesh& mesh, const Vec3& p);

std::vector<std::uint8_t> inside_by_winding_number(const TexturedMesh& mesh,
                                                   std::span<const Vec3> points);

}  // namespace texcomp
