#pragma once

#include "texcomp/geometry/mesh.hpp"

namespace texcomp {

// normalized = scale * (p + translation)
struct NormalizationTransform {
  double scale = 1.0;
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return scale * (p + translation); }
  Vec3 invert(const Vec3& q) const { return q / scale - translation; }
};

constexpr double kDefaultFillFraction = 0.9;

// Centers the bounding box at the origin and scales its longest side to
// fill_fraction of the unit cube [-0.5, 0.5]^3.
std::pair<TexturedMesh, NormalizationTransform> normalize_to_unit_cube(
    const TexturedMesh& mesh, double fill_fraction = kDefaultFillFraction);

TexturedMesh apply_transform(const TexturedMesh& mesh, const NormalizationTransform& t);
TexturedMesh invert_transform(const TexturedMesh& mesh, const NormalizationTransform& t);

// True when every vertex lies in [-0.5 - tol, 0.5 + tol]^3.
bool is_normalized(const TexturedMesh& mesh, double tol = 1e-9);

}  // namespace texcomp
