#include "texcomp/geometry/normalize.hpp"

#include "texcomp/error.hpp"

namespace texcomp {

std::pair<TexturedMesh, NormalizationTransform> normalize_to_unit_cube(
    const TexturedMesh& mesh, double fill_fraction) {
  if (mesh.vertices.empty()) throw Error(Errc::degenerate_mesh, "mesh has no vertices");
  if (!(fill_fraction > 0.0 && fill_fraction <= 1.0))
    throw Error(Errc::invalid_argument, "fill fraction must be in (0, 1]");
  const BoundingBox box = bounding_box(mesh);
  const double longest = box.extent().maxCoeff();
  if (!(longest > 0.0)) throw Error(Errc::degenerate_mesh, "mesh has zero extent");

  NormalizationTransform t;
  t.scale = fill_fraction / longest;
  t.translation = -box.center();
  return {apply_transform(mesh, t), t};
}

TexturedMesh apply_transform(const TexturedMesh& mesh, const NormalizationTransform& t) {
  TexturedMesh out = mesh;
  for (Vec3& v : out.vertices) v = t.apply(v);
  return out;
}

TexturedMesh invert_transform(const TexturedMesh& mesh, const NormalizationTransform& t) {
  TexturedMesh out = mesh;
  for (Vec3& v : out.vertices) v = t.invert(v);
  return out;
}

bool is_normalized(const TexturedMesh& mesh, double tol) {
  for (const Vec3& v : mesh.vertices) {
    if ((v.array() < -0.5 - tol).any() || (v.array() > 0.5 + tol).any()) return false;
  }
  return true;
}

}  // namespace texcomp
