#include "texcomp/geometry/sampling.hpp"

#include "texcomp/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace texcomp {

Rgb atlas_lookup(const TexturedMesh& mesh, int face, const Vec3& bary) {
  if (face < 0 || face >= int(mesh.triangles.size()))
    throw Error(Errc::index_out_of_range, "face " + std::to_string(face));
  if (!mesh.has_uvs()) throw Error(Errc::missing_uv, "face " + std::to_string(face));
  if (!mesh.has_atlas()) throw Error(Errc::missing_atlas, "mesh has no atlas");
  return sample_bilinear(mesh.atlas, interpolate_uv(mesh, face, bary));
}

PointSample sample_surface_points(const TexturedMesh& mesh, std::size_t count,
                                  std::uint64_t seed) {
  std::vector<double> cumulative(mesh.triangles.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.triangles.size(); ++f) {
    total += triangle_area(mesh, int(f));
    cumulative[f] = total;
  }
  if (!(total > 0.0)) throw Error(Errc::zero_area, "cannot sample a zero-area mesh");

  const bool with_color = mesh.has_atlas() || mesh.has_vertex_colors();
  PointSample out;
  out.positions.reserve(count);
  out.faces.reserve(count);
  out.barycentrics.reserve(count);
  if (with_color) out.colors.reserve(count);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (std::size_t i = 0; i < count; ++i) {
    const double pick = uniform(rng) * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    int face = int(std::min<std::ptrdiff_t>(it - cumulative.begin(),
                                            std::ptrdiff_t(cumulative.size()) - 1));
    // Zero-area faces have zero-width buckets; upper_bound never lands on them.
    const double s = std::sqrt(uniform(rng));
    const double r = uniform(rng);
    const double w1 = s * (1.0 - r);
    const double w2 = s * r;
    const Vec3 bary(1.0 - w1 - w2, w1, w2);
    out.faces.push_back(face);
    out.barycentrics.push_back(bary);
    out.positions.push_back(interpolate_position(mesh, face, bary));
    if (with_color) out.colors.push_back(surface_color(mesh, face, bary));
  }
  return out;
}

}  // namespace texcomp
