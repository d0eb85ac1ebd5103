#include "texcomp/partiality/partiality.hpp"

#include "texcomp/error.hpp"
#include "texcomp/geometry/bvh.hpp"
#include "texcomp/geometry/sampling.hpp"

#include <random>

namespace texcomp {

std::string to_string(PartialityType type) { return type == PartialityType::view ? "t2" : "t1"; }

PartialityType partiality_from_string(const std::string& name) {
  if (name == "t2") return PartialityType::view;
  if (name == "t1") return PartialityType::holes;
  throw Error(Errc::invalid_argument, "unknown partiality type '" + name + "'; expected t1 (holes) or t2 (view)");
}

namespace {

void require_surface(const TexturedMesh& mesh) {
  if (mesh.empty()) throw Error(Errc::degenerate_mesh, "cannot make a partial scan of an empty mesh");
}

Vec3 random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 d;
  do d = Vec3(n(rng), n(rng), n(rng));
  while (d.norm() < 1e-9);
  return d.normalized();
}

}  // namespace

ViewPartial make_view_partial(const TexturedMesh& mesh, std::uint64_t seed) {
  require_surface(mesh);
  const BoundingBox box = bounding_box(mesh);
  const Vec3 center = box.center();
  double radius = 0.0;
  for (const Vec3& v : mesh.vertices) radius = std::max(radius, (v - center).norm());

  std::mt19937_64 rng(seed);
  const Vec3 toward_viewer = random_direction(rng);
  ViewPartial out;
  out.viewpoint = center + radius * toward_viewer;

  const TriangleBvh bvh(mesh);
  const double reach = 4.0 * std::max(radius, 1e-9);
  for (int f = 0; f < int(mesh.triangles.size()); ++f) {
    if (face_normal(mesh, f).dot(toward_viewer) <= 0.0) continue;
    const Vec3 c = (mesh.corner(f, 0) + mesh.corner(f, 1) + mesh.corner(f, 2)) / 3.0;
    if (bvh.first_hit(c, toward_viewer, 1e-9 * reach, reach)) continue;
    out.kept_faces.push_back(f);
  }
  if (out.kept_faces.empty())
    throw Error(Errc::no_visible_triangles, "no triangle is visible from viewpoint seed " + std::to_string(seed));
  out.mesh = extract_triangles(mesh, out.kept_faces);
  return out;
}

HolePartial make_hole_partial(const TexturedMesh& mesh, const HoleOptions& options, std::uint64_t seed) {
  require_surface(mesh);
  if (options.count < 0 || !(options.radius_min >= 0.0) || options.radius_max < options.radius_min)
    throw Error(Errc::invalid_argument, "hole count must be non-negative and 0 <= radius_min <= radius_max");
  const double total = surface_area(mesh);
  const int faces = int(mesh.triangles.size());

  double scale = 1.0;
  for (int attempt = 1; attempt <= std::max(1, options.max_attempts); ++attempt, scale *= 0.5) {
    HolePartial out;
    out.attempts = attempt;
    out.radius_scale = scale;
    for (int i = 0; i < options.count; ++i) {
      const std::uint64_t ball_seed = derive_seed(seed, std::uint64_t(i));
      const PointSample p = sample_surface_points(mesh, 1, ball_seed);
      std::mt19937_64 rng(derive_seed(ball_seed, 1));
      std::uniform_real_distribution<double> u(options.radius_min, options.radius_max);
      const double r = options.radius_min == options.radius_max ? options.radius_min : u(rng);
      out.balls.push_back({p.positions[0], r * scale});
    }
    double removed = 0.0;
    for (int f = 0; f < faces; ++f) {
      bool hit = false;
      for (const HoleBall& b : out.balls) {
        Vec3 bary;
        const Vec3 q = closest_point_on_triangle(b.center, mesh.corner(f, 0), mesh.corner(f, 1), mesh.corner(f, 2),
                                                 &bary);
        if ((q - b.center).norm() <= b.radius) {
          hit = true;
          break;
        }
      }
      if (hit)
        removed += triangle_area(mesh, f);
      else
        out.kept_faces.push_back(f);
    }
    out.removed_fraction = total > 0.0 ? removed / total : 0.0;
    if (out.removed_fraction > options.max_removed_fraction) continue;
    out.mesh = out.kept_faces.size() == std::size_t(faces) ? mesh : extract_triangles(mesh, out.kept_faces);
    return out;
  }
  throw Error(Errc::removal_exhausted, "holes removed more than " +
                                           std::to_string(int(options.max_removed_fraction * 100)) +
                                           "% of the surface in " + std::to_string(options.max_attempts) +
                                           " attempts; lower the hole count or radii");
}

nlohmann::json provenance(const ViewPartial& p, std::uint64_t seed) {
  return {{"type", "t2"},
          {"seed", seed},
          {"viewpoint", {p.viewpoint.x(), p.viewpoint.y(), p.viewpoint.z()}},
          {"kept_triangles", p.kept_faces.size()}};
}

nlohmann::json provenance(const HolePartial& p, const HoleOptions& options, std::uint64_t seed) {
  nlohmann::json balls = nlohmann::json::array();
  for (const HoleBall& b : p.balls)
    balls.push_back({{"center", {b.center.x(), b.center.y(), b.center.z()}}, {"radius", b.radius}});
  return {{"type", "t1"},
          {"seed", seed},
          {"parameters",
           {{"count", options.count},
            {"radius_min", options.radius_min},
            {"radius_max", options.radius_max},
            {"max_removed_fraction", options.max_removed_fraction},
            {"max_attempts", options.max_attempts}}},
          {"attempts", p.attempts},
          {"radius_scale", p.radius_scale},
          {"balls", balls},
          {"kept_triangles", p.kept_faces.size()},
          {"removed_fraction", p.removed_fraction}};
}

}  // namespace texcomp
