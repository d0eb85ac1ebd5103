#pragma once

#include "texcomp/geometry/mesh.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace texcomp {

enum class PartialityType { view, holes };  // t2, t1

std::string to_string(PartialityType type);           // "t2" / "t1"
PartialityType partiality_from_string(const std::string& name);

struct ViewPartial {
  TexturedMesh mesh;
  Vec3 viewpoint = Vec3::Zero();  // on the bounding sphere
  std::vector<int> kept_faces;    // indices into the input mesh
};

// Keeps the triangles seen from a random point on the mesh's bounding
// sphere, looking at its center with a parallel projection: a triangle stays
// when it faces the viewer and the ray from its centroid toward the viewer
// hits nothing else. Throws no_visible_triangles when nothing is kept.
ViewPartial make_view_partial(const TexturedMesh& mesh, std::uint64_t seed);

struct HoleOptions {
  int count = 4;
  double radius_min = 0.05;
  double radius_max = 0.15;
  double max_removed_fraction = 0.9;
  int max_attempts = 6;  // radii are halved on every retry
};

struct HoleBall {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

struct HolePartial {
  TexturedMesh mesh;
  std::vector<HoleBall> balls;
  std::vector<int> kept_faces;
  double removed_fraction = 0.0;  // of the surface area
  int attempts = 1;
  double radius_scale = 1.0;
};

// Removes every triangle that intersects one of `count` balls centered at
// random surface points. Ball i depends only on (seed, i) and the radius
// scale, so for a fixed seed the removed set grows with the count. When more
// than max_removed_fraction of the area would go, radii are halved and the
// balls redrawn; after max_attempts this throws removal_exhausted.
HolePartial make_hole_partial(const TexturedMesh& mesh, const HoleOptions& options, std::uint64_t seed);

nlohmann::json provenance(const ViewPartial& p, std::uint64_t seed);
nlohmann::json provenance(const HolePartial& p, const HoleOptions& options, std::uint64_t seed);

}  // namespace texcomp
