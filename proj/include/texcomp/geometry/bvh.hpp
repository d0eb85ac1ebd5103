#pragma once

#include "texcomp/geometry/mesh.hpp"

#include <Eigen/Geometry>

#include <optional>
#include <vector>

namespace texcomp {

struct RayHit {
  int face = -1;
  double t = 0.0;
  Vec3 bary = Vec3::Zero();
};

struct ClosestPoint {
  int face = -1;
  Vec3 point = Vec3::Zero();
  Vec3 bary = Vec3::Zero();
  double distance = std::numeric_limits<double>::infinity();
};

// Median-split AABB tree over the triangles of a mesh. Holds its own copy of
// the geometry, so the source mesh may go away.
class TriangleBvh {
 public:
  TriangleBvh() = default;
  explicit TriangleBvh(const TexturedMesh& mesh);

  bool empty() const { return triangles_.empty(); }

  // Hit with the smallest t in [t_min, t_max].
  std::optional<RayHit> first_hit(const Vec3& origin, const Vec3& dir, double t_min,
                                  double t_max) const;

  // Hit along the full line with the smallest |t|, |t| <= max_abs_t.
  std::optional<RayHit> nearest_line_hit(const Vec3& origin, const Vec3& dir,
                                         double max_abs_t) const;

  ClosestPoint closest_point(const Vec3& p) const;

 private:
  struct Node {
    Eigen::AlignedBox3d box;
    int left = -1;   // child index, -1 for leaves
    int right = -1;
    int first = 0;   // leaf range in order_
    int count = 0;
  };

  int build(int first, int count);
  template <typename Key>
  std::optional<RayHit> traverse(const Vec3& origin, const Vec3& dir, double t_min,
                                 double t_max, Key key) const;

  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Vec3> centroids_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

// Closest point on triangle abc to p, with barycentric weights of the result.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c,
                               Vec3* bary);

// Two-sided ray/triangle test; returns t and barycentrics when the line hits.
std::optional<RayHit> intersect_triangle(const Vec3& origin, const Vec3& dir,
                                         const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace texcomp
