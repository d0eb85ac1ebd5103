#include "texcomp/geometry/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace texcomp {

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c,
                               Vec3* bary) {
  // Voronoi-region walk (Ericson, Real-Time Collision Detection 5.1.5).
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) {
    *bary = {1, 0, 0};
    return a;
  }
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) {
    *bary = {0, 1, 0};
    return b;
  }
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    *bary = {1 - v, v, 0};
    return a + v * ab;
  }
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) {
    *bary = {0, 0, 1};
    return c;
  }
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    *bary = {1 - w, 0, w};
    return a + w * ac;
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    *bary = {0, 1 - w, w};
    return b + w * (c - b);
  }
  const double denom = va + vb + vc;
  if (!(std::abs(denom) > 0.0)) {
    // Degenerate triangle: fall back to the nearest corner.
    const double da = (p - a).squaredNorm(), db = (p - b).squaredNorm(), dc = (p - c).squaredNorm();
    if (da <= db && da <= dc) { *bary = {1, 0, 0}; return a; }
    if (db <= dc) { *bary = {0, 1, 0}; return b; }
    *bary = {0, 0, 1};
    return c;
  }
  const double v = vb / denom, w = vc / denom;
  *bary = {1 - v - w, v, w};
  return a + ab * v + ac * w;
}

std::optional<RayHit> intersect_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a,
                                         const Vec3& b, const Vec3& c) {
  constexpr double eps = 1e-9;
  const Vec3 e1 = b - a, e2 = c - a;
  const Vec3 pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < 1e-300) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 tvec = origin - a;
  const double u = tvec.dot(pvec) * inv;
  if (u < -eps || u > 1.0 + eps) return std::nullopt;
  const Vec3 qvec = tvec.cross(e1);
  const double v = dir.dot(qvec) * inv;
  if (v < -eps || u + v > 1.0 + eps) return std::nullopt;
  RayHit hit;
  hit.t = e2.dot(qvec) * inv;
  const double uc = std::clamp(u, 0.0, 1.0), vc = std::clamp(v, 0.0, 1.0 - uc);
  hit.bary = {1.0 - uc - vc, uc, vc};
  return hit;
}

TriangleBvh::TriangleBvh(const TexturedMesh& mesh)
    : vertices_(mesh.vertices), triangles_(mesh.triangles) {
  if (triangles_.empty()) return;
  centroids_.reserve(triangles_.size());
  for (const Triangle& t : triangles_)
    centroids_.push_back((vertices_[t[0]] + vertices_[t[1]] + vertices_[t[2]]) / 3.0);
  order_.resize(triangles_.size());
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(2 * triangles_.size());
  build(0, int(triangles_.size()));
}

int TriangleBvh::build(int first, int count) {
  const int index = int(nodes_.size());
  nodes_.emplace_back();
  Eigen::AlignedBox3d box, centers;
  for (int i = first; i < first + count; ++i) {
    const Triangle& t = triangles_[order_[i]];
    for (int k : t) box.extend(vertices_[k]);
    centers.extend(centroids_[order_[i]]);
  }
  nodes_[index].box = box;
  if (count <= 4) {
    nodes_[index].first = first;
    nodes_[index].count = count;
    return index;
  }
  int axis = 0;
  centers.sizes().maxCoeff(&axis);
  const int mid = first + count / 2;
  std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + first + count,
                   [&](int a, int b) {
                     if (centroids_[a][axis] != centroids_[b][axis])
                       return centroids_[a][axis] < centroids_[b][axis];
                     return a < b;
                   });
  const int left = build(first, mid - first);
  const int right = build(mid, first + count - mid);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

namespace {

// Parametric interval of the line inside the box, clipped to [t_min, t_max].
bool slab(const Eigen::AlignedBox3d& box, const Vec3& o, const Vec3& d, double t_min,
          double t_max, double* lo, double* hi) {
  double t0 = t_min, t1 = t_max;
  for (int a = 0; a < 3; ++a) {
    // Pad the box slightly so hits on faces tangent to the box survive.
    const double pad = 1e-12 + 1e-9 * (box.max()[a] - box.min()[a]);
    const double bmin = box.min()[a] - pad, bmax = box.max()[a] + pad;
    if (std::abs(d[a]) < 1e-300) {
      if (o[a] < bmin || o[a] > bmax) return false;
      continue;
    }
    double ta = (bmin - o[a]) / d[a], tb = (bmax - o[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  *lo = t0;
  *hi = t1;
  return true;
}

}  // namespace

template <typename Key>
std::optional<RayHit> TriangleBvh::traverse(const Vec3& origin, const Vec3& dir, double t_min,
                                            double t_max, Key key) const {
  std::optional<RayHit> best;
  double best_key = std::numeric_limits<double>::infinity();
  if (nodes_.empty()) return best;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    double lo, hi;
    if (!slab(node.box, origin, dir, t_min, t_max, &lo, &hi)) continue;
    const double bound = (lo <= 0.0 && hi >= 0.0) ? 0.0 : std::min(key(lo), key(hi));
    if (bound > best_key) continue;
    if (node.left < 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int f = order_[i];
        const Triangle& t = triangles_[f];
        auto hit = intersect_triangle(origin, dir, vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]);
        if (!hit || hit->t < t_min || hit->t > t_max) continue;
        const double k = key(hit->t);
        if (k < best_key || (k == best_key && best && f < best->face)) {
          best_key = k;
          hit->face = f;
          best = hit;
        }
      }
    } else {
      stack.push_back(node.right);
      stack.push_back(node.left);
    }
  }
  return best;
}

std::optional<RayHit> TriangleBvh::first_hit(const Vec3& origin, const Vec3& dir, double t_min,
                                             double t_max) const {
  return traverse(origin, dir, t_min, t_max, [](double t) { return t; });
}

std::optional<RayHit> TriangleBvh::nearest_line_hit(const Vec3& origin, const Vec3& dir,
                                                    double max_abs_t) const {
  return traverse(origin, dir, -max_abs_t, max_abs_t, [](double t) { return std::abs(t); });
}

ClosestPoint TriangleBvh::closest_point(const Vec3& p) const {
  ClosestPoint best;
  if (nodes_.empty()) return best;
  double best_sq = std::numeric_limits<double>::infinity();
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (node.box.squaredExteriorDistance(p) > best_sq) continue;
    if (node.left < 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int f = order_[i];
        const Triangle& t = triangles_[f];
        Vec3 bary;
        const Vec3 q = closest_point_on_triangle(p, vertices_[t[0]], vertices_[t[1]],
                                                 vertices_[t[2]], &bary);
        const double d = (q - p).squaredNorm();
        if (d < best_sq || (d == best_sq && f < best.face)) {
          best_sq = d;
          best.face = f;
          best.point = q;
          best.bary = bary;
        }
      }
    } else {
      const double dl = nodes_[node.left].box.squaredExteriorDistance(p);
      const double dr = nodes_[node.right].box.squaredExteriorDistance(p);
      // Visit the nearer child first.
      if (dl <= dr) {
        stack.push_back(node.right);
        stack.push_back(node.left);
      } else {
        stack.push_back(node.left);
        stack.push_back(node.right);
      }
    }
  }
  best.distance = std::sqrt(best_sq);
  return best;
}

}  // namespace texcomp
