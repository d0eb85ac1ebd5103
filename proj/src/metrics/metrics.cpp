#include "texcomp/metrics/metrics.hpp"

#include "texcomp/error.hpp"
#include "texcomp/geometry/bvh.hpp"
#include "texcomp/geometry/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace texcomp {
namespace {

void check_frames(const TexturedMesh& pred, const TexturedMesh& gt) {
  const BoundingBox a = bounding_box(pred), b = bounding_box(gt);
  BoundingBox both = a;
  both.extend(b.min);
  both.extend(b.max);
  const double larger = std::max(a.extent().norm(), b.extent().norm());
  if (both.extent().norm() > 1.25 * larger)
    throw Error(Errc::frame_mismatch, "prediction and ground truth do not overlap; are both in the normalized frame?");
}

DirectedSamples directed(const TexturedMesh& from, const TexturedMesh& to, const TriangleBvh& to_bvh,
                         std::size_t count, std::uint64_t seed) {
  const PointSample s = sample_surface_points(from, count, seed);
  const bool colors = s.has_colors() && (to.has_atlas() || to.has_vertex_colors());
  DirectedSamples out;
  out.distances.reserve(count);
  if (colors) out.color_differences.reserve(count);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const ClosestPoint c = to_bvh.closest_point(s.positions[i]);
    out.distances.push_back(c.distance);
    if (colors) out.color_differences.push_back((s.colors[i] - surface_color(to, c.face, c.bary)).norm());
  }
  return out;
}

DistanceStats stats(const std::vector<double>& a, const std::vector<double>& b = {}) {
  DistanceStats s;
  const std::size_t n = a.size() + b.size();
  if (n == 0) return s;
  for (const auto* v : {&a, &b})
    for (double d : *v) {
      s.mean += d;
      s.max = std::max(s.max, d);
    }
  s.mean /= double(n);
  return s;
}

nlohmann::json stats_json(const DistanceStats& s) { return {{"mean", s.mean}, {"max", s.max}}; }

}  // namespace

SurfaceSamples surface_distance_samples(const TexturedMesh& pred, const TexturedMesh& gt, std::size_t count,
                                        std::uint64_t seed) {
  if (pred.empty() || gt.empty()) throw Error(Errc::degenerate_mesh, "surface sampling needs two non-empty meshes");
  check_frames(pred, gt);
  const TriangleBvh pred_bvh(pred), gt_bvh(gt);
  // One seed for both directions keeps the scores symmetric under swapping.
  const std::uint64_t s = derive_seed(seed, 0);
  return {directed(pred, gt, gt_bvh, count, s), directed(gt, pred, pred_bvh, count, s)};
}

double distance_to_score(std::span<const double> values, double d0, double snap) {
  if (!(d0 > 0.0)) throw Error(Errc::invalid_argument, "score scale d0 must be positive");
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double d : values) sum += d <= snap ? 1.0 : std::max(0.0, 1.0 - d / d0);
  return sum / double(values.size());
}

double area_score(const TexturedMesh& pred, const TexturedMesh& gt) {
  const double a = pred.empty() ? 0.0 : surface_area(pred);
  const double b = gt.empty() ? 0.0 : surface_area(gt);
  const double hi = std::max(a, b);
  return hi > 0.0 ? std::min(a, b) / hi : 0.0;
}

double final_score(double shape, double texture, double area) { return 0.5 * area * (shape + texture); }

nlohmann::json ScoreOptions::to_json() const {
  return {{"mapping", "mean(max(0, 1 - d / d0))"},
          {"shape_d0", shape_d0},
          {"texture_d0", texture_d0},
          {"texture_distance", "rgb_l2"},
          {"area", "min/max total area"},
          {"samples_per_direction", samples},
          {"seed", seed}};
}

nlohmann::json ScoreReport::to_json() const {
  return {{"name", name},
          {"shape", shape},
          {"texture", texture},
          {"area", area},
          {"final", final},
          {"samples_per_direction", samples_per_direction},
          {"pred_to_gt", stats_json(pred_to_gt)},
          {"gt_to_pred", stats_json(gt_to_pred)},
          {"color", stats_json(color)}};
}

ScoreReport evaluate_scan(const std::string& name, const TexturedMesh& pred, const TexturedMesh& gt,
                          const ScoreOptions& options) {
  if (gt.empty()) throw Error(Errc::degenerate_mesh, name + ": ground truth is empty");
  ScoreReport r;
  r.name = name;
  r.samples_per_direction = options.samples;
  if (pred.empty()) return r;

  const SurfaceSamples s = surface_distance_samples(pred, gt, options.samples, options.seed);
  std::vector<double> distances = s.pred_to_gt.distances;
  distances.insert(distances.end(), s.gt_to_pred.distances.begin(), s.gt_to_pred.distances.end());
  std::vector<double> colors = s.pred_to_gt.color_differences;
  colors.insert(colors.end(), s.gt_to_pred.color_differences.begin(), s.gt_to_pred.color_differences.end());

  r.shape = distance_to_score(distances, options.shape_d0, kDistanceSnap);
  r.texture = distance_to_score(colors, options.texture_d0, kColorSnap);
  r.area = area_score(pred, gt);
  r.final = final_score(r.shape, r.texture, r.area);
  r.pred_to_gt = stats(s.pred_to_gt.distances);
  r.gt_to_pred = stats(s.gt_to_pred.distances);
  r.color = stats(s.pred_to_gt.color_differences, s.gt_to_pred.color_differences);
  return r;
}

ScoreAggregate aggregate(const std::vector<ScoreReport>& reports) {
  ScoreAggregate a;
  a.count = reports.size();
  if (reports.empty()) return a;
  for (int k = 0; k < 4; ++k) {
    double sum = 0.0, sq = 0.0;
    for (const auto& r : reports) {
      const double v = k == 0 ? r.shape : k == 1 ? r.texture : k == 2 ? r.area : r.final;
      sum += v;
    }
    a.mean[k] = sum / double(reports.size());
    for (const auto& r : reports) {
      const double v = k == 0 ? r.shape : k == 1 ? r.texture : k == 2 ? r.area : r.final;
      sq += (v - a.mean[k]) * (v - a.mean[k]);
    }
    a.stddev[k] = std::sqrt(sq / double(reports.size()));
  }
  return a;
}

void write_score_report(const std::filesystem::path& path, const std::vector<ScoreReport>& reports,
                        const ScoreOptions& options) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_failure, "cannot write " + path.string());
  out << nlohmann::json{{"header", options.to_json()}}.dump() << '\n';
  for (const auto& r : reports) out << r.to_json().dump() << '\n';
  const ScoreAggregate a = aggregate(reports);
  nlohmann::json agg{{"count", a.count}};
  const char* keys[4] = {"shape", "texture", "area", "final"};
  for (int k = 0; k < 4; ++k) agg[keys[k]] = {{"mean", a.mean[k]}, {"std", a.stddev[k]}};
  out << nlohmann::json{{"aggregate", agg}}.dump() << '\n';
}

std::vector<ScoreReport> read_score_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::missing_file, "cannot read score report " + path.string());
  std::vector<ScoreReport> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    if (!j.contains("name")) continue;
    ScoreReport r;
    r.name = j["name"];
    r.shape = j["shape"];
    r.texture = j["texture"];
    r.area = j["area"];
    r.final = j["final"];
    r.samples_per_direction = j["samples_per_direction"];
    r.pred_to_gt = {j["pred_to_gt"]["mean"], j["pred_to_gt"]["max"]};
    r.gt_to_pred = {j["gt_to_pred"]["mean"], j["gt_to_pred"]["max"]};
    r.color = {j["color"]["mean"], j["color"]["max"]};
    out.push_back(r);
  }
  return out;
}

}  // namespace texcomp
