#pragma once

#include "texcomp/geometry/mesh.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace texcomp {

// Per-sample distances from points on one mesh to the other mesh, and the
// RGB L2 difference between the sampled color and the color at the closest
// point.
struct DirectedSamples {
  std::vector<double> distances;
  std::vector<double> color_differences;  // empty when a mesh has no color
};

struct SurfaceSamples {
  DirectedSamples pred_to_gt;
  DirectedSamples gt_to_pred;
};

// `count` area-uniform samples in each direction. Throws degenerate_mesh for
// an empty mesh and frame_mismatch when the two bounding boxes together span
// more than 1.25 times the larger of their diagonals.
SurfaceSamples surface_distance_samples(const TexturedMesh& pred, const TexturedMesh& gt, std::size_t count,
                                        std::uint64_t seed);

// Distances below this count as exact matches, absorbing closest-point and
// texture-filtering round-off so identical meshes score exactly 1.
constexpr double kDistanceSnap = 1e-9;
constexpr double kColorSnap = 1e-6;

// Mean of max(0, 1 - d / d0); values at or below `snap` count as 0.
double distance_to_score(std::span<const double> values, double d0, double snap = 0.0);

// min(A_pred, A_gt) / max(A_pred, A_gt) of total surface areas; 0 when
// either is empty.
double area_score(const TexturedMesh& pred, const TexturedMesh& gt);

double final_score(double shape, double texture, double area);

struct ScoreOptions {
  std::size_t samples = 20000;
  double shape_d0 = 0.05;
  double texture_d0 = 0.25;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

struct DistanceStats {
  double mean = 0.0;
  double max = 0.0;
};

struct ScoreReport {
  std::string name;
  double shape = 0.0;    // S_s
  double texture = 0.0;  // S_t
  double area = 0.0;     // S_a
  double final = 0.0;    // S_r
  std::size_t samples_per_direction = 0;
  DistanceStats pred_to_gt;
  DistanceStats gt_to_pred;
  DistanceStats color;

  nlohmann::json to_json() const;
};

// Scores of one completed scan; both directions are averaged for shape and
// texture. An empty prediction scores 0 everywhere.
ScoreReport evaluate_scan(const std::string& name, const TexturedMesh& pred, const TexturedMesh& gt,
                          const ScoreOptions& options = {});

struct ScoreAggregate {
  double mean[4] = {0, 0, 0, 0};  // shape, texture, area, final
  double stddev[4] = {0, 0, 0, 0};
  std::size_t count = 0;
};

// Population mean and standard deviation over the reports.
ScoreAggregate aggregate(const std::vector<ScoreReport>& reports);

// One JSON object per line: a header with the score mapping, one record per
// scan, then the aggregate.
void write_score_report(const std::filesystem::path& path, const std::vector<ScoreReport>& reports,
                        const ScoreOptions& options);
std::vector<ScoreReport> read_score_report(const std::filesystem::path& path);

}  // namespace texcomp
