#pragma once

#include "texcomp/nn/precision.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace texcomp {
inline namespace TEXCOMP_PRECISION_NS {

// Layer schedule shared by both encoders. Channel counts are written for a
// base width of 16 and scale linearly with the configured base width.
//   c3-k  conv-relu-batchnorm
//   d3-k  conv-relu, conv-relu, batchnorm
//   mp    2x max pooling
//   gs-i  feature tap sampled by the query points
inline constexpr const char* kDefaultEncoderSchedule =
    "gs-0, c3-16, gs-1, mp, d3-32, d3-32, gs-2, mp, d3-64, d3-64, gs-3, mp, d3-128, gs-4, mp, "
    "d3-128, d3-128, gs-5";

struct EncoderConfig {
  int resolution = 128;      // N
  int input_channels = 1;    // 1 for occupancy, 3 for color
  int base_channels = 16;    // d_1 or r_1
  std::string schedule = kDefaultEncoderSchedule;
};

struct ModelConfig {
  int resolution = 128;
  int shape_base_channels = 16;
  int texture_base_channels = 16;
  std::vector<int> shape_decoder_widths = {512, 256, 256};
  std::vector<int> texture_decoder_widths = {512, 256, 256};
  double displacement = 0.0722;  // tap offset along each axis, normalized units
  bool fusion = true;            // feed shape features to the texture decoder
  std::string schedule = kDefaultEncoderSchedule;

  EncoderConfig shape_encoder() const { return {resolution, 1, shape_base_channels, schedule}; }
  EncoderConfig texture_encoder() const { return {resolution, 3, texture_base_channels, schedule}; }

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// One parsed schedule entry.
struct ScheduleOp {
  enum Kind { tap, c3, d3, pool } kind;
  int value;  // tap index or scaled channel count
};

std::vector<ScheduleOp> parse_schedule(const std::string& schedule, int base_channels);

// Tap channel counts and resolutions implied by a schedule.
struct PyramidLayout {
  std::vector<int> channels;
  std::vector<int> resolutions;
  int feature_length() const;  // sum of channels x 7 taps
};

PyramidLayout pyramid_layout(const EncoderConfig& config);

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp
