#include "texcomp/implicit/config.hpp"

#include "texcomp/error.hpp"
#include "texcomp/implicit/grid_sample.hpp"

#include <numeric>
#include <sstream>

namespace texcomp {
inline namespace TEXCOMP_PRECISION_NS {

nlohmann::json ModelConfig::to_json() const {
  return {{"resolution", resolution},
          {"shape_base_channels", shape_base_channels},
          {"texture_base_channels", texture_base_channels},
          {"shape_decoder_widths", shape_decoder_widths},
          {"texture_decoder_widths", texture_decoder_widths},
          {"displacement", displacement},
          {"fusion", fusion},
          {"schedule", schedule}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  try {
    c.resolution = j.at("resolution").get<int>();
    c.shape_base_channels = j.at("shape_base_channels").get<int>();
    c.texture_base_channels = j.at("texture_base_channels").get<int>();
    c.shape_decoder_widths = j.at("shape_decoder_widths").get<std::vector<int>>();
    c.texture_decoder_widths = j.at("texture_decoder_widths").get<std::vector<int>>();
    c.displacement = j.at("displacement").get<double>();
    c.fusion = j.at("fusion").get<bool>();
    c.schedule = j.at("schedule").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::config_mismatch, std::string("incomplete model configuration: ") + e.what());
  }
  return c;
}

std::vector<ScheduleOp> parse_schedule(const std::string& schedule, int base_channels) {
  std::vector<ScheduleOp> ops;
  std::stringstream in(schedule);
  std::string token;
  while (std::getline(in, token, ',')) {
    const auto first = token.find_first_not_of(" \t");
    const auto last = token.find_last_not_of(" \t");
    if (first == std::string::npos) continue;
    token = token.substr(first, last - first + 1);
    auto number = [&](std::size_t at) {
      try {
        return std::stoi(token.substr(at));
      } catch (const std::exception&) {
        throw Error(Errc::invalid_argument, "bad schedule entry '" + token + "'");
      }
    };
    if (token == "mp") {
      ops.push_back({ScheduleOp::pool, 0});
    } else if (token.rfind("gs-", 0) == 0) {
      ops.push_back({ScheduleOp::tap, number(3)});
    } else if (token.rfind("c3-", 0) == 0 || token.rfind("d3-", 0) == 0) {
      const int scaled = number(3) * base_channels / 16;
      if (scaled <= 0) throw Error(Errc::invalid_argument, "schedule entry '" + token + "' scales to zero channels");
      ops.push_back({token[0] == 'c' ? ScheduleOp::c3 : ScheduleOp::d3, scaled});
    } else {
      throw Error(Errc::invalid_argument, "unknown schedule entry '" + token + "'");
    }
  }
  if (ops.empty() || ops.front().kind != ScheduleOp::tap)
    throw Error(Errc::invalid_argument, "schedule must start with a feature tap");
  return ops;
}

int PyramidLayout::feature_length() const {
  return kSampleTaps * std::accumulate(channels.begin(), channels.end(), 0);
}

PyramidLayout pyramid_layout(const EncoderConfig& config) {
  PyramidLayout layout;
  int channels = config.input_channels, resolution = config.resolution;
  for (const ScheduleOp& op : parse_schedule(config.schedule, config.base_channels)) {
    switch (op.kind) {
      case ScheduleOp::tap:
        layout.channels.push_back(channels);
        layout.resolutions.push_back(resolution);
        break;
      case ScheduleOp::c3:
      case ScheduleOp::d3:
        channels = op.value;
        break;
      case ScheduleOp::pool:
        resolution /= 2;
        break;
    }
  }
  return layout;
}

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp
