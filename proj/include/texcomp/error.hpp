#pragma once

#include <stdexcept>
#include <string>

namespace texcomp {

enum class Errc {
  missing_file,
  malformed_geometry,
  missing_atlas,
  index_out_of_range,
  degenerate_mesh,
  zero_area,
  missing_uv,
  missing_colors,
  invalid_argument,
  resolution_mismatch,
  feature_mismatch,
  config_mismatch,
  non_finite_loss,
  non_watertight,
  unnormalized_input,
  packing_failure,
  frame_mismatch,
  removal_exhausted,
  no_visible_triangles,
  missing_artifact,
  unknown_experiment,
  io_failure,
  untrained_model,
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace texcomp
