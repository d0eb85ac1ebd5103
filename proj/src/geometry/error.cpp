#include "texcomp/error.hpp"

namespace texcomp {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::missing_file: return "missing file";
    case Errc::malformed_geometry: return "malformed geometry";
    case Errc::missing_atlas: return "missing atlas image";
    case Errc::index_out_of_range: return "index out of range";
    case Errc::degenerate_mesh: return "degenerate mesh";
    case Errc::zero_area: return "zero-area mesh";
    case Errc::missing_uv: return "missing uv assignment";
    case Errc::missing_colors: return "missing colors";
    case Errc::invalid_argument: return "invalid argument";
    case Errc::resolution_mismatch: return "resolution mismatch";
    case Errc::feature_mismatch: return "feature length mismatch";
    case Errc::config_mismatch: return "config mismatch";
    case Errc::non_finite_loss: return "non-finite loss";
    case Errc::non_watertight: return "non-watertight mesh";
    case Errc::unnormalized_input: return "unnormalized input";
    case Errc::packing_failure: return "uv packing failure";
    case Errc::frame_mismatch: return "frame mismatch";
    case Errc::removal_exhausted: return "removal exhausted";
    case Errc::no_visible_triangles: return "no visible triangles";
    case Errc::missing_artifact: return "missing artifact";
    case Errc::unknown_experiment: return "unknown experiment";
    case Errc::io_failure: return "i/o failure";
    case Errc::untrained_model: return "untrained model";
  }
  return "unknown error";
}

}  // namespace texcomp
