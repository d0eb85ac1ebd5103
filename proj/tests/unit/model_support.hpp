#pragma once

#include "texcomp/geometry/fixtures.hpp"
#include "texcomp/implicit/config.hpp"
#include "texcomp/training/sample.hpp"

namespace texcomp::test {

inline ModelConfig tiny_model_config(int resolution = 16, int base = 2, std::vector<int> widths = {32, 16, 16}) {
  ModelConfig c;
  c.resolution = resolution;
  c.shape_base_channels = base;
  c.texture_base_channels = base;
  c.shape_decoder_widths = widths;
  c.texture_decoder_widths = widths;
  return c;
}

// The fixture is its own partial scan: enough for the training loop, which
// only needs grids and point banks.
inline TrainingSample fixture_sample(const Fixture& fx, int resolution, int bank, std::uint64_t seed) {
  SampleOptions o;
  o.bank_size = bank;
  o.voxel_points = 20000;
  TrainingSample s = build_training_sample(fx.mesh, fx.mesh, resolution, seed, o, fx.inside);
  s.name = fx.name;
  return s;
}

}  // namespace texcomp::test
