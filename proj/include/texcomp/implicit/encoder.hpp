#pragma once

#include "texcomp/implicit/config.hpp"
#include "texcomp/implicit/grid_sample.hpp"
#include "texcomp/nn/layers.hpp"

#include <random>

namespace texcomp {
inline namespace TEXCOMP_PRECISION_NS {

struct EncoderCache {
  std::vector<std::vector<nn::LayerCache>> stages;
};

// 3D convolutional encoder producing one feature volume per tap of the schedule.
class VoxelEncoder {
 public:
  VoxelEncoder(const EncoderConfig& config, const std::string& name, std::mt19937_64& rng);

  const EncoderConfig& config() const { return config_; }
  const PyramidLayout& layout() const { return layout_; }

  Pyramid infer(const nn::Tensor& volume) const;
  Pyramid forward(const nn::Tensor& volume, EncoderCache& cache);
  // Accumulates parameter gradients from per-level gradients.
  void backward(const Pyramid& level_grads, const EncoderCache& cache);

  void collect_parameters(std::vector<nn::Parameter*>& out);
  void collect_buffers(std::vector<nn::Buffer*>& out);

 private:
  void check_input(const nn::Tensor& volume) const;

  EncoderConfig config_;
  PyramidLayout layout_;
  // stages_[i] maps tap i-1 to tap i; stage 0 is the identity.
  std::vector<nn::Sequential> stages_;
};

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp
