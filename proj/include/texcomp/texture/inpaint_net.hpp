#pragma once

#include "texcomp/texture/partial_conv.hpp"

#include <json.hpp>

#include <filesystem>

namespace texcomp {
inline namespace TEXCOMP_PRECISION_NS {

struct InpaintConfig {
  int resolution = 256;
  int base_channels = 16;
  bool partial = true;  // false: ordinary convolutions fed with [image * mask, mask]

  // 7 levels at 2048, one fewer per halving, at least 1.
  int depth() const;
  int channels(int level) const;  // min(base * 2^level, 8 * base)
  int kernel(int level) const;    // 7, 5, then 3

  nlohmann::json to_json() const;
  static InpaintConfig from_json(const nlohmann::json& j);
  friend bool operator==(const InpaintConfig&, const InpaintConfig&) = default;
};

struct InpaintCache {
  std::vector<PartialConvCache> encoder;
  std::vector<PartialConvCache> decoder;
  std::vector<nn::Tensor> encoder_pre;  // before ReLU
  std::vector<nn::Tensor> decoder_pre;  // before LeakyReLU
};

// U-Net of masked convolutions. Encoder: stride-2 layers with ReLU. Decoder:
// nearest upsampling, concatenation with the skip features and masks, a 3x3
// masked convolution and LeakyReLU(0.2); the last layer is linear with 3
// outputs. The background mask, block-max downsampled to each level, is
// multiplied into every layer's input mask.
class InpaintNet {
 public:
  InpaintNet(const InpaintConfig& config, std::uint64_t seed);

  const InpaintConfig& config() const { return config_; }

  // image (B, 3, H, W); mask and background (B, 1, H, W) with 1 = unmasked.
  nn::Tensor infer(const nn::Tensor& image, const nn::Tensor& mask, const nn::Tensor& background) const;
  nn::Tensor forward(const nn::Tensor& image, const nn::Tensor& mask, const nn::Tensor& background,
                     InpaintCache& cache) const;
  void backward(const nn::Tensor& grad_output, const InpaintCache& cache);

  std::vector<nn::Parameter*> parameters();

  long trained_steps = 0;

  void save(const std::filesystem::path& path) const;
  static InpaintNet load(const std::filesystem::path& path, const InpaintConfig* expected = nullptr);

 private:
  nn::Tensor run(const nn::Tensor& image, const nn::Tensor& mask, const nn::Tensor& background,
                 InpaintCache* cache) const;

  InpaintConfig config_;
  std::vector<PartialConv2d> encoder_;
  std::vector<PartialConv2d> decoder_;  // decoder_[i] produces level i
};

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp
