#pragma once

#include "texcomp/nn/layers.hpp"

#include <cstdint>
#include <vector>

namespace texcomp {
inline namespace TEXCOMP_PRECISION_NS {

struct InpaintLossWeights {
  double valid = 1.0;
  double hole = 6.0;
  double perceptual = 0.05;
  double style = 120.0;
  double total_variation = 0.1;
};

struct InpaintLossTerms {
  double valid = 0.0;
  double hole = 0.0;
  double perceptual = 0.0;
  double style = 0.0;
  double total_variation = 0.0;
  double total = 0.0;  // weighted sum
};

// Fixed feature stack for the perceptual and style terms: three stages of
// 3x3 convolution, ReLU and 2x2 max pooling (3 -> 8 -> 16 -> 32 channels),
// randomly initialized from a seed and never trained.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(std::uint64_t seed = 0x5eed);

  static constexpr int kStages = 3;

  // Stage outputs for a (B, 3, H, W) batch; H and W must be divisible by 8.
  std::vector<nn::Tensor> features(const nn::Tensor& image) const;
  std::vector<nn::Tensor> forward(const nn::Tensor& image, std::vector<std::vector<nn::LayerCache>>& caches);
  // Input gradient from per-stage output gradients (empty entries count as 0).
  nn::Tensor backward(const std::vector<nn::Tensor>& stage_grads,
                      const std::vector<std::vector<nn::LayerCache>>& caches);

 private:
  std::vector<nn::Sequential> stages_;
};

// Loss of the inpainting network output against the ground-truth atlas.
// output and target are (B, 3, H, W); mask (M_c) and background (M_b) are
// (B, 1, H, W). Everything outside the background mask is ignored. With the
// valid region V = M * M_b and hole region H = (1 - M) * M_b and the
// composite C = V * target + H * output:
//   valid, hole   L1 over V and H, divided by B * 3 * H * W
//   perceptual    mean L1 between extractor features of output and of C and
//                 those of the target, summed over stages
//   style         the same with per-stage Gram matrices F F^T / (C H W)
//   tv            L1 between horizontally and vertically adjacent pixels of
//                 C inside M_b with at least one in H, divided by B * 3 * H * W
// When grad is non-null it receives d total / d output.
InpaintLossTerms inpaint_loss(const nn::Tensor& output, const nn::Tensor& target, const nn::Tensor& mask,
                              const nn::Tensor& background, const InpaintLossWeights& weights,
                              FeatureExtractor& extractor, nn::Tensor* grad);

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp
