#pragma once

#include "texcomp/nn/layers.hpp"

#include <span>

namespace texcomp {
inline namespace TEXCOMP_PRECISION_NS {

// Single-window reference of the masked convolution: the weighted sum of the
// unmasked values, rescaled by window size over unmasked count, plus bias;
// zero when nothing in the window is unmasked.
double partial_conv_window(std::span<const double> values, std::span<const double> weights,
                           std::span<const double> mask, double bias);
// The mask rule: a location stays masked only if its whole window is masked.
bool update_mask_window(std::span<const double> mask);

// Cached by PartialConv2d::forward for the backward pass.
struct PartialConvCache {
  nn::Tensor masked_input;  // x * m
  nn::Tensor mask;
  nn::Tensor ratio;         // (B, 1, Ho, Wo); 0 where the window is fully masked
};

// Square-kernel convolution on (B, C, H, W) features with a same-shaped 0/1
// mask. Zero padding counts as unmasked, so an all-ones mask reproduces the
// ordinary zero-padded convolution exactly. With partial = false the mask is
// ignored and the layer is an ordinary convolution whose output mask is all
// ones.
class PartialConv2d {
 public:
  PartialConv2d(const std::string& name, int in_channels, int out_channels, int kernel, int stride,
                bool partial, std::mt19937_64& rng);

  // Returns features and the updated mask, both (B, out, Ho, Wo).
  std::pair<nn::Tensor, nn::Tensor> forward(const nn::Tensor& x, const nn::Tensor& mask,
                                            PartialConvCache* cache) const;
  // Accumulates parameter gradients; returns the gradient for x.
  nn::Tensor backward(const nn::Tensor& grad, const PartialConvCache& cache);
  void collect_parameters(std::vector<nn::Parameter*>& out);

  nn::Parameter weight;  // (out, in * k * k)
  nn::Parameter bias;
  int in_channels;
  int out_channels;
  int kernel;
  int stride;
  bool partial;
};

// 2x2 block maximum of a (B, C, H, W) mask; the background mask follows the
// network to coarser levels this way without ever being updated.
nn::Tensor downsample_mask(const nn::Tensor& mask);

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp
