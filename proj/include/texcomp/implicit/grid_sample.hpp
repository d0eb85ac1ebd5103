#pragma once

#include "texcomp/nn/tensor.hpp"

#include <vector>

namespace texcomp {
inline namespace TEXCOMP_PRECISION_NS {

// Number of sampling taps per level: the point itself and +-delta along x, y, z.
inline constexpr int kSampleTaps = 7;

using Pyramid = std::vector<nn::Tensor>;  // levels of (B, C, K, K, K)

// Trilinear interpolation of every level at each point and its six displaced
// neighbors. Points are (B, P, 3) in [-0.5, 0.5]^3; the result is (B * P, F)
// with per-point layout [level][tap][channel]. Indices outside the grid clamp
// to the border.
nn::Tensor grid_sample_features(const Pyramid& pyramid, const nn::Tensor& points, double displacement);

// Gradient of grid_sample_features with respect to every level.
Pyramid grid_sample_backward(const Pyramid& pyramid, const nn::Tensor& points, double displacement,
                             const nn::Tensor& grad_features);

int sampled_feature_length(const Pyramid& pyramid);

// Continuous grid coordinate of a normalized position at resolution k.
inline double grid_coordinate(double p, int k) { return (p + 0.5) * k - 0.5; }

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp
