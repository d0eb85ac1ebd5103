#pragma once

#include "texcomp/nn/tensor.hpp"

namespace texcomp {
inline namespace TEXCOMP_PRECISION_NS {

// Loss value and its gradient with respect to the prediction tensor.
struct LossResult {
  double value = 0.0;
  nn::Tensor grad;
};

// Mean binary cross-entropy on logits (P, 1) against labels (P, 1) in {0, 1}.
LossResult shape_loss(const nn::Tensor& logits, const nn::Tensor& labels);

// Mean absolute error over all points and channels of (Q, 3) colors.
LossResult texture_loss(const nn::Tensor& predicted, const nn::Tensor& target);

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp
