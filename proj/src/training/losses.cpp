#include "texcomp/training/losses.hpp"

#include "texcomp/error.hpp"

#include <cmath>

namespace texcomp {
inline namespace TEXCOMP_PRECISION_NS {

using nn::Real;
using nn::Tensor;

LossResult shape_loss(const Tensor& logits, const Tensor& labels) {
  if (logits.numel() != labels.numel())
    throw Error(Errc::invalid_argument, "logits and labels differ in length: " + std::to_string(logits.numel()) +
                                            " vs " + std::to_string(labels.numel()));
  if (logits.numel() == 0) throw Error(Errc::invalid_argument, "empty loss input");
  LossResult out{0.0, Tensor(logits.shape)};
  const double scale = 1.0 / double(logits.numel());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.numel(); ++i) {
    const double x = logits.data[i], y = labels.data[i];
    if (y != 0.0 && y != 1.0)
      throw Error(Errc::invalid_argument, "occupancy label " + std::to_string(y) + " is not 0 or 1");
    // log(1 + e^x) - x*y without overflow for large |x|
    sum += std::max(x, 0.0) - x * y + std::log1p(std::exp(-std::abs(x)));
    const double sigmoid = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    out.grad.data[i] = Real((sigmoid - y) * scale);
  }
  out.value = sum * scale;
  return out;
}

LossResult texture_loss(const Tensor& predicted, const Tensor& target) {
  if (!predicted.same_shape(target))
    throw Error(Errc::invalid_argument, "color shapes differ: " + nn::shape_string(predicted.shape) + " vs " +
                                            nn::shape_string(target.shape));
  if (predicted.numel() == 0) throw Error(Errc::invalid_argument, "empty loss input");
  LossResult out{0.0, Tensor(predicted.shape)};
  const double scale = 1.0 / double(predicted.numel());
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.numel(); ++i) {
    const double d = double(predicted.data[i]) - double(target.data[i]);
    sum += std::abs(d);
    out.grad.data[i] = Real(d > 0.0 ? scale : d < 0.0 ? -scale : 0.0);
  }
  out.value = sum * scale;
  return out;
}

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp
