#include "texcomp/texture/partial_conv.hpp"

#include "texcomp/error.hpp"

#include <cmath>

namespace texcomp {
inline namespace TEXCOMP_PRECISION_NS {

using nn::Real;
using nn::Tensor;

double partial_conv_window(std::span<const double> values, std::span<const double> weights,
                           std::span<const double> mask, double bias) {
  if (values.size() != weights.size() || values.size() != mask.size())
    throw Error(Errc::invalid_argument, "window, weights and mask must have the same size");
  double unmasked = 0.0, dot = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    unmasked += mask[i];
    dot += weights[i] * values[i] * mask[i];
  }
  if (unmasked <= 0.0) return 0.0;
  return dot * double(values.size()) / unmasked + bias;
}

bool update_mask_window(std::span<const double> mask) {
  for (double m : mask)
    if (m > 0.0) return true;
  return false;
}

PartialConv2d::PartialConv2d(const std::string& name, int in, int out, int k, int s, bool partial,
                             std::mt19937_64& rng)
    : weight(name + ".weight", {out, in * k * k}), bias(name + ".bias", {out}), in_channels(in),
      out_channels(out), kernel(k), stride(s), partial(partial) {
  if (k % 2 == 0 || k <= 0) throw Error(Errc::invalid_argument, "kernel extent must be odd");
  const Real bound = Real(1.0 / std::sqrt(double(in * k * k)));
  nn::init_uniform(weight.value, bound, rng);
  nn::init_uniform(bias.value, bound, rng);
}

void PartialConv2d::collect_parameters(std::vector<nn::Parameter*>& out) {
  out.push_back(&weight);
  out.push_back(&bias);
}

std::pair<Tensor, Tensor> PartialConv2d::forward(const Tensor& x, const Tensor& mask, PartialConvCache* cache) const {
  if (x.rank() != 4 || x.dim(1) != in_channels)
    throw Error(Errc::invalid_argument, weight.name + ": expected (B, " + std::to_string(in_channels) +
                                            ", H, W), got " + nn::shape_string(x.shape));
  if (partial && !mask.same_shape(x))
    throw Error(Errc::invalid_argument, weight.name + ": mask " + nn::shape_string(mask.shape) +
                                            " does not match features " + nn::shape_string(x.shape));
  const int b_count = x.dim(0), h = x.dim(2), w = x.dim(3), k = kernel, p = k / 2;
  const int oh = nn::conv_output_size(h, k, stride), ow = nn::conv_output_size(w, k, stride);
  const std::size_t plane = std::size_t(oh) * ow;

  Tensor masked = x;
  if (partial)
    for (std::size_t i = 0; i < masked.numel(); ++i) masked.data[i] *= mask.data[i];
  Tensor y = nn::conv2d_apply(masked, weight.value, k, stride);
  Tensor ratio({b_count, 1, oh, ow}, Real(1));

  if (partial) {
    // Masked-entry count per window from a summed-area table of the per-pixel
    // masked-channel count; padding contributes nothing.
    const double window = double(in_channels) * k * k;
    std::vector<double> table(std::size_t(h + 1) * (w + 1));
    for (int b = 0; b < b_count; ++b) {
      std::fill(table.begin(), table.end(), 0.0);
      for (int yy = 0; yy < h; ++yy)
        for (int xx = 0; xx < w; ++xx) {
          double holes = 0.0;
          for (int c = 0; c < in_channels; ++c)
            holes += 1.0 - double(mask.data[((std::size_t(b) * in_channels + c) * h + yy) * w + xx]);
          table[std::size_t(yy + 1) * (w + 1) + xx + 1] = holes + table[std::size_t(yy) * (w + 1) + xx + 1] +
                                                          table[std::size_t(yy + 1) * (w + 1) + xx] -
                                                          table[std::size_t(yy) * (w + 1) + xx];
        }
      for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
          const int y0 = std::max(0, oy * stride - p), y1 = std::min(h, oy * stride - p + k);
          const int x0 = std::max(0, ox * stride - p), x1 = std::min(w, ox * stride - p + k);
          const double holes = table[std::size_t(y1) * (w + 1) + x1] - table[std::size_t(y0) * (w + 1) + x1] -
                               table[std::size_t(y1) * (w + 1) + x0] + table[std::size_t(y0) * (w + 1) + x0];
          const double valid = window - holes;
          ratio.data[std::size_t(b) * plane + std::size_t(oy) * ow + ox] =
              valid > 0.5 ? Real(window / valid) : Real(0);
        }
    }
  }

  Tensor out_mask({b_count, out_channels, oh, ow});
  for (int b = 0; b < b_count; ++b)
    for (int o = 0; o < out_channels; ++o) {
      Real* yp = y.ptr() + (std::size_t(b) * out_channels + o) * plane;
      Real* mp = out_mask.ptr() + (std::size_t(b) * out_channels + o) * plane;
      const Real* rp = ratio.ptr() + std::size_t(b) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        const bool open = rp[i] > 0;
        yp[i] = open ? yp[i] * rp[i] + bias.value.data[o] : Real(0);
        mp[i] = open ? Real(1) : Real(0);
      }
    }
  if (cache) {
    cache->masked_input = std::move(masked);
    cache->mask = partial ? mask : Tensor();
    cache->ratio = std::move(ratio);
  }
  return {std::move(y), std::move(out_mask)};
}

Tensor PartialConv2d::backward(const Tensor& grad, const PartialConvCache& cache) {
  const int b_count = grad.dim(0);
  const std::size_t plane = std::size_t(grad.dim(2)) * grad.dim(3);
  Tensor scaled(grad.shape);
  for (int b = 0; b < b_count; ++b)
    for (int o = 0; o < out_channels; ++o) {
      const Real* gp = grad.ptr() + (std::size_t(b) * out_channels + o) * plane;
      const Real* rp = cache.ratio.ptr() + std::size_t(b) * plane;
      Real* sp = scaled.ptr() + (std::size_t(b) * out_channels + o) * plane;
      double sum = 0.0;
      for (std::size_t i = 0; i < plane; ++i) {
        sp[i] = gp[i] * rp[i];
        if (rp[i] > 0) sum += gp[i];
      }
      bias.grad.data[o] += Real(sum);
    }
  Tensor dx = nn::conv2d_backprop(cache.masked_input, weight.value, scaled, kernel, stride, weight.grad);
  if (!cache.mask.empty())
    for (std::size_t i = 0; i < dx.numel(); ++i) dx.data[i] *= cache.mask.data[i];
  return dx;
}

Tensor downsample_mask(const Tensor& mask) {
  const int h = mask.dim(2), w = mask.dim(3);
  if (h % 2 || w % 2) throw Error(Errc::invalid_argument, "mask size must be even to downsample");
  Tensor out({mask.dim(0), mask.dim(1), h / 2, w / 2});
  for (int bc = 0; bc < mask.dim(0) * mask.dim(1); ++bc) {
    const Real* src = mask.ptr() + std::size_t(bc) * h * w;
    Real* dst = out.ptr() + std::size_t(bc) * (h / 2) * (w / 2);
    for (int y = 0; y < h / 2; ++y)
      for (int x = 0; x < w / 2; ++x)
        dst[std::size_t(y) * (w / 2) + x] =
            std::max({src[std::size_t(2 * y) * w + 2 * x], src[std::size_t(2 * y) * w + 2 * x + 1],
                      src[std::size_t(2 * y + 1) * w + 2 * x], src[std::size_t(2 * y + 1) * w + 2 * x + 1]});
  }
  return out;
}

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp
