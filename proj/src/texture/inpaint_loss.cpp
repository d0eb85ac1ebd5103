#include "texcomp/texture/inpaint_loss.hpp"

#include "texcomp/error.hpp"

#include <cmath>
#include <random>

namespace texcomp {
inline namespace TEXCOMP_PRECISION_NS {

using nn::Real;
using nn::Tensor;

namespace {

double sign(double v) { return v > 0 ? 1.0 : v < 0 ? -1.0 : 0.0; }

// Mean absolute difference; accumulates sign / n * scale into ga when given.
double mean_l1(const Tensor& a, const Tensor& b, double scale, Tensor* ga) {
  const double n = double(a.numel());
  double sum = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    const double d = double(a.data[i]) - double(b.data[i]);
    sum += std::abs(d);
    if (ga) ga->data[i] += Real(scale * sign(d) / n);
  }
  return sum / n;
}

// Per-batch Gram matrices (B, C, C) of (B, C, H, W) features.
Tensor gram(const Tensor& f) {
  const int b_count = f.dim(0), c = f.dim(1);
  const int hw = f.dim(2) * f.dim(3);
  const double norm = double(c) * hw;
  Tensor g({b_count, c, c});
  for (int b = 0; b < b_count; ++b) {
    nn::ConstMatrixMap fm(f.ptr() + std::size_t(b) * c * hw, c, hw);
    nn::MatrixMap gm(g.ptr() + std::size_t(b) * c * c, c, c);
    gm.noalias() = fm * fm.transpose();
    gm /= Real(norm);
  }
  return g;
}

// d/dF of a scalar given dL/dG for G = gram(F).
void gram_backward(const Tensor& f, const Tensor& dg, Tensor& df) {
  const int b_count = f.dim(0), c = f.dim(1);
  const int hw = f.dim(2) * f.dim(3);
  const double norm = double(c) * hw;
  for (int b = 0; b < b_count; ++b) {
    nn::ConstMatrixMap fm(f.ptr() + std::size_t(b) * c * hw, c, hw);
    nn::ConstMatrixMap gm(dg.ptr() + std::size_t(b) * c * c, c, c);
    nn::MatrixMap dm(df.ptr() + std::size_t(b) * c * hw, c, hw);
    nn::RowMatrix sym = (gm + gm.transpose()) / Real(norm);
    dm.noalias() += sym * fm;
  }
}

}  // namespace

FeatureExtractor::FeatureExtractor(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int widths[kStages + 1] = {3, 8, 16, 32};
  for (int s = 0; s < kStages; ++s) {
    nn::Sequential stage;
    stage.add(std::make_unique<nn::Conv2d>("features" + std::to_string(s), widths[s], widths[s + 1], 3, 1, rng));
    stage.add(std::make_unique<nn::ReLU>());
    stage.add(std::make_unique<nn::MaxPool2d>());
    stages_.push_back(std::move(stage));
  }
}

std::vector<Tensor> FeatureExtractor::features(const Tensor& image) const {
  std::vector<Tensor> out;
  Tensor h = image;
  for (const auto& stage : stages_) {
    h = stage.infer(h);
    out.push_back(h);
  }
  return out;
}

std::vector<Tensor> FeatureExtractor::forward(const Tensor& image, std::vector<std::vector<nn::LayerCache>>& caches) {
  caches.assign(stages_.size(), {});
  std::vector<Tensor> out;
  Tensor h = image;
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    h = stages_[s].forward(h, caches[s]);
    out.push_back(h);
  }
  return out;
}

Tensor FeatureExtractor::backward(const std::vector<Tensor>& stage_grads,
                                  const std::vector<std::vector<nn::LayerCache>>& caches) {
  Tensor g;
  for (std::size_t s = stages_.size(); s-- > 0;) {
    if (!stage_grads[s].empty()) {
      if (g.empty()) g = Tensor(stage_grads[s].shape);
      g += stage_grads[s];
    }
    if (g.empty()) continue;
    g = stages_[s].backward(g, caches[s]);
  }
  // The weights are frozen; drop what backward accumulated.
  for (auto& stage : stages_) {
    std::vector<nn::Parameter*> params;
    stage.collect_parameters(params);
    for (nn::Parameter* p : params) p->zero_grad();
  }
  return g;
}

InpaintLossTerms inpaint_loss(const Tensor& output, const Tensor& target, const Tensor& mask,
                              const Tensor& background, const InpaintLossWeights& weights,
                              FeatureExtractor& extractor, Tensor* grad) {
  if (output.rank() != 4 || output.dim(1) != 3 || !output.same_shape(target))
    throw Error(Errc::invalid_argument, "inpainting loss: output " + nn::shape_string(output.shape) +
                                            " and target " + nn::shape_string(target.shape) +
                                            " must both be (B, 3, H, W)");
  const std::vector<int> mask_shape{output.dim(0), 1, output.dim(2), output.dim(3)};
  if (mask.shape != mask_shape || background.shape != mask_shape)
    throw Error(Errc::invalid_argument, "inpainting loss: masks must be " + nn::shape_string(mask_shape));

  const int b_count = output.dim(0), h = output.dim(2), w = output.dim(3);
  const std::size_t plane = std::size_t(h) * w;
  const double n = double(output.numel());

  // Region weights per pixel: valid, hole, inside.
  Tensor out_b(output.shape), gt_b(output.shape), comp(output.shape);
  std::vector<double> hole_px(std::size_t(b_count) * plane), valid_px(hole_px.size());
  for (int b = 0; b < b_count; ++b)
    for (std::size_t i = 0; i < plane; ++i) {
      const double mb = background.data[std::size_t(b) * plane + i];
      const double m = mask.data[std::size_t(b) * plane + i];
      valid_px[std::size_t(b) * plane + i] = m * mb;
      hole_px[std::size_t(b) * plane + i] = (1.0 - m) * mb;
      for (int c = 0; c < 3; ++c) {
        const std::size_t k = (std::size_t(b) * 3 + c) * plane + i;
        out_b.data[k] = Real(output.data[k] * mb);
        gt_b.data[k] = Real(target.data[k] * mb);
        comp.data[k] = Real(m * mb * target.data[k] + (1.0 - m) * mb * output.data[k]);
      }
    }

  InpaintLossTerms terms;
  Tensor g_out(output.shape), g_comp(output.shape);
  const bool want_grad = grad != nullptr;

  for (int b = 0; b < b_count; ++b)
    for (int c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < plane; ++i) {
        const std::size_t k = (std::size_t(b) * 3 + c) * plane + i;
        const double d = double(output.data[k]) - double(target.data[k]);
        const double v = valid_px[std::size_t(b) * plane + i], hl = hole_px[std::size_t(b) * plane + i];
        terms.valid += v * std::abs(d);
        terms.hole += hl * std::abs(d);
        if (want_grad) g_out.data[k] += Real((weights.valid * v + weights.hole * hl) * sign(d) / n);
      }
  terms.valid /= n;
  terms.hole /= n;

  if (weights.perceptual != 0.0 || weights.style != 0.0) {
    const std::vector<Tensor> f_gt = extractor.features(gt_b);
    std::vector<std::vector<nn::LayerCache>> cache_out, cache_comp;
    const std::vector<Tensor> f_out = extractor.forward(out_b, cache_out);
    const std::vector<Tensor> f_comp = extractor.forward(comp, cache_comp);
    std::vector<Tensor> gf_out(f_out.size()), gf_comp(f_comp.size());
    for (std::size_t s = 0; s < f_out.size(); ++s) {
      gf_out[s] = Tensor(f_out[s].shape);
      gf_comp[s] = Tensor(f_comp[s].shape);
      terms.perceptual += mean_l1(f_out[s], f_gt[s], weights.perceptual, want_grad ? &gf_out[s] : nullptr);
      terms.perceptual += mean_l1(f_comp[s], f_gt[s], weights.perceptual, want_grad ? &gf_comp[s] : nullptr);

      const Tensor g_gt = gram(f_gt[s]);
      const Tensor g_o = gram(f_out[s]);
      const Tensor g_c = gram(f_comp[s]);
      Tensor dg_o(g_o.shape), dg_c(g_c.shape);
      terms.style += mean_l1(g_o, g_gt, weights.style, want_grad ? &dg_o : nullptr);
      terms.style += mean_l1(g_c, g_gt, weights.style, want_grad ? &dg_c : nullptr);
      if (want_grad) {
        gram_backward(f_out[s], dg_o, gf_out[s]);
        gram_backward(f_comp[s], dg_c, gf_comp[s]);
      }
    }
    if (want_grad) {
      const Tensor d_out_b = extractor.backward(gf_out, cache_out);
      const Tensor d_comp = extractor.backward(gf_comp, cache_comp);
      for (int b = 0; b < b_count; ++b)
        for (int c = 0; c < 3; ++c)
          for (std::size_t i = 0; i < plane; ++i) {
            const std::size_t k = (std::size_t(b) * 3 + c) * plane + i;
            g_out.data[k] += Real(background.data[std::size_t(b) * plane + i] * d_out_b.data[k]);
            g_comp.data[k] += d_comp.data[k];
          }
    }
  }

  if (weights.total_variation != 0.0) {
    const double scale = weights.total_variation / n;
    auto pair = [&](int b, std::size_t p, std::size_t q) {
      const std::size_t bp = std::size_t(b) * plane;
      if (background.data[bp + p] == 0 || background.data[bp + q] == 0) return;
      if (hole_px[bp + p] == 0.0 && hole_px[bp + q] == 0.0) return;
      for (int c = 0; c < 3; ++c) {
        const std::size_t base = (std::size_t(b) * 3 + c) * plane;
        const double d = double(comp.data[base + p]) - double(comp.data[base + q]);
        terms.total_variation += std::abs(d);
        if (want_grad) {
          g_comp.data[base + p] += Real(scale * sign(d));
          g_comp.data[base + q] -= Real(scale * sign(d));
        }
      }
    };
    for (int b = 0; b < b_count; ++b)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const std::size_t p = std::size_t(y) * w + x;
          if (x + 1 < w) pair(b, p, p + 1);
          if (y + 1 < h) pair(b, p, p + w);
        }
    terms.total_variation /= n;
  }

  // The composite depends on the output only inside the holes.
  if (want_grad) {
    for (int b = 0; b < b_count; ++b)
      for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < plane; ++i) {
          const std::size_t k = (std::size_t(b) * 3 + c) * plane + i;
          g_out.data[k] += Real(hole_px[std::size_t(b) * plane + i] * g_comp.data[k]);
        }
    *grad = std::move(g_out);
  }

  terms.total = weights.valid * terms.valid + weights.hole * terms.hole + weights.perceptual * terms.perceptual +
                weights.style * terms.style + weights.total_variation * terms.total_variation;
  return terms;
}

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp
