#include "texcomp/texture/inpaint_net.hpp"

#include "texcomp/error.hpp"
#include "texcomp/nn/checkpoint.hpp"

#include <bit>

namespace texcomp {
inline namespace TEXCOMP_PRECISION_NS {

using nn::Real;
using nn::Tensor;

namespace {

constexpr Real kLeakySlope = Real(0.2);

// (B, 1, H, W) -> (B, c, H, W)
Tensor broadcast_channels(const Tensor& m, int c) {
  const std::size_t plane = std::size_t(m.dim(2)) * m.dim(3);
  Tensor out({m.dim(0), c, m.dim(2), m.dim(3)});
  for (int b = 0; b < m.dim(0); ++b)
    for (int k = 0; k < c; ++k)
      std::copy_n(m.ptr() + std::size_t(b) * plane, plane, out.ptr() + (std::size_t(b) * c + k) * plane);
  return out;
}

// mask * background, background broadcast over channels
Tensor apply_background(const Tensor& mask, const Tensor& background) {
  Tensor out = mask;
  const int c = mask.dim(1);
  const std::size_t plane = std::size_t(mask.dim(2)) * mask.dim(3);
  for (int b = 0; b < mask.dim(0); ++b)
    for (int k = 0; k < c; ++k) {
      Real* p = out.ptr() + (std::size_t(b) * c + k) * plane;
      const Real* g = background.ptr() + std::size_t(b) * plane;
      for (std::size_t i = 0; i < plane; ++i) p[i] *= g[i];
    }
  return out;
}

Tensor relu(const Tensor& x, Real slope) {
  Tensor y = x;
  for (Real& v : y.data)
    if (v < 0) v *= slope;
  return y;
}

void relu_backward(Tensor& grad, const Tensor& pre, Real slope) {
  for (std::size_t i = 0; i < grad.numel(); ++i)
    if (pre.data[i] < 0) grad.data[i] *= slope;
}

void check_input(const Tensor& t, int channels, int b, int h, int w, const char* what) {
  if (t.rank() != 4 || t.dim(0) != b || t.dim(1) != channels || t.dim(2) != h || t.dim(3) != w)
    throw Error(Errc::invalid_argument, std::string(what) + " has shape " + nn::shape_string(t.shape) +
                                            ", expected (" + std::to_string(b) + ", " + std::to_string(channels) +
                                            ", " + std::to_string(h) + ", " + std::to_string(w) + ")");
}

}  // namespace

int InpaintConfig::depth() const {
  if (resolution <= 0 || !std::has_single_bit(unsigned(resolution)))
    throw Error(Errc::invalid_argument, "inpainting resolution must be a power of two, got " +
                                            std::to_string(resolution));
  return std::max(1, int(std::bit_width(unsigned(resolution))) - 1 - 4);
}

int InpaintConfig::channels(int level) const { return std::min(base_channels << level, 8 * base_channels); }

int InpaintConfig::kernel(int level) const { return level == 0 ? 7 : level == 1 ? 5 : 3; }

nlohmann::json InpaintConfig::to_json() const {
  return {{"resolution", resolution}, {"base_channels", base_channels}, {"partial", partial}};
}

InpaintConfig InpaintConfig::from_json(const nlohmann::json& j) {
  InpaintConfig c;
  c.resolution = j.at("resolution").get<int>();
  c.base_channels = j.at("base_channels").get<int>();
  c.partial = j.at("partial").get<bool>();
  return c;
}

InpaintNet::InpaintNet(const InpaintConfig& config, std::uint64_t seed) : config_(config) {
  const int depth = config.depth();
  std::mt19937_64 rng(seed);
  const int input = config.partial ? 3 : 4;
  for (int i = 0; i < depth; ++i)
    encoder_.emplace_back("inpaint.enc" + std::to_string(i), i == 0 ? input : config.channels(i - 1),
                          config.channels(i), config.kernel(i), 2, config.partial, rng);
  for (int i = 0; i < depth; ++i) {
    const int up = config.channels(i);
    const int skip = i == 0 ? input : config.channels(i - 1);
    const int out = i == 0 ? 3 : config.channels(i - 1);
    decoder_.emplace_back("inpaint.dec" + std::to_string(i), up + skip, out, 3, 1, config.partial, rng);
  }
}

Tensor InpaintNet::infer(const Tensor& image, const Tensor& mask, const Tensor& background) const {
  return run(image, mask, background, nullptr);
}

Tensor InpaintNet::forward(const Tensor& image, const Tensor& mask, const Tensor& background,
                           InpaintCache& cache) const {
  return run(image, mask, background, &cache);
}

Tensor InpaintNet::run(const Tensor& image, const Tensor& mask, const Tensor& background, InpaintCache* cache) const {
  if (image.rank() != 4) throw Error(Errc::invalid_argument, "image must be (B, 3, H, W)");
  const int b = image.dim(0), h = image.dim(2), w = image.dim(3);
  const int depth = int(encoder_.size());
  check_input(image, 3, b, h, w, "image");
  check_input(mask, 1, b, h, w, "mask");
  check_input(background, 1, b, h, w, "background mask");
  if (h % (1 << depth) || w % (1 << depth))
    throw Error(Errc::invalid_argument, "atlas size " + std::to_string(w) + "x" + std::to_string(h) +
                                            " is not divisible by 2^" + std::to_string(depth));

  std::vector<Tensor> background_levels{background};
  for (int i = 1; i <= depth; ++i) background_levels.push_back(downsample_mask(background_levels.back()));

  const bool partial = config_.partial;
  Tensor x0, m0;
  if (partial) {
    x0 = image;
    m0 = apply_background(broadcast_channels(mask, 3), background);
  } else {
    Tensor masked = image;
    const std::size_t plane = std::size_t(h) * w;
    for (int k = 0; k < b; ++k)
      for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < plane; ++i)
          masked.data[(std::size_t(k) * 3 + c) * plane + i] *= mask.data[std::size_t(k) * plane + i];
    x0 = nn::concat_channels(masked, mask);
  }

  if (cache) {
    cache->encoder.assign(depth, {});
    cache->decoder.assign(depth, {});
    cache->encoder_pre.assign(depth, {});
    cache->decoder_pre.assign(depth, {});
  }

  std::vector<Tensor> features(depth), masks(depth);
  Tensor x = x0, m = m0;
  for (int i = 0; i < depth; ++i) {
    const Tensor input_mask = partial ? apply_background(m, background_levels[i]) : Tensor();
    auto [y, next_mask] = encoder_[i].forward(x, input_mask, cache ? &cache->encoder[i] : nullptr);
    features[i] = relu(y, 0);
    masks[i] = std::move(next_mask);
    if (cache) cache->encoder_pre[i] = std::move(y);
    x = features[i];
    m = masks[i];
  }

  Tensor hidden = features[depth - 1], hidden_mask = masks[depth - 1];
  for (int i = depth - 1; i >= 0; --i) {
    const Tensor& skip = i > 0 ? features[i - 1] : x0;
    Tensor joined = nn::concat_channels(nn::upsample2x(hidden), skip);
    Tensor joined_mask;
    if (partial) {
      const Tensor& skip_mask = i > 0 ? masks[i - 1] : m0;
      joined_mask = apply_background(nn::concat_channels(nn::upsample2x(hidden_mask), skip_mask), background_levels[i]);
    }
    auto [y, next_mask] = decoder_[i].forward(joined, joined_mask, cache ? &cache->decoder[i] : nullptr);
    hidden_mask = std::move(next_mask);
    if (i > 0) {
      hidden = relu(y, kLeakySlope);
      if (cache) cache->decoder_pre[i] = std::move(y);
    } else {
      hidden = std::move(y);
    }
  }
  return hidden;
}

void InpaintNet::backward(const Tensor& grad_output, const InpaintCache& cache) {
  const int depth = int(encoder_.size());
  std::vector<Tensor> feature_grads(depth);
  Tensor g = grad_output;
  for (int i = 0; i < depth; ++i) {
    if (i > 0) relu_backward(g, cache.decoder_pre[i], kLeakySlope);
    const Tensor joined = decoder_[i].backward(g, cache.decoder[i]);
    Tensor up, skip;
    nn::split_channels(joined, config_.channels(i), up, skip);
    if (i > 0) {
      if (feature_grads[i - 1].empty()) feature_grads[i - 1] = Tensor(skip.shape);
      feature_grads[i - 1] += skip;
    }
    g = nn::upsample2x_backward(up);
  }
  if (feature_grads[depth - 1].empty()) feature_grads[depth - 1] = Tensor(g.shape);
  feature_grads[depth - 1] += g;

  for (int i = depth - 1; i >= 0; --i) {
    Tensor ge = feature_grads[i];
    relu_backward(ge, cache.encoder_pre[i], 0);
    const Tensor gx = encoder_[i].backward(ge, cache.encoder[i]);
    if (i > 0) {
      if (feature_grads[i - 1].empty()) feature_grads[i - 1] = Tensor(gx.shape);
      feature_grads[i - 1] += gx;
    }
  }
}

std::vector<nn::Parameter*> InpaintNet::parameters() {
  std::vector<nn::Parameter*> out;
  for (auto& l : encoder_) l.collect_parameters(out);
  for (auto& l : decoder_) l.collect_parameters(out);
  return out;
}

void InpaintNet::save(const std::filesystem::path& path) const {
  auto& self = const_cast<InpaintNet&>(*this);
  std::vector<std::pair<std::string, const Tensor*>> tensors;
  for (nn::Parameter* p : self.parameters()) tensors.emplace_back(p->name, &p->value);
  nn::save_checkpoint(path, {{"inpaint", config_.to_json()}, {"trained_steps", trained_steps}}, tensors);
}

InpaintNet InpaintNet::load(const std::filesystem::path& path, const InpaintConfig* expected) {
  const nn::Checkpoint ckpt = nn::load_checkpoint(path);
  if (!ckpt.config.contains("inpaint"))
    throw Error(Errc::config_mismatch, "checkpoint " + path.string() + " does not hold an inpainting network");
  const InpaintConfig stored = InpaintConfig::from_json(ckpt.config["inpaint"]);
  if (expected && !(stored == *expected))
    throw Error(Errc::config_mismatch, "checkpoint " + path.string() + " was trained with " +
                                           stored.to_json().dump() + " but the run expects " +
                                           expected->to_json().dump());
  InpaintNet net(stored, 0);
  nn::restore_parameters(ckpt, net.parameters(), {});
  net.trained_steps = ckpt.config.value("trained_steps", 0L);
  return net;
}

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp
