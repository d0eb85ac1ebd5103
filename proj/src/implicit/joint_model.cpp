#include "texcomp/implicit/joint_model.hpp"

#include "texcomp/error.hpp"
#include "texcomp/nn/checkpoint.hpp"

#include <cstring>

namespace texcomp {
inline namespace TEXCOMP_PRECISION_NS {

using nn::Real;
using nn::Tensor;

namespace {

nn::Sequential make_decoder(const std::string& name, int inputs, const std::vector<int>& widths, int outputs,
                            std::mt19937_64& rng) {
  nn::Sequential seq;
  int in = inputs, index = 0;
  for (int w : widths) {
    seq.add(std::make_unique<nn::Linear>(name + ".fc" + std::to_string(index++), in, w, rng));
    seq.add(std::make_unique<nn::ReLU>());
    in = w;
  }
  seq.add(std::make_unique<nn::Linear>(name + ".fc" + std::to_string(index), in, outputs, rng));
  return seq;
}

// Copies `src` (rows x cols) into columns [offset, offset + cols) of `dst`.
void put_columns(Tensor& dst, int offset, const Tensor& src) {
  const int rows = dst.dim(0), width = dst.dim(1), cols = src.dim(1);
  for (int r = 0; r < rows; ++r)
    std::memcpy(dst.ptr() + std::size_t(r) * width + offset, src.ptr() + std::size_t(r) * cols, cols * sizeof(Real));
}

Tensor take_columns(const Tensor& src, int offset, int cols) {
  const int rows = src.dim(0), width = src.dim(1);
  Tensor out({rows, cols});
  for (int r = 0; r < rows; ++r)
    std::memcpy(out.ptr() + std::size_t(r) * cols, src.ptr() + std::size_t(r) * width + offset, cols * sizeof(Real));
  return out;
}

Tensor flat_points(const Tensor& points) {
  Tensor p({points.dim(0) * points.dim(1), 3});
  p.data = points.data;
  return p;
}

}  // namespace

JointModel::JointModel(const ModelConfig& config, std::uint64_t seed)
    : config_(config),
      shape_encoder_([&] {
        std::mt19937_64 rng(seed);
        return VoxelEncoder(config.shape_encoder(), "shape_encoder", rng);
      }()),
      texture_encoder_([&] {
        std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
        return VoxelEncoder(config.texture_encoder(), "texture_encoder", rng);
      }()) {
  std::mt19937_64 rng(seed + 1);
  shape_decoder_ = make_decoder("shape_decoder", shape_decoder_inputs(), config.shape_decoder_widths, 1, rng);
  texture_decoder_ = make_decoder("texture_decoder", texture_decoder_inputs(), config.texture_decoder_widths, 3, rng);
}

Tensor JointModel::shape_inputs(const Pyramid& shape, const Tensor& points) const {
  const Tensor features = grid_sample_features(shape, points, config_.displacement);
  if (features.dim(1) != shape_feature_length())
    throw Error(Errc::feature_mismatch, "shape features have length " + std::to_string(features.dim(1)) +
                                            ", decoder expects " + std::to_string(shape_feature_length()));
  Tensor in({features.dim(0), shape_decoder_inputs()});
  put_columns(in, 0, flat_points(points));
  put_columns(in, 3, features);
  return in;
}

Tensor JointModel::texture_inputs(const Pyramid& shape, const Pyramid& texture, const Tensor& points) const {
  const Tensor tex = grid_sample_features(texture, points, config_.displacement);
  if (tex.dim(1) != texture_feature_length())
    throw Error(Errc::feature_mismatch, "texture features have length " + std::to_string(tex.dim(1)) +
                                            ", decoder expects " + std::to_string(texture_feature_length()));
  Tensor in({tex.dim(0), texture_decoder_inputs()});
  put_columns(in, 0, flat_points(points));
  if (config_.fusion) {
    const Tensor sh = grid_sample_features(shape, points, config_.displacement);
    if (sh.dim(0) != tex.dim(0))
      throw Error(Errc::feature_mismatch, "shape and texture features cover different point counts");
    put_columns(in, 3, sh);
  }
  put_columns(in, 3 + shape_feature_length(), tex);
  return in;
}

Tensor JointModel::decode_shape(const Pyramid& shape, const Tensor& points) const {
  return shape_decoder_.infer(shape_inputs(shape, points));
}

Tensor JointModel::decode_texture(const Pyramid& shape, const Pyramid& texture, const Tensor& points) const {
  return texture_decoder_.infer(texture_inputs(shape, texture, points));
}

JointOutput JointModel::forward(const Tensor& occupancy, const Tensor& colors, const Tensor& shape_points,
                                const Tensor& texture_points, JointCache& cache) {
  cache.shape_pyramid = shape_encoder_.forward(occupancy, cache.shape_encoder);
  cache.texture_pyramid = texture_encoder_.forward(colors, cache.texture_encoder);
  cache.shape_points = shape_points;
  cache.texture_points = texture_points;
  JointOutput out;
  out.logits = shape_decoder_.forward(shape_inputs(cache.shape_pyramid, shape_points), cache.shape_decoder);
  out.colors = texture_decoder_.forward(texture_inputs(cache.shape_pyramid, cache.texture_pyramid, texture_points),
                                        cache.texture_decoder);
  return out;
}

void JointModel::backward(const Tensor& grad_logits, const Tensor& grad_colors, const JointCache& cache) {
  const int fs = shape_feature_length(), ft = texture_feature_length();
  const double delta = config_.displacement;
  Pyramid shape_grads, texture_grads;
  for (const Tensor& level : cache.shape_pyramid) shape_grads.emplace_back(level.shape);
  for (const Tensor& level : cache.texture_pyramid) texture_grads.emplace_back(level.shape);

  auto accumulate = [](Pyramid& into, const Pyramid& add) {
    for (std::size_t l = 0; l < into.size(); ++l) into[l] += add[l];
  };
  if (!grad_logits.empty()) {
    const Tensor d_in = shape_decoder_.backward(grad_logits, cache.shape_decoder);
    accumulate(shape_grads, grid_sample_backward(cache.shape_pyramid, cache.shape_points, delta,
                                                 take_columns(d_in, 3, fs)));
  }
  if (!grad_colors.empty()) {
    const Tensor d_in = texture_decoder_.backward(grad_colors, cache.texture_decoder);
    // Fused shape features carry texture gradients into the shape encoder.
    if (config_.fusion)
      accumulate(shape_grads, grid_sample_backward(cache.shape_pyramid, cache.texture_points, delta,
                                                   take_columns(d_in, 3, fs)));
    accumulate(texture_grads, grid_sample_backward(cache.texture_pyramid, cache.texture_points, delta,
                                                   take_columns(d_in, 3 + fs, ft)));
  }
  shape_encoder_.backward(shape_grads, cache.shape_encoder);
  texture_encoder_.backward(texture_grads, cache.texture_encoder);
}

std::vector<nn::Parameter*> JointModel::parameters() {
  std::vector<nn::Parameter*> out;
  shape_encoder_.collect_parameters(out);
  texture_encoder_.collect_parameters(out);
  shape_decoder_.collect_parameters(out);
  texture_decoder_.collect_parameters(out);
  return out;
}

std::vector<nn::Buffer*> JointModel::buffers() {
  std::vector<nn::Buffer*> out;
  shape_encoder_.collect_buffers(out);
  texture_encoder_.collect_buffers(out);
  return out;
}

void JointModel::save(const std::filesystem::path& path) const {
  auto& self = const_cast<JointModel&>(*this);
  std::vector<std::pair<std::string, const Tensor*>> tensors;
  for (nn::Parameter* p : self.parameters()) tensors.emplace_back(p->name, &p->value);
  for (nn::Buffer* b : self.buffers()) tensors.emplace_back(b->name, &b->value);
  nn::save_checkpoint(path, {{"model", config_.to_json()}, {"trained_steps", trained_steps}}, tensors);
}

JointModel JointModel::load(const std::filesystem::path& path, const ModelConfig* expected) {
  const nn::Checkpoint ckpt = nn::load_checkpoint(path);
  if (!ckpt.config.contains("model"))
    throw Error(Errc::config_mismatch, "checkpoint " + path.string() + " does not hold a completion model");
  const ModelConfig stored = ModelConfig::from_json(ckpt.config["model"]);
  if (expected && !(stored == *expected))
    throw Error(Errc::config_mismatch, "checkpoint " + path.string() + " was trained with " +
                                           stored.to_json().dump() + " but the run expects " +
                                           expected->to_json().dump());
  JointModel model(stored, 0);
  nn::restore_parameters(ckpt, model.parameters(), model.buffers());
  model.trained_steps = ckpt.config.value("trained_steps", 0L);
  return model;
}

Tensor occupancy_tensor(const VoxelGrid& grid) {
  const int n = grid.resolution;
  Tensor t({1, 1, n, n, n});
  for (std::size_t i = 0; i < grid.occupancy.size(); ++i) t.data[i] = Real(grid.occupancy[i]);
  return t;
}

Tensor color_tensor(const ColorVoxelGrid& grid) {
  const int n = grid.resolution;
  const std::size_t volume = std::size_t(n) * n * n;
  Tensor t({1, 3, n, n, n});
  for (std::size_t v = 0; v < volume; ++v)
    for (int c = 0; c < 3; ++c) t.data[c * volume + v] = Real(grid.colors[3 * v + c]);
  return t;
}

Tensor stack_batch(const std::vector<Tensor>& items) {
  if (items.empty()) throw Error(Errc::invalid_argument, "cannot stack an empty batch");
  std::vector<int> shape = items.front().shape;
  shape[0] = 0;
  for (const Tensor& t : items) {
    if (!std::equal(t.shape.begin() + 1, t.shape.end(), shape.begin() + 1))
      throw Error(Errc::invalid_argument, "batch items differ in shape");
    shape[0] += t.dim(0);
  }
  Tensor out(shape);
  std::size_t at = 0;
  for (const Tensor& t : items) {
    std::copy(t.data.begin(), t.data.end(), out.data.begin() + at);
    at += t.numel();
  }
  return out;
}

Tensor point_tensor(std::span<const Vec3> points) {
  Tensor t({1, int(points.size()), 3});
  for (std::size_t i = 0; i < points.size(); ++i)
    for (int a = 0; a < 3; ++a) t.data[3 * i + a] = Real(points[i][a]);
  return t;
}

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp
