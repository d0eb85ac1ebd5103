#pragma once

#include "texcomp/geometry/voxel.hpp"
#include "texcomp/implicit/encoder.hpp"

#include <filesystem>
#include <memory>

namespace texcomp {
inline namespace TEXCOMP_PRECISION_NS {

struct JointCache {
  EncoderCache shape_encoder;
  EncoderCache texture_encoder;
  Pyramid shape_pyramid;
  Pyramid texture_pyramid;
  nn::Tensor shape_points;
  nn::Tensor texture_points;
  std::vector<nn::LayerCache> shape_decoder;
  std::vector<nn::LayerCache> texture_decoder;
};

struct JointOutput {
  nn::Tensor logits;  // (B * P, 1)
  nn::Tensor colors;  // (B * Q, 3), unclamped
};

// Shape and texture completion networks trained together: the shape branch
// predicts occupancy logits, the texture branch predicts RGB from texture
// features fused with shape features sampled at the same points.
class JointModel {
 public:
  JointModel(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  int shape_feature_length() const { return shape_encoder_.layout().feature_length(); }
  int texture_feature_length() const { return texture_encoder_.layout().feature_length(); }
  int shape_decoder_inputs() const { return 3 + shape_feature_length(); }
  int texture_decoder_inputs() const { return 3 + shape_feature_length() + texture_feature_length(); }

  // Evaluation mode.
  Pyramid encode_shape(const nn::Tensor& occupancy) const { return shape_encoder_.infer(occupancy); }
  Pyramid encode_texture(const nn::Tensor& colors) const { return texture_encoder_.infer(colors); }
  nn::Tensor decode_shape(const Pyramid& shape, const nn::Tensor& points) const;
  nn::Tensor decode_texture(const Pyramid& shape, const Pyramid& texture, const nn::Tensor& points) const;

  // Training mode. Points are (B, P, 3) and (B, Q, 3).
  JointOutput forward(const nn::Tensor& occupancy, const nn::Tensor& colors, const nn::Tensor& shape_points,
                      const nn::Tensor& texture_points, JointCache& cache);
  void backward(const nn::Tensor& grad_logits, const nn::Tensor& grad_colors, const JointCache& cache);

  std::vector<nn::Parameter*> parameters();
  std::vector<nn::Buffer*> buffers();

  long trained_steps = 0;

  void save(const std::filesystem::path& path) const;
  // Throws config_mismatch if the stored configuration differs from `expected`.
  static JointModel load(const std::filesystem::path& path, const ModelConfig* expected = nullptr);

 private:
  nn::Tensor shape_inputs(const Pyramid& shape, const nn::Tensor& points) const;
  nn::Tensor texture_inputs(const Pyramid& shape, const Pyramid& texture, const nn::Tensor& points) const;

  ModelConfig config_;
  VoxelEncoder shape_encoder_;
  VoxelEncoder texture_encoder_;
  nn::Sequential shape_decoder_;
  nn::Sequential texture_decoder_;
};

// Grid conversions: (1, 1, N, N, N) occupancy and (1, 3, N, N, N) color volumes.
nn::Tensor occupancy_tensor(const VoxelGrid& grid);
nn::Tensor color_tensor(const ColorVoxelGrid& grid);
// Stacks (1, ...) tensors along the batch dimension.
nn::Tensor stack_batch(const std::vector<nn::Tensor>& items);
// (1, P, 3) point tensor.
nn::Tensor point_tensor(std::span<const Vec3> points);

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp
