#include "texcomp/implicit/encoder.hpp"

#include "texcomp/error.hpp"

namespace texcomp {
inline namespace TEXCOMP_PRECISION_NS {

using nn::Tensor;

VoxelEncoder::VoxelEncoder(const EncoderConfig& config, const std::string& name, std::mt19937_64& rng)
    : config_(config), layout_(pyramid_layout(config)) {
  if (config.resolution < 2 || (config.resolution & (config.resolution - 1)))
    throw Error(Errc::invalid_argument, "encoder resolution must be a power of two, got " +
                                            std::to_string(config.resolution));
  for (int r : layout_.resolutions)
    if (r < 1)
      throw Error(Errc::invalid_argument, "resolution " + std::to_string(config.resolution) +
                                              " is too small for the encoder schedule");
  int channels = config.input_channels, conv = 0, norm = 0;
  nn::Sequential current;
  bool first = true;
  for (const ScheduleOp& op : parse_schedule(config.schedule, config.base_channels)) {
    auto conv_relu = [&](int out) {
      current.add(std::make_unique<nn::Conv3d>(name + ".conv" + std::to_string(conv++), channels, out, rng));
      current.add(std::make_unique<nn::ReLU>());
      channels = out;
    };
    auto batch_norm = [&] {
      current.add(std::make_unique<nn::BatchNorm>(name + ".bn" + std::to_string(norm++), channels));
    };
    switch (op.kind) {
      case ScheduleOp::tap:
        if (!first || current.size() > 0) stages_.push_back(std::move(current));
        if (first) stages_.emplace_back();
        first = false;
        current = nn::Sequential();
        break;
      case ScheduleOp::c3:
        conv_relu(op.value);
        batch_norm();
        break;
      case ScheduleOp::d3:
        conv_relu(op.value);
        conv_relu(op.value);
        batch_norm();
        break;
      case ScheduleOp::pool:
        current.add(std::make_unique<nn::MaxPool3d>());
        break;
    }
  }
  if (current.size() > 0)
    throw Error(Errc::invalid_argument, "encoder schedule must end with a feature tap");
}

void VoxelEncoder::check_input(const Tensor& volume) const {
  if (volume.rank() != 5 || volume.dim(1) != config_.input_channels)
    throw Error(Errc::invalid_argument, "encoder input must be (B, " + std::to_string(config_.input_channels) +
                                            ", N, N, N), got " + nn::shape_string(volume.shape));
  for (int a = 2; a < 5; ++a)
    if (volume.dim(a) != config_.resolution)
      throw Error(Errc::resolution_mismatch, "encoder configured for N=" + std::to_string(config_.resolution) +
                                                 ", input is " + nn::shape_string(volume.shape));
}

Pyramid VoxelEncoder::infer(const Tensor& volume) const {
  check_input(volume);
  Pyramid levels{volume};
  for (std::size_t s = 1; s < stages_.size(); ++s) levels.push_back(stages_[s].infer(levels.back()));
  return levels;
}

Pyramid VoxelEncoder::forward(const Tensor& volume, EncoderCache& cache) {
  check_input(volume);
  cache.stages.assign(stages_.size(), {});
  Pyramid levels{volume};
  for (std::size_t s = 1; s < stages_.size(); ++s)
    levels.push_back(stages_[s].forward(levels.back(), cache.stages[s]));
  return levels;
}

void VoxelEncoder::backward(const Pyramid& level_grads, const EncoderCache& cache) {
  Tensor carry;
  for (std::size_t s = stages_.size(); s-- > 1;) {
    Tensor g = level_grads[s];
    if (!carry.empty()) g += carry;
    carry = stages_[s].backward(g, cache.stages[s]);
  }
}

void VoxelEncoder::collect_parameters(std::vector<nn::Parameter*>& out) {
  for (auto& stage : stages_) stage.collect_parameters(out);
}

void VoxelEncoder::collect_buffers(std::vector<nn::Buffer*>& out) {
  for (auto& stage : stages_) stage.collect_buffers(out);
}

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp
