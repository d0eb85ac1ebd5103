#pragma once

#include "texcomp/nn/tensor.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace texcomp::nn {
inline namespace TEXCOMP_PRECISION_NS {

// Container layout:
//   8 bytes   magic "TXCKPT01"
//   8 bytes   little-endian header length L
//   L bytes   JSON header {"config": ..., "tensors": [{name, shape, offset, count}]}
//   payload   float32 little-endian values, offsets counted in elements
struct Checkpoint {
  nlohmann::json config;
  std::map<std::string, Tensor> tensors;
};

void save_checkpoint(const std::filesystem::path& path, const nlohmann::json& config,
                     const std::vector<std::pair<std::string, const Tensor*>>& tensors);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copies named tensors into parameters; every parameter must be present with
// a matching shape.
void restore_parameters(const Checkpoint& ckpt, const std::vector<Parameter*>& params,
                        const std::vector<Buffer*>& buffers);

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp::nn
