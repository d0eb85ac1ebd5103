#pragma once

#include "texcomp/texture/atlas_masks.hpp"
#include "texcomp/texture/inpaint_loss.hpp"
#include "texcomp/texture/inpaint_net.hpp"
#include "texcomp/texture/uv_atlas.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace texcomp {

// (1, C, H, W) tensor from an image and back; row 0 stays row 0.
nn::Tensor image_to_tensor(const Image& image);
Image tensor_to_image(const nn::Tensor& tensor);

// One training pair: network inputs built like at completion time, but on
// the ground-truth geometry with vertex colors read from the ground-truth
// texture, and the ground-truth texture resampled into the same fresh layout.
struct InpaintExample {
  std::string name;
  Image coarse;           // A_c
  Image coarse_mask;      // M_c
  Image background_mask;  // M_b
  Image target;
};

InpaintExample make_inpaint_example(const std::string& name, const TexturedMesh& ground_truth,
                                    const TexturedMesh& partial, int resolution,
                                    double max_distance = kDefaultTransferDistance);

struct InpaintTrainConfig {
  long iterations = 5000;
  double learning_rate = 2e-4;
  InpaintLossWeights weights;
  std::uint64_t seed = 0;  // example order
  std::uint64_t feature_seed = 0x5eed;
};

struct InpaintStepLoss {
  long step = 0;
  std::string example;
  InpaintLossTerms terms;
};

// Adam with batch size 1, visiting the examples in a fresh shuffled order
// every pass. Loss components of every step go to loss_csv when non-empty.
// A non-finite loss throws non_finite_loss.
std::vector<InpaintStepLoss> train_inpainter(const std::vector<InpaintExample>& examples,
                                             const InpaintTrainConfig& config, InpaintNet& net,
                                             const std::filesystem::path& loss_csv = {},
                                             const std::function<void(const InpaintStepLoss&)>& on_step = {});

// Runs the network on one atlas and returns its RGB output.
Image inpaint_atlas(const InpaintNet& net, const Image& coarse, const Image& mask, const Image& background);

// How the final atlas is produced; each mode is one row of the ablation table.
enum class RefineMode {
  full,               // inpaint A_c with M_c
  no_coarse_masks,    // inpaint A_c with M instead of M_c
  bilinear,           // holes keep the barycentric vertex-color fill
  no_partial_conv,    // full, with a network of ordinary convolutions
  no_refinement,      // vertex colors rendered to the atlas
  transfer_baseline,  // observed texels only, holes left at the background color
};

const std::vector<std::pair<std::string, RefineMode>>& refine_modes();
RefineMode refine_mode_from_string(const std::string& name);
std::string to_string(RefineMode mode);
bool mode_uses_network(RefineMode mode);

struct RefineOptions {
  int resolution = 256;
  double max_distance = kDefaultTransferDistance;
  RefineMode mode = RefineMode::full;
};

struct Refinement {
  TexturedMesh mesh;  // completed geometry, fresh uvs, final atlas
  AtlasMaskSet masks;
};

// completed needs vertex colors; net is required when the mode uses it.
Refinement refine_texture(const TexturedMesh& completed, const TexturedMesh& partial, const InpaintNet* net,
                          const RefineOptions& options = {});

}  // namespace texcomp
