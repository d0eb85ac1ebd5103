#include "texcomp/texture/refine.hpp"

#include "texcomp/error.hpp"
#include "texcomp/geometry/raster.hpp"
#include "texcomp/nn/adam.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

namespace texcomp {

using nn::Real;
using nn::Tensor;

Tensor image_to_tensor(const Image& image) {
  const int c = image.channels, h = image.height, w = image.width;
  Tensor t({1, c, h, w});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int k = 0; k < c; ++k) t.data[(std::size_t(k) * h + y) * w + x] = Real(image.at(x, y, k));
  return t;
}

Image tensor_to_image(const Tensor& t) {
  if (t.rank() != 4 || t.dim(0) != 1)
    throw Error(Errc::invalid_argument, "expected a (1, C, H, W) tensor, got " + nn::shape_string(t.shape));
  const int c = t.dim(1), h = t.dim(2), w = t.dim(3);
  Image image(w, h, c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int k = 0; k < c; ++k) image.at(x, y, k) = float(t.data[(std::size_t(k) * h + y) * w + x]);
  return image;
}

InpaintExample make_inpaint_example(const std::string& name, const TexturedMesh& ground_truth,
                                    const TexturedMesh& partial, int resolution, double max_distance) {
  if (!ground_truth.has_atlas() && !ground_truth.has_vertex_colors())
    throw Error(Errc::missing_atlas, name + ": ground truth has no texture to learn from");
  TexturedMesh geometry;
  geometry.vertices = ground_truth.vertices;
  geometry.triangles = ground_truth.triangles;
  TexturedMesh layout = generate_uv_atlas(geometry, {.resolution = resolution});
  layout.atlas = Image(resolution, resolution, 3);

  layout.vertex_colors.assign(layout.vertices.size(), Rgb::Zero());
  std::vector<char> seen(layout.vertices.size(), 0);
  for (int f = 0; f < int(layout.triangles.size()); ++f)
    for (int k = 0; k < 3; ++k) {
      const int v = layout.triangles[f][k];
      if (seen[v]) continue;
      seen[v] = 1;
      layout.vertex_colors[v] = surface_color(ground_truth, f, Vec3::Unit(k));
    }

  InpaintExample example;
  example.name = name;
  example.target = Image(resolution, resolution, 3);
  for (int y = 0; y < resolution; ++y)
    for (int x = 0; x < resolution; ++x) example.target.set_rgb(x, y, kBackgroundColor);
  rasterize_uv(layout, resolution, resolution, [&](int x, int y, int face, const Vec3& bary) {
    example.target.set_rgb(x, y, surface_color(ground_truth, face, bary).cwiseMax(0.0).cwiseMin(1.0));
  });

  AtlasMaskSet set = transfer_texture_raycast(layout, partial, max_distance);
  project_vertex_colors(set, layout);
  example.coarse = std::move(set.coarse);
  example.coarse_mask = std::move(set.coarse_mask);
  example.background_mask = std::move(set.background_mask);
  return example;
}

namespace {

void write_inpaint_csv(const std::filesystem::path& path, const std::vector<InpaintStepLoss>& log) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_failure, "cannot write " + path.string());
  out << "step,example,total,valid,hole,perceptual,style,total_variation\n";
  char line[512];
  for (const auto& s : log) {
    std::snprintf(line, sizeof line, "%ld,%s,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", s.step, s.example.c_str(),
                  s.terms.total, s.terms.valid, s.terms.hole, s.terms.perceptual, s.terms.style,
                  s.terms.total_variation);
    out << line;
  }
}

}  // namespace

std::vector<InpaintStepLoss> train_inpainter(const std::vector<InpaintExample>& examples,
                                             const InpaintTrainConfig& config, InpaintNet& net,
                                             const std::filesystem::path& loss_csv,
                                             const std::function<void(const InpaintStepLoss&)>& on_step) {
  if (examples.empty()) throw Error(Errc::invalid_argument, "inpainter training needs at least one example");
  if (config.iterations < 0) throw Error(Errc::invalid_argument, "iteration count must be non-negative");
  const int res = net.config().resolution;
  struct Inputs {
    Tensor image, mask, background, target;
  };
  std::vector<Inputs> inputs;
  for (const auto& e : examples) {
    for (const Image* im : {&e.coarse, &e.coarse_mask, &e.background_mask, &e.target})
      if (im->width != res || im->height != res)
        throw Error(Errc::resolution_mismatch, e.name + ": atlas is " + std::to_string(im->width) + "x" +
                                                   std::to_string(im->height) + " but the network expects " +
                                                   std::to_string(res));
    inputs.push_back({image_to_tensor(e.coarse), image_to_tensor(e.coarse_mask),
                      image_to_tensor(e.background_mask), image_to_tensor(e.target)});
  }

  FeatureExtractor extractor(config.feature_seed);
  nn::Adam adam(net.parameters(), {.learning_rate = config.learning_rate});
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(examples.size());
  std::size_t cursor = order.size();
  std::vector<InpaintStepLoss> log;
  log.reserve(std::size_t(config.iterations));

  for (long step = 0; step < config.iterations; ++step) {
    if (cursor == order.size()) {
      std::iota(order.begin(), order.end(), std::size_t(0));
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    const std::size_t idx = order[cursor++];
    const Inputs& in = inputs[idx];
    adam.zero_grad();
    InpaintCache cache;
    const Tensor out = net.forward(in.image, in.mask, in.background, cache);
    Tensor grad;
    InpaintStepLoss entry{step, examples[idx].name,
                          inpaint_loss(out, in.target, in.mask, in.background, config.weights, extractor, &grad)};
    if (!std::isfinite(entry.terms.total)) {
      if (!loss_csv.empty()) write_inpaint_csv(loss_csv, log);
      throw Error(Errc::non_finite_loss, "inpainting loss became non-finite at step " + std::to_string(step) +
                                             " on " + examples[idx].name);
    }
    net.backward(grad, cache);
    adam.step();
    ++net.trained_steps;
    log.push_back(entry);
    if (on_step) on_step(entry);
  }
  if (!loss_csv.empty()) write_inpaint_csv(loss_csv, log);
  return log;
}

Image inpaint_atlas(const InpaintNet& net, const Image& coarse, const Image& mask, const Image& background) {
  if (coarse.channels != 3 || mask.channels != 1 || background.channels != 1)
    throw Error(Errc::invalid_argument, "inpainting takes an RGB atlas and two one-channel masks");
  return tensor_to_image(net.infer(image_to_tensor(coarse), image_to_tensor(mask), image_to_tensor(background)));
}

const std::vector<std::pair<std::string, RefineMode>>& refine_modes() {
  static const std::vector<std::pair<std::string, RefineMode>> modes{
      {"transfer_baseline", RefineMode::transfer_baseline},
      {"no_coarse_masks", RefineMode::no_coarse_masks},
      {"no_refinement", RefineMode::no_refinement},
      {"bilinear", RefineMode::bilinear},
      {"no_partial_conv", RefineMode::no_partial_conv},
      {"full", RefineMode::full},
  };
  return modes;
}

RefineMode refine_mode_from_string(const std::string& name) {
  std::string known;
  for (const auto& [n, m] : refine_modes()) {
    if (n == name) return m;
    known += (known.empty() ? "" : ", ") + n;
  }
  throw Error(Errc::invalid_argument, "unknown refinement mode '" + name + "'; available: " + known);
}

std::string to_string(RefineMode mode) {
  for (const auto& [n, m] : refine_modes())
    if (m == mode) return n;
  return "unknown";
}

bool mode_uses_network(RefineMode mode) {
  return mode == RefineMode::full || mode == RefineMode::no_coarse_masks || mode == RefineMode::no_partial_conv;
}

Refinement refine_texture(const TexturedMesh& completed, const TexturedMesh& partial, const InpaintNet* net,
                          const RefineOptions& options) {
  if (completed.vertex_colors.size() != completed.vertices.size())
    throw Error(Errc::missing_colors, "completed mesh has no vertex colors to refine");
  if (mode_uses_network(options.mode)) {
    if (!net) throw Error(Errc::untrained_model, "refinement mode " + to_string(options.mode) + " needs a network");
    if (net->config().resolution != options.resolution)
      throw Error(Errc::resolution_mismatch, "network was built for " + std::to_string(net->config().resolution) +
                                                 " atlases, refinement asks for " +
                                                 std::to_string(options.resolution));
    if ((options.mode == RefineMode::no_partial_conv) == net->config().partial)
      throw Error(Errc::config_mismatch, "refinement mode " + to_string(options.mode) +
                                             (net->config().partial ? " needs ordinary convolutions"
                                                                    : " needs partial convolutions"));
  }

  Refinement r;
  TexturedMesh geometry;
  geometry.vertices = completed.vertices;
  geometry.triangles = completed.triangles;
  geometry.vertex_colors = completed.vertex_colors;
  r.mesh = generate_uv_atlas(geometry, {.resolution = options.resolution});
  if (r.mesh.empty()) return r;
  r.mesh.atlas = Image(options.resolution, options.resolution, 3);
  r.masks = transfer_texture_raycast(r.mesh, partial, options.max_distance);
  project_vertex_colors(r.masks, r.mesh);

  const AtlasMaskSet& m = r.masks;
  Image final_atlas;
  switch (options.mode) {
    case RefineMode::full:
    case RefineMode::no_partial_conv:
      final_atlas = compose_final_texture(inpaint_atlas(*net, m.coarse, m.coarse_mask, m.background_mask),
                                          m.transferred, m.missing_mask, m.background_mask);
      break;
    case RefineMode::no_coarse_masks:
      final_atlas = compose_final_texture(inpaint_atlas(*net, m.coarse, m.missing_mask, m.background_mask),
                                          m.transferred, m.missing_mask, m.background_mask);
      break;
    case RefineMode::bilinear:
      final_atlas = compose_final_texture(m.coarse, m.transferred, m.missing_mask, m.background_mask);
      break;
    case RefineMode::no_refinement:
      final_atlas = render_vertex_colors(r.mesh);
      break;
    case RefineMode::transfer_baseline: {
      Image gray(options.resolution, options.resolution, 3);
      for (int y = 0; y < gray.height; ++y)
        for (int x = 0; x < gray.width; ++x) gray.set_rgb(x, y, kBackgroundColor);
      final_atlas = compose_final_texture(gray, m.transferred, m.missing_mask, m.background_mask);
      break;
    }
  }
  pad_chart_borders(final_atlas, m.background_mask, UvAtlasOptions{}.gutter);
  r.mesh.atlas = std::move(final_atlas);
  return r;
}

}  // namespace texcomp
