#include "texcomp/training/trainer.hpp"

#include "texcomp/error.hpp"
#include "texcomp/nn/adam.hpp"
#include "texcomp/training/losses.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace texcomp {
inline namespace TEXCOMP_PRECISION_NS {

using nn::Real;
using nn::Tensor;

namespace {

std::vector<int> draw_without_replacement(int population, int count, std::mt19937_64& rng) {
  std::vector<int> pool(population);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, population - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  return pool;
}

void dump_diagnostics(const std::filesystem::path& path, int epoch, long step, const StepLosses& losses,
                      const Batch& batch, JointModel& model) {
  nlohmann::json params = nlohmann::json::array();
  for (nn::Parameter* p : model.parameters()) {
    double norm = 0.0;
    for (Real v : p->value.data) norm += double(v) * double(v);
    params.push_back({{"name", p->name},
                      {"finite_value", p->value.all_finite()},
                      {"finite_grad", p->grad.all_finite()},
                      {"norm", std::isfinite(norm) ? nlohmann::json(std::sqrt(norm)) : nlohmann::json("non-finite")}});
  }
  auto number = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(std::to_string(v)); };
  const nlohmann::json j = {{"epoch", epoch},
                            {"step", step},
                            {"shape_loss", number(losses.shape)},
                            {"texture_loss", number(losses.texture)},
                            {"samples", batch.names},
                            {"parameters", params}};
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::ofstream(path) << j.dump(2) << "\n";
}

}  // namespace

Batch make_batch(std::span<const TrainingSample* const> samples, int subsample, std::mt19937_64& rng) {
  if (samples.empty()) throw Error(Errc::invalid_argument, "empty batch");
  if (subsample <= 0) throw Error(Errc::invalid_argument, "subsample must be positive");
  const int b = int(samples.size());
  Batch batch;
  std::vector<Tensor> occ, col;
  batch.shape_points = Tensor({b, subsample, 3});
  batch.shape_labels = Tensor({b * subsample, 1});
  batch.texture_points = Tensor({b, subsample, 3});
  batch.texture_colors = Tensor({b * subsample, 3});
  for (int s = 0; s < b; ++s) {
    const TrainingSample& sample = *samples[s];
    const int shape_bank = int(sample.shape_points.size());
    const int texture_bank = int(sample.texture_points.size());
    if (subsample > shape_bank || subsample > texture_bank)
      throw Error(Errc::invalid_argument, "subsample " + std::to_string(subsample) + " exceeds the point bank of '" +
                                              sample.name + "'");
    batch.names.push_back(sample.name);
    occ.push_back(occupancy_tensor(sample.occupancy));
    col.push_back(color_tensor(sample.colors));

    const std::size_t base = std::size_t(s) * subsample;
    const auto shape_idx = draw_without_replacement(shape_bank, subsample, rng);
    for (int i = 0; i < subsample; ++i) {
      const Vec3& p = sample.shape_points[shape_idx[i]];
      for (int a = 0; a < 3; ++a) batch.shape_points.data[(base + i) * 3 + a] = Real(p[a]);
      batch.shape_labels.data[base + i] = Real(sample.shape_labels[shape_idx[i]]);
    }
    const auto texture_idx = draw_without_replacement(texture_bank, subsample, rng);
    for (int i = 0; i < subsample; ++i) {
      const Vec3& q = sample.texture_points[texture_idx[i]];
      const Rgb& c = sample.texture_colors[texture_idx[i]];
      for (int a = 0; a < 3; ++a) {
        batch.texture_points.data[(base + i) * 3 + a] = Real(q[a]);
        batch.texture_colors.data[(base + i) * 3 + a] = Real(c[a]);
      }
    }
  }
  batch.occupancy = stack_batch(occ);
  batch.colors = stack_batch(col);
  return batch;
}

StepLosses accumulate_gradients(JointModel& model, const Batch& batch, double shape_weight, double texture_weight) {
  JointCache cache;
  const JointOutput out =
      model.forward(batch.occupancy, batch.colors, batch.shape_points, batch.texture_points, cache);
  LossResult shape = shape_loss(out.logits, batch.shape_labels);
  LossResult texture = texture_loss(out.colors, batch.texture_colors);
  for (Real& g : shape.grad.data) g = Real(g * shape_weight);
  for (Real& g : texture.grad.data) g = Real(g * texture_weight);
  model.backward(shape.grad, texture.grad, cache);
  return {shape.value, texture.value};
}

std::vector<EpochLoss> train_joint(std::span<const TrainingSample> samples, const TrainConfig& config,
                                   JointModel& model, const TrainOutputs& outputs,
                                   const std::function<void(const EpochLoss&)>& on_epoch) {
  if (samples.empty()) throw Error(Errc::invalid_argument, "training needs at least one sample");
  if (config.batch_size <= 0 || config.epochs < 0)
    throw Error(Errc::invalid_argument, "batch size must be positive and epochs non-negative");
  for (const TrainingSample& s : samples)
    if (s.occupancy.resolution != model.config().resolution)
      throw Error(Errc::resolution_mismatch, "sample '" + s.name + "' has grids at " +
                                                 std::to_string(s.occupancy.resolution) + ", model expects " +
                                                 std::to_string(model.config().resolution));

  nn::Adam adam(model.parameters(), {.learning_rate = config.learning_rate});
  std::mt19937_64 rng(config.seed);
  std::vector<int> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<EpochLoss> curve;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochLoss row{epoch, 0.0, 0.0};
    std::size_t seen = 0;
    for (std::size_t first = 0; first < order.size(); first += std::size_t(config.batch_size)) {
      std::vector<const TrainingSample*> members;
      for (std::size_t k = first; k < std::min(order.size(), first + config.batch_size); ++k)
        members.push_back(&samples[order[k]]);
      const Batch batch = make_batch(members, config.subsample, rng);

      adam.zero_grad();
      const StepLosses losses = accumulate_gradients(model, batch, config.shape_weight, config.texture_weight);
      if (!std::isfinite(losses.shape) || !std::isfinite(losses.texture)) {
        if (!outputs.diagnostics.empty())
          dump_diagnostics(outputs.diagnostics, epoch, model.trained_steps, losses, batch, model);
        throw Error(Errc::non_finite_loss, "loss became non-finite at epoch " + std::to_string(epoch) +
                                               " (shape " + std::to_string(losses.shape) + ", texture " +
                                               std::to_string(losses.texture) + ")");
      }
      adam.step();
      ++model.trained_steps;
      row.shape_loss += losses.shape * double(members.size());
      row.texture_loss += losses.texture * double(members.size());
      seen += members.size();
    }
    row.shape_loss /= double(seen);
    row.texture_loss /= double(seen);
    curve.push_back(row);

    if (!outputs.checkpoint.empty()) model.save(outputs.checkpoint);
    if (!outputs.loss_csv.empty()) write_loss_curve(outputs.loss_csv, curve);
    if (on_epoch) on_epoch(row);
  }
  return curve;
}

void write_loss_curve(const std::filesystem::path& path, std::span<const EpochLoss> curve) {
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(Errc::io_failure, "cannot write " + path.string());
  out << "epoch,shape_loss,texture_loss\n";
  char line[96];
  for (const EpochLoss& e : curve) {
    std::snprintf(line, sizeof line, "%d,%.9g,%.9g\n", e.epoch, e.shape_loss, e.texture_loss);
    out << line;
  }
}

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp
