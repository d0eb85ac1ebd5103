#pragma once

#include "texcomp/implicit/joint_model.hpp"
#include "texcomp/training/sample.hpp"

#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace texcomp {
inline namespace TEXCOMP_PRECISION_NS {

struct TrainConfig {
  double learning_rate = 1e-4;
  int epochs = 54;
  int subsample = 50000;  // points drawn from each bank per sample and step
  int batch_size = 4;
  double shape_weight = 1.0;
  double texture_weight = 1.0;
  std::uint64_t seed = 0;
};

// Where train_joint writes; empty paths are skipped.
struct TrainOutputs {
  std::filesystem::path checkpoint;   // overwritten after every epoch
  std::filesystem::path loss_csv;     // epoch,shape_loss,texture_loss
  std::filesystem::path diagnostics;  // written before aborting on a non-finite loss
};

struct EpochLoss {
  int epoch = 0;
  double shape_loss = 0.0;
  double texture_loss = 0.0;
};

struct Batch {
  std::vector<std::string> names;
  nn::Tensor occupancy;       // (B, 1, N, N, N)
  nn::Tensor colors;          // (B, 3, N, N, N)
  nn::Tensor shape_points;    // (B, P, 3)
  nn::Tensor shape_labels;    // (B * P, 1)
  nn::Tensor texture_points;  // (B, P, 3)
  nn::Tensor texture_colors;  // (B * P, 3)
};

// Draws `subsample` points from each bank of every sample, without
// replacement within a bank.
Batch make_batch(std::span<const TrainingSample* const> samples, int subsample, std::mt19937_64& rng);

struct StepLosses {
  double shape = 0.0;
  double texture = 0.0;
};

// One forward/backward pass; gradients accumulate into model.parameters().
StepLosses accumulate_gradients(JointModel& model, const Batch& batch, double shape_weight = 1.0,
                                double texture_weight = 1.0);

// Joint optimization of both networks. Deterministic for a fixed seed.
std::vector<EpochLoss> train_joint(std::span<const TrainingSample> samples, const TrainConfig& config,
                                   JointModel& model, const TrainOutputs& outputs = {},
                                   const std::function<void(const EpochLoss&)>& on_epoch = {});

void write_loss_curve(const std::filesystem::path& path, std::span<const EpochLoss> curve);

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp
