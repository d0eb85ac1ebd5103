#pragma once

#include "texcomp/pipeline/config.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace texcomp {

using Log = std::function<void(const std::string&)>;

// A run directory <out>/run-<config hash prefix>/ holding one subdirectory
// per stage. Each stage writes manifest.json last, so a stage counts as done
// exactly when its manifest exists.
class Run {
 public:
  // Creates the directory and writes config.txt. Throws config_mismatch if
  // the directory already holds a different configuration.
  Run(RunConfig config, const std::filesystem::path& out_root);

  const RunConfig& config() const { return config_; }
  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path(const std::filesystem::path& relative) const { return dir_ / relative; }
  bool done(const std::filesystem::path& stage_dir) const;

 private:
  RunConfig config_;
  std::filesystem::path dir_;
};

// One prepared scan: a ground truth and one partial draw of it. Paths are
// relative to the run directory.
struct ScanEntry {
  std::string name;
  std::string split;  // "train" or "test"
  std::string ground_truth;
  std::string partial;
  std::uint64_t seed = 0;
  std::string fixture;  // analytic containment source; empty for file datasets
};

std::vector<ScanEntry> prepared_scans(const Run& run, const std::string& split);

// Each stage throws missing_artifact naming the command to run when an
// upstream artifact is absent.
void run_prepare(const Run& run, const Log& log = {});
void run_train(const Run& run, const Log& log = {});
// `checkpoint` replaces train/joint.ckpt when non-empty.
void run_complete(const Run& run, const std::filesystem::path& checkpoint = {}, const Log& log = {});

// Writes refine/<mode>/<scan>/refined.obj and its masks. `checkpoint`
// replaces the run's inpainter when non-empty.
void run_refine(const Run& run, RefineMode mode, const std::filesystem::path& checkpoint = {}, const Log& log = {});

// Scores refine/<mode> against the ground truth into evaluate/<mode>/scores.jsonl.
std::vector<ScoreReport> run_evaluate(const Run& run, RefineMode mode, const Log& log = {});

std::filesystem::path refine_dir(RefineMode mode);
std::filesystem::path evaluate_dir(RefineMode mode);

// The run's inpainter with the requested convolution type: the one trained
// by `train` when the types match, otherwise one trained on first use under
// inpainters/.
std::filesystem::path inpainter_checkpoint(const Run& run, bool partial_conv, const Log& log = {});

// Writes <stage_dir>/manifest.json with sorted keys and no timestamps.
// Relative paths in `inputs` and `outputs` resolve against the run directory.
void write_manifest(const Run& run, const std::filesystem::path& stage_dir, const std::string& stage,
                    const std::vector<std::filesystem::path>& inputs,
                    const std::vector<std::filesystem::path>& outputs, const nlohmann::json& extra = {});

}  // namespace texcomp
