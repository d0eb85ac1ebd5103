#pragma once

#include "texcomp/geometry/fixtures.hpp"
#include "texcomp/implicit/config.hpp"
#include "texcomp/partiality/partiality.hpp"
#include "texcomp/training/sample.hpp"
#include "texcomp/training/trainer.hpp"
#include "texcomp/texture/refine.hpp"
#include "texcomp/metrics/metrics.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace texcomp {

// Flat "key = value" text. '#' starts a comment; blank lines are ignored.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text, const std::string& origin = "config");
KeyValues read_key_values(const std::filesystem::path& path);

// Everything a run depends on. Defaults are the full-scale values; the
// desk-scale overrides live in configs/desk.cfg.
struct RunConfig {
  std::uint64_t seed = 0;
  int resolution = 128;  // input voxel grid N
  int atlas_size = 256;  // fixture atlases and refined atlases

  // "fixtures", or the path of a text file listing ground-truth OBJ files.
  std::string dataset = "fixtures";
  std::vector<std::string> fixtures = standard_fixture_names();

  PartialityType partiality = PartialityType::holes;       // training scans
  PartialityType test_partiality = PartialityType::holes;  // held-out scans
  int train_draws = 1;  // partial scans generated per ground truth
  int test_draws = 1;
  HoleOptions holes;

  ModelConfig model;
  TrainConfig train;
  int bank_size = 100000;
  int voxel_points = 100000;

  int out_resolution = 256;

  InpaintConfig inpaint;
  long inpaint_iterations = 5000;
  double inpaint_learning_rate = 2e-4;
  int inpaint_draws = 4;  // partial scans per ground truth used as inpainting examples

  RefineMode refine_mode = RefineMode::full;
  double max_distance = kDefaultTransferDistance;

  ScoreOptions score;

  // Unknown keys and malformed values throw invalid_argument naming the key.
  static RunConfig from_key_values(const KeyValues& kv);
  static RunConfig load(const std::filesystem::path& path);
  KeyValues to_key_values() const;

  // Sorted "key = value" lines of every key, or of the keys that shape the
  // prepare, train and complete artifacts. refine.mode and eval.* only
  // affect downstream stages, so runs differing in them share a directory.
  std::string canonical(bool upstream_only = false) const;
  std::string hash() const;  // hex SHA-256 of canonical(true)
  std::string run_name() const { return "run-" + hash().substr(0, 12); }

  SampleOptions sample_options() const;
  InpaintTrainConfig inpaint_train_config() const;
};

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace texcomp
