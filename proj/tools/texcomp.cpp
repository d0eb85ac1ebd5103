#include "texcomp/error.hpp"
#include "texcomp/pipeline/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace fs = std::filesystem;
using namespace texcomp;

namespace {

struct Options {
  fs::path config;
  fs::path out = "runs";
  fs::path checkpoint;
  std::string seed, resolution, atlas_size, partiality, mode;
  std::string experiment;
  bool quiet = false;
};

RunConfig resolve(const Options& o) {
  KeyValues kv = o.config.empty() ? KeyValues{} : read_key_values(o.config);
  if (!o.seed.empty()) kv["seed"] = o.seed;
  if (!o.resolution.empty()) kv["resolution"] = o.resolution;
  if (!o.atlas_size.empty()) kv["atlas_size"] = o.atlas_size;
  if (!o.partiality.empty()) kv["partiality"] = kv["test_partiality"] = o.partiality;
  if (!o.mode.empty()) kv["refine.mode"] = o.mode;
  return RunConfig::from_key_values(kv);
}

void print_scores(const std::vector<ScoreReport>& reports) {
  for (const ScoreReport& r : reports)
    std::printf("%-16s shape %.4f  texture %.4f  area %.4f  final %.4f\n", r.name.c_str(), r.shape, r.texture, r.area,
                r.final);
  const ScoreAggregate a = aggregate(reports);
  std::printf("%-16s shape %.4f  texture %.4f  area %.4f  final %.4f  (n=%zu)\n", "mean", a.mean[0], a.mean[1],
              a.mean[2], a.mean[3], a.count);
}

int dispatch(const std::string& command, const Options& o) {
  const RunConfig config = resolve(o);
  const Log log = [&](const std::string& line) {
    if (!o.quiet) std::cerr << line << '\n';
  };
  if (command == "experiment") {
    const ExperimentTable t = run_experiment(o.experiment, config, o.out, log);
    std::cout << format_table(t);
    return 0;
  }
  const Run run(config, o.out);
  std::cerr << "run directory: " << run.dir().string() << '\n';
  if (command == "prepare")
    run_prepare(run, log);
  else if (command == "train")
    run_train(run, log);
  else if (command == "complete")
    run_complete(run, o.checkpoint, log);
  else if (command == "refine")
    run_refine(run, config.refine_mode, o.checkpoint, log);
  else if (command == "evaluate")
    print_scores(run_evaluate(run, config.refine_mode, log));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Textured scan completion: implicit shape and color completion followed by atlas inpainting"};
  app.require_subcommand(1);
  Options o;

  const auto common = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config, "flat key = value config file")->check(CLI::ExistingFile);
    cmd->add_option("--out", o.out, "root directory for run directories")->capture_default_str();
    cmd->add_option("--seed", o.seed, "overrides the config seed");
    cmd->add_option("--resolution", o.resolution, "input voxel resolution N");
    cmd->add_option("--atlas-size", o.atlas_size, "texture atlas size");
    cmd->add_option("--partiality", o.partiality, "partiality type of the training and test scans")
        ->check(CLI::IsMember({"t1", "t2"}));
    cmd->add_flag("--quiet", o.quiet, "suppress progress messages");
  };

  std::string chosen;
  const auto command = [&](const std::string& name, const std::string& help) {
    CLI::App* cmd = app.add_subcommand(name, help);
    common(cmd);
    cmd->callback([&chosen, name] { chosen = name; });
    return cmd;
  };

  command("prepare", "generate partial scans, voxel grids and the scan manifest");
  command("train", "train the completion networks and the texture inpainter");
  command("complete", "complete the held-out partial scans with vertex colors")
      ->add_option("--checkpoint", o.checkpoint, "completion checkpoint to use instead of the trained one");
  CLI::App* refine = command("refine", "build and inpaint the texture atlas of every completed scan");
  refine->add_option("--checkpoint", o.checkpoint, "inpainter checkpoint to use instead of the trained one");
  std::vector<std::string> modes;
  for (const auto& [name, mode] : refine_modes()) modes.push_back(name);
  refine->add_option("--mode", o.mode, "refinement mode")->check(CLI::IsMember(modes));
  command("evaluate", "score the refined scans against the ground truth")
      ->add_option("--mode", o.mode, "refinement mode whose output to score")
      ->check(CLI::IsMember(modes));
  command("experiment", "run a named configuration matrix and print its score table")
      ->add_option("name", o.experiment, "ablation or cross-partiality")
      ->required();

  CLI11_PARSE(app, argc, argv);
  try {
    return dispatch(chosen, o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
