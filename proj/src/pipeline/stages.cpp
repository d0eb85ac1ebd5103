#include "texcomp/pipeline/stages.hpp"

#include "texcomp/error.hpp"
#include "texcomp/geometry/mesh_io.hpp"
#include "texcomp/geometry/normalize.hpp"
#include "texcomp/geometry/sampling.hpp"
#include "texcomp/reconstruction/complete.hpp"

#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace texcomp {
namespace {

// Seed streams below the run seed.
constexpr std::uint64_t kTrainScans = 5;
constexpr std::uint64_t kTestScans = 6;
constexpr std::uint64_t kInpaintScans = 7;
constexpr std::uint64_t kJointInit = 8;
constexpr std::uint64_t kJointOrder = 9;
constexpr std::uint64_t kInpaintInit = 10;
constexpr std::uint64_t kInpaintOrder = 11;

void say(const Log& log, const std::string& message) {
  if (log) log(message);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(Errc::io_failure, "cannot write " + path.string());
}

[[noreturn]] void missing(const fs::path& artifact, const std::string& command) {
  throw Error(Errc::missing_artifact,
              artifact.string() + " does not exist; run `texcomp " + command + "` with the same config first");
}

void require_stage(const Run& run, const fs::path& stage, const std::string& command) {
  if (!run.done(stage)) missing(run.path(stage) / "manifest.json", command);
}

std::uint64_t scan_seed(const RunConfig& c, std::uint64_t stream, std::size_t scan, int draw) {
  return derive_seed(derive_seed(derive_seed(c.seed, stream), scan), std::uint64_t(draw));
}

TexturedMesh make_partial(const TexturedMesh& mesh, PartialityType type, const HoleOptions& holes,
                          std::uint64_t seed, nlohmann::json* provenance_out) {
  if (type == PartialityType::view) {
    ViewPartial p = make_view_partial(mesh, seed);
    if (provenance_out) *provenance_out = provenance(p, seed);
    return std::move(p.mesh);
  }
  HolePartial p = make_hole_partial(mesh, holes, seed);
  if (provenance_out) *provenance_out = provenance(p, holes, seed);
  return std::move(p.mesh);
}

struct GroundTruth {
  std::string name;
  TexturedMesh mesh;
  std::string fixture;
  fs::path source;  // input file for file datasets
};

std::vector<GroundTruth> load_dataset(const RunConfig& c) {
  std::vector<GroundTruth> out;
  if (c.dataset == "fixtures") {
    for (const auto& name : c.fixtures) out.push_back({name, fixture_by_name(name, c.atlas_size).mesh, name, {}});
    return out;
  }
  const fs::path list(c.dataset);
  std::ifstream in(list);
  if (!in) throw Error(Errc::missing_file, "cannot read dataset list " + list.string());
  std::set<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    fs::path p(line);
    if (p.is_relative()) p = list.parent_path() / p;
    const std::string name = p.stem().string();
    if (!names.insert(name).second)
      throw Error(Errc::invalid_argument, "dataset lists two scans named '" + name + "'");
    out.push_back({name, normalize_to_unit_cube(load_textured_mesh(p)).first, {}, p});
  }
  if (out.empty()) throw Error(Errc::invalid_argument, "dataset list " + list.string() + " is empty");
  return out;
}

Containment containment_for(const ScanEntry& e) {
  if (e.fixture.empty()) return {};
  return fixture_by_name(e.fixture, 32).inside;
}

nlohmann::json entry_json(const ScanEntry& e) {
  return {{"name", e.name},
          {"split", e.split},
          {"ground_truth", e.ground_truth},
          {"partial", e.partial},
          {"seed", e.seed},
          {"fixture", e.fixture}};
}

JointModel load_joint(const Run& run, const fs::path& override_path) {
  const fs::path path = override_path.empty() ? run.path("train/joint.ckpt") : override_path;
  if (!fs::exists(path)) missing(path, "train");
  return JointModel::load(path, &run.config().model);
}

}  // namespace

Run::Run(RunConfig config, const fs::path& out_root) : config_(std::move(config)) {
  dir_ = out_root / config_.run_name();
  fs::create_directories(dir_);
  const fs::path cfg = dir_ / "config.txt";
  const std::string text = config_.canonical(true);
  if (fs::exists(cfg)) {
    if (read_text(cfg) != text)
      throw Error(Errc::config_mismatch, dir_.string() + " holds a different configuration");
  } else {
    write_text(cfg, text);
  }
}

bool Run::done(const fs::path& stage_dir) const { return fs::exists(dir_ / stage_dir / "manifest.json"); }

void write_manifest(const Run& run, const fs::path& stage_dir, const std::string& stage,
                    const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs,
                    const nlohmann::json& extra) {
  const auto checksums = [&](const std::vector<fs::path>& files) {
    nlohmann::json j = nlohmann::json::object();
    for (const fs::path& f : files) {
      const fs::path full = f.is_absolute() ? f : run.path(f);
      j[f.generic_string()] = sha256_file(full);
    }
    return j;
  };
  nlohmann::json m = extra.is_object() ? extra : nlohmann::json::object();
  m["stage"] = stage;
  m["config_hash"] = run.config().hash();
  m["seed"] = run.config().seed;
  m["inputs"] = checksums(inputs);
  m["outputs"] = checksums(outputs);
  fs::create_directories(run.path(stage_dir));
  write_text(run.path(stage_dir / "manifest.json"), m.dump(2) + "\n");
}

std::vector<ScanEntry> prepared_scans(const Run& run, const std::string& split) {
  require_stage(run, "prepare", "prepare");
  const auto m = nlohmann::json::parse(read_text(run.path("prepare/manifest.json")));
  std::vector<ScanEntry> out;
  for (const auto& j : m["scans"]) {
    if (j["split"] != split) continue;
    out.push_back({j["name"], j["split"], j["ground_truth"], j["partial"], j["seed"], j["fixture"]});
  }
  return out;
}

void run_prepare(const Run& run, const Log& log) {
  const RunConfig& c = run.config();
  const std::vector<GroundTruth> dataset = load_dataset(c);
  std::vector<fs::path> inputs, outputs;
  nlohmann::json scans = nlohmann::json::array();
  std::string pairs;

  fs::create_directories(run.path("prepare/ground_truth"));
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const GroundTruth& gt = dataset[i];
    if (!gt.source.empty()) inputs.push_back(fs::absolute(gt.source));
    const fs::path gt_rel = fs::path("prepare/ground_truth") / (gt.name + ".obj");
    save_textured_mesh(gt.mesh, run.path(gt_rel));
    outputs.push_back(gt_rel);

    for (const std::string split : {"train", "test"}) {
      const bool train = split == "train";
      const int draws = train ? c.train_draws : c.test_draws;
      const PartialityType type = train ? c.partiality : c.test_partiality;
      for (int d = 0; d < draws; ++d) {
        ScanEntry e;
        e.name = gt.name + "-" + std::to_string(d);
        e.split = split;
        e.seed = scan_seed(c, train ? kTrainScans : kTestScans, i, d);
        e.fixture = gt.fixture;
        e.ground_truth = gt_rel.generic_string();
        const fs::path dir = fs::path("prepare") / split / e.name;
        fs::create_directories(run.path(dir));

        nlohmann::json prov;
        const TexturedMesh partial = make_partial(gt.mesh, type, c.holes, e.seed, &prov);
        e.partial = (dir / "partial.obj").generic_string();
        save_textured_mesh(partial, run.path(e.partial));
        write_text(run.path(dir / "partial.json"), prov.dump(2) + "\n");

        const ScanGrids grids = voxelize_scan(partial, c.resolution, std::size_t(c.voxel_points), derive_seed(e.seed, 1));
        save_voxel_grid(run.path(dir / "occupancy.bin"), grids.occupancy);
        save_color_grid(run.path(dir / "colors.bin"), grids.colors);
        for (const char* f : {"partial.obj", "partial.json", "occupancy.bin", "colors.bin"}) outputs.push_back(dir / f);
        if (partial.has_atlas()) outputs.push_back(dir / "partial.png");

        pairs += e.ground_truth + " " + e.partial + "\n";
        scans.push_back(entry_json(e));
        say(log, "prepare: " + split + " " + e.name + " (" + to_string(type) + ", " +
                     std::to_string(partial.triangles.size()) + " of " + std::to_string(gt.mesh.triangles.size()) +
                     " triangles)");
      }
    }
  }
  write_text(run.path("prepare/pairs.txt"), pairs);
  outputs.push_back("prepare/pairs.txt");
  write_manifest(run, "prepare", "prepare", inputs, outputs, {{"scans", scans}});
}

fs::path refine_dir(RefineMode mode) { return fs::path("refine") / to_string(mode); }
fs::path evaluate_dir(RefineMode mode) { return fs::path("evaluate") / to_string(mode); }

namespace {

void train_inpainter_for(const Run& run, bool partial_conv, const fs::path& path, const fs::path& loss_csv,
                         const Log& log) {
  const RunConfig& c = run.config();
  const std::vector<ScanEntry> train = prepared_scans(run, "train");
  std::vector<InpaintExample> examples;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const ScanEntry& e = train[i];
    if (!seen.insert(e.ground_truth).second) continue;
    const TexturedMesh gt = load_textured_mesh(run.path(e.ground_truth));
    for (int d = 0; d < c.inpaint_draws; ++d) {
      const std::uint64_t seed = scan_seed(c, kInpaintScans, seen.size() - 1, d);
      const TexturedMesh partial = make_partial(gt, c.partiality, c.holes, seed, nullptr);
      examples.push_back(make_inpaint_example(e.name + "/" + std::to_string(d), gt, partial, c.atlas_size,
                                              c.max_distance));
    }
  }
  InpaintConfig ic = c.inpaint;
  ic.partial = partial_conv;
  InpaintNet net(ic, derive_seed(c.seed, kInpaintInit));
  InpaintTrainConfig tc = c.inpaint_train_config();
  tc.seed = derive_seed(c.seed, kInpaintOrder);
  const long report_every = std::max(1L, tc.iterations / 10);
  train_inpainter(examples, tc, net, loss_csv, [&](const InpaintStepLoss& s) {
    if ((s.step + 1) % report_every == 0)
      say(log, "train: inpainter step " + std::to_string(s.step + 1) + "/" + std::to_string(tc.iterations) +
                   " loss " + std::to_string(s.terms.total));
  });
  fs::create_directories(path.parent_path());
  net.save(path);
}

}  // namespace

fs::path inpainter_checkpoint(const Run& run, bool partial_conv, const Log& log) {
  if (run.config().inpaint.partial == partial_conv) return run.path("train/inpaint.ckpt");
  const std::string stem = partial_conv ? "inpainters/partial" : "inpainters/conv";
  const fs::path path = run.path(stem + ".ckpt");
  require_stage(run, "train", "train");
  if (!fs::exists(path)) train_inpainter_for(run, partial_conv, path, run.path(stem + "_loss.csv"), log);
  return path;
}

void run_train(const Run& run, const Log& log) {
  const RunConfig& c = run.config();
  const std::vector<ScanEntry> train = prepared_scans(run, "train");
  std::vector<fs::path> inputs;
  std::vector<TrainingSample> samples;
  for (const ScanEntry& e : train) {
    const TexturedMesh gt = load_textured_mesh(run.path(e.ground_truth));
    const TexturedMesh partial = load_textured_mesh(run.path(e.partial));
    TrainingSample s = build_training_sample(gt, partial, c.resolution, e.seed, c.sample_options(), containment_for(e));
    s.name = e.name;
    samples.push_back(std::move(s));
    inputs.push_back(e.partial);
  }
  fs::create_directories(run.path("train"));

  JointModel model(c.model, derive_seed(c.seed, kJointInit));
  TrainConfig tc = c.train;
  tc.seed = derive_seed(c.seed, kJointOrder);
  tc.batch_size = std::min<int>(tc.batch_size, int(samples.size()));
  TrainOutputs outputs{run.path("train/joint.ckpt"), run.path("train/loss.csv"), run.path("train/diagnostics.json")};
  const int report_every = std::max(1, tc.epochs / 10);
  train_joint(samples, tc, model, outputs, [&](const EpochLoss& l) {
    if ((l.epoch + 1) % report_every == 0 || l.epoch == 0)
      say(log, "train: epoch " + std::to_string(l.epoch + 1) + "/" + std::to_string(tc.epochs) + " shape " +
                   std::to_string(l.shape_loss) + " texture " + std::to_string(l.texture_loss));
  });

  train_inpainter_for(run, c.inpaint.partial, run.path("train/inpaint.ckpt"), run.path("train/inpaint_loss.csv"), log);
  write_manifest(run, "train", "train", inputs,
                 {"train/joint.ckpt", "train/loss.csv", "train/inpaint.ckpt", "train/inpaint_loss.csv"},
                 {{"seeds",
                   {{"joint_init", derive_seed(c.seed, kJointInit)},
                    {"joint_order", tc.seed},
                    {"inpaint_init", derive_seed(c.seed, kInpaintInit)},
                    {"inpaint_order", derive_seed(c.seed, kInpaintOrder)}}}});
}

void run_complete(const Run& run, const fs::path& checkpoint, const Log& log) {
  const RunConfig& c = run.config();
  const std::vector<ScanEntry> test = prepared_scans(run, "test");
  const JointModel model = load_joint(run, checkpoint);
  std::vector<fs::path> inputs{checkpoint.empty() ? fs::path("train/joint.ckpt") : fs::absolute(checkpoint)};
  std::vector<fs::path> outputs;
  for (const ScanEntry& e : test) {
    const TexturedMesh partial = load_textured_mesh(run.path(e.partial));
    CompletionOptions o;
    o.out_resolution = c.out_resolution;
    o.voxel_points = c.voxel_points;
    o.seed = e.seed;
    const Completion done = complete_scan(model, partial, o);
    const fs::path out = fs::path("complete") / e.name / "coarse.obj";
    fs::create_directories(run.path(out.parent_path()));
    save_textured_mesh(done.mesh, run.path(out));
    inputs.push_back(e.partial);
    outputs.push_back(out);
    say(log, "complete: " + e.name + " -> " + std::to_string(done.mesh.vertices.size()) + " vertices");
  }
  write_manifest(run, "complete", "complete", inputs, outputs);
}

void run_refine(const Run& run, RefineMode mode, const fs::path& checkpoint, const Log& log) {
  const RunConfig& c = run.config();
  const std::vector<ScanEntry> test = prepared_scans(run, "test");
  require_stage(run, "complete", "complete");

  std::optional<InpaintNet> net;
  std::vector<fs::path> inputs;
  if (mode_uses_network(mode)) {
    if (checkpoint.empty()) require_stage(run, "train", "train");
    const fs::path path =
        checkpoint.empty() ? inpainter_checkpoint(run, mode != RefineMode::no_partial_conv, log) : checkpoint;
    if (!fs::exists(path)) missing(path, "train");
    net.emplace(InpaintNet::load(path));
    inputs.push_back(checkpoint.empty() ? fs::relative(path, run.dir()) : fs::absolute(checkpoint));
  }

  const fs::path out_dir = refine_dir(mode);
  RefineOptions o;
  o.resolution = c.atlas_size;
  o.max_distance = c.max_distance;
  o.mode = mode;
  std::vector<fs::path> outputs;
  nlohmann::json links = nlohmann::json::array();
  for (const ScanEntry& e : test) {
    const fs::path coarse_rel = fs::path("complete") / e.name / "coarse.obj";
    const fs::path dir = out_dir / e.name;
    const fs::path refined_rel = dir / "refined.obj";
    fs::create_directories(run.path(dir));
    const TexturedMesh coarse = load_textured_mesh(run.path(coarse_rel));
    inputs.push_back(coarse_rel);
    inputs.push_back(e.partial);
    if (coarse.empty()) {
      save_textured_mesh(coarse, run.path(refined_rel));
      outputs.push_back(refined_rel);
      say(log, "refine: " + e.name + " has an empty completion; nothing to texture");
      continue;
    }
    const TexturedMesh partial = load_textured_mesh(run.path(e.partial));
    const Refinement r = refine_texture(coarse, partial, net ? &*net : nullptr, o);
    save_textured_mesh(r.mesh, run.path(refined_rel));
    save_mask(run.path(dir / "mask_observed.png"), r.masks.missing_mask);
    save_mask(run.path(dir / "mask_coarse.png"), r.masks.coarse_mask);
    save_mask(run.path(dir / "mask_background.png"), r.masks.background_mask);
    write_png(run.path(dir / "transferred.png"), r.masks.transferred);
    write_png(run.path(dir / "coarse_atlas.png"), r.masks.coarse);
    for (const char* f : {"refined.obj", "refined.png", "mask_observed.png", "mask_coarse.png", "mask_background.png",
                          "transferred.png", "coarse_atlas.png"})
      outputs.push_back(dir / f);
    links.push_back({{"completed", coarse_rel.generic_string()},
                     {"partial", e.partial},
                     {"refined", refined_rel.generic_string()},
                     {"masks", {(dir / "mask_observed.png").generic_string(), (dir / "mask_coarse.png").generic_string(),
                                (dir / "mask_background.png").generic_string()}}});
    say(log, "refine: " + e.name + " (" + to_string(mode) + ", " + std::to_string(count_unmasked(r.masks.missing_mask)) +
                 " observed texels)");
  }
  write_manifest(run, out_dir, "refine", inputs, outputs, {{"mode", to_string(mode)}, {"scans", links}});
}

std::vector<ScoreReport> run_evaluate(const Run& run, RefineMode mode, const Log& log) {
  const RunConfig& c = run.config();
  const std::vector<ScanEntry> test = prepared_scans(run, "test");
  const fs::path in_dir = refine_dir(mode), out_dir = evaluate_dir(mode);
  require_stage(run, in_dir, "refine --mode " + to_string(mode));
  std::vector<ScoreReport> reports;
  std::vector<fs::path> inputs;
  for (const ScanEntry& e : test) {
    const fs::path pred_rel = in_dir / e.name / "refined.obj";
    if (!fs::exists(run.path(pred_rel))) missing(run.path(pred_rel), "refine");
    reports.push_back(evaluate_scan(e.name, load_textured_mesh(run.path(pred_rel)),
                                    load_textured_mesh(run.path(e.ground_truth)), c.score));
    inputs.push_back(pred_rel);
    inputs.push_back(e.ground_truth);
    const ScoreReport& r = reports.back();
    say(log, "evaluate: " + e.name + " shape " + std::to_string(r.shape) + " texture " + std::to_string(r.texture) +
                 " area " + std::to_string(r.area) + " final " + std::to_string(r.final));
  }
  fs::create_directories(run.path(out_dir));
  const fs::path scores = out_dir / "scores.jsonl";
  write_score_report(run.path(scores), reports, c.score);
  write_manifest(run, out_dir, "evaluate", inputs, {scores}, {{"mode", to_string(mode)}, {"score", c.score.to_json()}});
  return reports;
}

}  // namespace texcomp
