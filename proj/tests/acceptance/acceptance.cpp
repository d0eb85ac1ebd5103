// Acceptance checks 1-11. Prints one PASS/FAIL line per criterion and exits
// non-zero when any fails. Every tolerance is a constant in this file.
#include "gradient_criterion.hpp"

#include "texcomp/error.hpp"
#include "texcomp/geometry/marching_cubes.hpp"
#include "texcomp/geometry/mesh_io.hpp"
#include "texcomp/implicit/grid_sample.hpp"
#include "texcomp/pipeline/experiments.hpp"
#include "texcomp/reconstruction/complete.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace texcomp;
using nn::Real;
using nn::Tensor;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// 1. Feature sampling against a brute-force trilinear interpolator.

// Interpolation written from the definition: locate the cell, blend its eight
// corners with products of linear weights, clamp to the border nodes.
double brute_trilinear(const Tensor& level, int b, int c, Vec3 p) {
  const int k = level.dim(2);
  auto node = [&](int i, int j, int l) {
    return double(level.data[(((std::size_t(b) * level.dim(1) + c) * k + i) * k + j) * k + l]);
  };
  int lo[3];
  double t[3];
  for (int a = 0; a < 3; ++a) {
    const double u = std::clamp((p[a] + 0.5) * k - 0.5, 0.0, double(k - 1));
    lo[a] = std::min(int(std::floor(u)), std::max(0, k - 2));
    t[a] = k == 1 ? 0.0 : u - lo[a];
  }
  double sum = 0;
  for (int di = 0; di < 2; ++di)
    for (int dj = 0; dj < 2; ++dj)
      for (int dl = 0; dl < 2; ++dl) {
        const double w = (di ? t[0] : 1 - t[0]) * (dj ? t[1] : 1 - t[1]) * (dl ? t[2] : 1 - t[2]);
        if (w == 0) continue;
        sum += w * node(std::min(lo[0] + di, k - 1), std::min(lo[1] + dj, k - 1), std::min(lo[2] + dl, k - 1));
      }
  return sum;
}

Outcome criterion_sampler() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> pos(-0.55, 0.55), val(-3, 3);
  const double delta = 0.0722;
  const Vec3 offsets[7] = {{0, 0, 0}, {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Pyramid pyr;
    const int levels = 1 + int(rng() % 4);
    for (int l = 0; l < levels; ++l) {
      const int k = 1 << (rng() % 6);
      Tensor t({2, 1 + int(rng() % 4), k, k, k});
      for (Real& v : t.data) v = Real(val(rng));
      pyr.push_back(std::move(t));
    }
    Tensor pts({2, 1, 3});
    for (Real& v : pts.data) v = Real(pos(rng));
    const Tensor f = grid_sample_features(pyr, pts, delta);
    for (int b = 0; b < 2; ++b) {
      const Vec3 p(pts.data[b * 3], pts.data[b * 3 + 1], pts.data[b * 3 + 2]);
      int col = 0;
      for (const Tensor& level : pyr)
        for (const Vec3& o : offsets)
          for (int c = 0; c < level.dim(1); ++c, ++col)
            worst = std::max(worst, std::abs(brute_trilinear(level, b, c, p + delta * o) - f.data[b * f.dim(1) + col]));
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-5 && secs < 60, fmt("max abs error %.2e over 100 pyramids (limit 1e-5), %.1f s", worst, secs)};
}

// ---------------------------------------------------------------------------
// 2. End-to-end gradients in double precision.

Outcome criterion_gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  const acceptance::GradientSummary g = acceptance::joint_gradient_summary(400, 1e-3);
  const double secs = seconds_since(t0);
  return {g.pass_fraction >= 0.95 && secs < 300,
          fmt("%d parameters, %.1f%% within 1e-3 relative error (limit 95%%), %.1f s", g.checked,
              100 * g.pass_fraction, secs)};
}

// ---------------------------------------------------------------------------
// 3. Masked convolution with all-ones masks is ordinary convolution.

Outcome criterion_partial_conv() {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> u(-2, 2);
  double worst = 0;
  int windows = 0;
  while (windows < 1000) {
    const int in = 1 + int(rng() % 3), out = 1 + int(rng() % 3), k = rng() % 2 ? 3 : 5;
    PartialConv2d masked("p", in, out, k, 1, true, rng);
    nn::Conv2d plain("c", in, out, k, 1, rng);
    plain.weight.value = masked.weight.value;
    plain.bias.value = masked.bias.value;
    Tensor x({1, in, 6, 6});
    for (Real& v : x.data) v = Real(u(rng));
    const auto [y, ym] = masked.forward(x, Tensor(x.shape, 1), nullptr);
    const Tensor ref = plain.infer(x);
    for (std::size_t i = 0; i < y.numel(); ++i) worst = std::max(worst, double(std::abs(y.data[i] - ref.data[i])));
    windows += int(y.numel());
  }
  const std::vector<double> ones(9, 1.0), zeros(9, 0.0), values{1, 2, 3, 4, 5, 6, 7, 8, 9};
  const std::vector<double> top{1, 1, 1, 0, 0, 0, 0, 0, 0};
  const double a = partial_conv_window(ones, ones, ones, 0.0);
  const double b = partial_conv_window(ones, ones, zeros, 0.0);
  const double c = partial_conv_window(values, ones, top, 0.0);
  const bool examples = a == 9.0 && b == 0.0 && c == 18.0;
  return {worst <= 1e-6 && examples,
          fmt("%d windows, max difference %.2e (limit 1e-6); worked examples %g / %g / %g", windows, worst, a, b, c)};
}

// ---------------------------------------------------------------------------
// 4. Mask growth.

Outcome criterion_mask_dynamics() {
  std::mt19937_64 rng(104);
  Tensor m({1, 1, 15, 15}, 1);
  for (int y = 5; y < 10; ++y)
    for (int x = 5; x < 10; ++x) m.data[std::size_t(y) * 15 + x] = 0;
  bool monotone = true;
  int layers_to_close = -1;
  Tensor current = m;
  for (int layer = 1; layer <= 3; ++layer) {
    PartialConv2d conv("p", 1, 1, 3, 1, true, rng);
    const Tensor next = conv.forward(Tensor(current.shape, 1), current, nullptr).second;
    for (std::size_t i = 0; i < next.numel(); ++i) monotone &= next.data[i] >= current.data[i];
    current = next;
    if (layers_to_close < 0 && std::count(current.data.begin(), current.data.end(), Real(0)) == 0)
      layers_to_close = layer;
  }
  // Random masks through a stack of layers: unmasked sets only grow.
  for (int trial = 0; trial < 50; ++trial) {
    Tensor mask({1, 2, 16, 16});
    std::bernoulli_distribution open(0.15);
    for (Real& v : mask.data) v = open(rng) ? 1 : 0;
    for (int layer = 0; layer < 4; ++layer) {
      PartialConv2d conv("p", 2, 2, 3, 1, true, rng);
      const Tensor next = conv.forward(Tensor(mask.shape, 1), mask, nullptr).second;
      for (int c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < 256; ++i) monotone &= next.data[c * 256 + i] >= mask.data[c * 256 + i];
      mask = next;
    }
  }
  return {layers_to_close >= 1 && layers_to_close <= 3 && monotone,
          fmt("5x5 hole closed after %d layers (limit 3); unmasked sets %s", layers_to_close,
              monotone ? "never shrink" : "shrank")};
}

// ---------------------------------------------------------------------------
// 6. Marching cubes on an analytic sphere.

Outcome criterion_marching_cubes() {
  const int n = 64;
  const double r = 0.4;
  Volume vol(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double d = voxel_center(n, i, j, k).norm() - r;
        vol.values[voxel_index(n, i, j, k)] = float(1.0 / (1.0 + std::exp(4.0 * n * d)));
      }
  const TexturedMesh m = marching_cubes(vol, 0.5);
  const double expected = 4 * std::numbers::pi * r * r;
  const double rel = std::abs(surface_area(m) - expected) / expected;
  const int chi = euler_characteristic(m);
  return {rel <= 0.05 && chi == 2, fmt("area off by %.2f%% (limit 5%%), Euler characteristic %d", 100 * rel, chi)};
}

// ---------------------------------------------------------------------------
// 7. Observed texture survives composition bit for bit.

Outcome criterion_preservation() {
  std::mt19937_64 rng(107);
  const auto names = standard_fixture_names();
  std::size_t checked = 0, mismatched = 0;
  std::uniform_real_distribution<float> noise(-0.3f, 1.3f);
  for (int trial = 0; trial < 20; ++trial) {
    const Fixture fx = fixture_by_name(names[trial % names.size()], 64);
    const TexturedMesh partial =
        make_hole_partial(fx.mesh, {.count = 2 + trial % 3, .radius_min = 0.05, .radius_max = 0.2}, rng()).mesh;
    TexturedMesh bare = fx.mesh;
    bare.uvs.clear();
    bare.atlas = Image();
    TexturedMesh completed = generate_uv_atlas(bare, {.resolution = 64});
    completed.atlas = Image(64, 64, 3);
    AtlasMaskSet set = transfer_texture_raycast(completed, partial);
    Image inpainted(64, 64, 3);
    for (float& v : inpainted.pixels) v = noise(rng);
    const Image out = compose_final_texture(inpainted, set.transferred, set.missing_mask, set.background_mask);
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x) {
        if (set.missing_mask.at(x, y) != 1.0f) continue;
        ++checked;
        for (int c = 0; c < 3; ++c) mismatched += out.at(x, y, c) != set.transferred.at(x, y, c);
      }
  }
  return {mismatched == 0 && checked > 0,
          fmt("%zu observed texels over 20 cases, %zu channel mismatches", checked, mismatched)};
}

// ---------------------------------------------------------------------------
// 8. Score identities.

Outcome criterion_metrics() {
  bool identity = true;
  for (const Fixture& fx : standard_fixtures(64)) {
    const ScoreReport r = evaluate_scan(fx.name, fx.mesh, fx.mesh, {.samples = 5000});
    identity &= r.shape == 1.0 && r.texture == 1.0 && r.area == 1.0 && r.final == 1.0;
  }
  std::mt19937_64 rng(108);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const double s = u(rng), t = u(rng), a = u(rng);
    worst = std::max(worst, std::abs(final_score(s, t, a) - 0.5 * a * (s + t)));
  }
  return {identity && worst <= 1e-9,
          fmt("pred == gt gives all scores exactly 1: %s; max |S_r - S_a(S_s+S_t)/2| = %.1e over 1000 triples",
              identity ? "yes" : "no", worst)};
}

// ---------------------------------------------------------------------------
// Pipeline criteria.

struct Context {
  fs::path work;
  RunConfig desk;
  RunConfig smoke;
  fs::path cli;
  Log log;
};

double fixture_iou(const Volume& probabilities, const Fixture& fx) {
  const int n = probabilities.resolution;
  std::size_t both = 0, either = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const bool pred = probabilities.values[voxel_index(n, i, j, k)] > 0.5f;
        const bool gt = fx.inside(voxel_center(n, i, j, k));
        both += pred && gt;
        either += pred || gt;
      }
  return either ? double(both) / double(either) : 1.0;
}

// 5. The joint model fits its training scans.
Outcome criterion_overfit(const Context& ctx) {
  RunConfig c = ctx.desk;
  const Run run(c, ctx.work);
  if (!run.done("prepare")) run_prepare(run, ctx.log);
  const auto t0 = std::chrono::steady_clock::now();
  double train_secs = 0;
  if (!run.done("train")) {
    run_train(run, ctx.log);
    train_secs = seconds_since(t0);
  }
  const JointModel model = JointModel::load(run.path("train/joint.ckpt"), &c.model);
  const int out_res = 64;
  double worst_iou = 1, worst_rgb = 0;
  std::string per;
  for (const ScanEntry& e : prepared_scans(run, "train")) {
    const Fixture fx = fixture_by_name(e.fixture, c.atlas_size);
    const fs::path dir = run.path(fs::path(e.partial).parent_path());
    const VoxelGrid occ = load_voxel_grid(dir / "occupancy.bin");
    const ColorVoxelGrid col = load_color_grid(dir / "colors.bin");
    const Volume prob = predict_occupancy_volume(model, occ, out_res);
    const double iou = fixture_iou(prob, fx);
    const TexturedMesh mesh = extract_completed_mesh(prob);
    double rgb = 1.0;
    if (!mesh.empty()) {
      const std::vector<Rgb> colors = predict_vertex_colors(model, occ, col, mesh);
      rgb = 0;
      for (std::size_t v = 0; v < colors.size(); ++v) rgb += (colors[v] - fx.color(mesh.vertices[v])).cwiseAbs().mean();
      rgb /= double(colors.size());
    }
    worst_iou = std::min(worst_iou, iou);
    worst_rgb = std::max(worst_rgb, rgb);
    per += fmt(" %s %.3f/%.3f", e.name.c_str(), iou, rgb);
  }
  const bool timed = train_secs <= 30 * 60;
  return {worst_iou >= 0.9 && worst_rgb <= 0.05 && timed,
          fmt("worst IoU %.3f (limit 0.9), worst mean vertex RGB error %.3f (limit 0.05), training %.0f s (limit 1800);"
              " per scan IoU/RGB:%s",
              worst_iou, worst_rgb, train_secs, per.c_str())};
}

// 9. Refinement does not lower the texture score on held-out hole scans.
Outcome criterion_refinement(const Context& ctx) {
  const Run run(ctx.desk, ctx.work);
  ensure_completed(run, ctx.log);
  std::vector<ScoreReport> scores[2];
  const RefineMode modes[2] = {RefineMode::full, RefineMode::no_refinement};
  for (int m = 0; m < 2; ++m) {
    if (!run.done(refine_dir(modes[m]))) run_refine(run, modes[m], {}, ctx.log);
    scores[m] = run_evaluate(run, modes[m], ctx.log);
  }
  std::size_t better = 0;
  std::string per;
  for (std::size_t i = 0; i < scores[0].size(); ++i) {
    better += scores[0][i].texture >= scores[1][i].texture;
    per += fmt(" %s %.4f/%.4f", scores[0][i].name.c_str(), scores[0][i].texture, scores[1][i].texture);
  }
  const double fraction = scores[0].empty() ? 0.0 : double(better) / double(scores[0].size());
  return {fraction >= 0.8, fmt("refined >= coarse in %zu of %zu scans (limit 80%%); refined/coarse texture:%s", better,
                               scores[0].size(), per.c_str())};
}

// 10. Cross-partiality table.
Outcome criterion_cross_partiality(const Context& ctx) {
  const ExperimentTable t = run_experiment("cross-partiality", ctx.desk, ctx.work, ctx.log);
  if (t.rows.size() != 2) return {false, "expected two rows"};
  const double t2 = t.rows[0].scores.mean[3], t1 = t.rows[1].scores.mean[3];
  std::printf("%s", format_table(t).c_str());
  return {t.rows[0].training == "T2" && t.rows[1].training == "T1" && std::abs(t2 - t1) <= 0.10,
          fmt("final score train-T2/test-T1 %.2f%%, train-T1/test-T1 %.2f%%, gap %.2f points (limit 10)", 100 * t2,
              100 * t1, 100 * std::abs(t2 - t1))};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 11. Two complete CLI runs with one seed agree byte for byte.
Outcome criterion_determinism(const Context& ctx) {
  const fs::path cfg = ctx.work / "determinism.cfg";
  std::ofstream(cfg) << ctx.smoke.canonical();
  std::vector<fs::path> runs;
  for (const char* root : {"determinism-a", "determinism-b"}) {
    fs::remove_all(ctx.work / root);
    for (const char* stage : {"prepare", "train", "complete", "refine", "evaluate"}) {
      const std::string cmd = "\"" + ctx.cli.string() + "\" " + stage + " --quiet --config \"" + cfg.string() +
                              "\" --out \"" + (ctx.work / root).string() + "\" > /dev/null 2>&1";
      if (std::system(cmd.c_str()) != 0) return {false, std::string("`texcomp ") + stage + "` failed"};
    }
    runs.push_back(ctx.work / root / ctx.smoke.run_name());
  }
  const fs::path scores = fs::path("evaluate") / to_string(ctx.smoke.refine_mode) / "scores.jsonl";
  const std::string a = read_file(runs[0] / scores), b = read_file(runs[1] / scores);
  std::size_t manifests = 0, differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(runs[0])) {
    if (entry.path().filename() != "manifest.json") continue;
    ++manifests;
    differing += read_file(entry.path()) != read_file(runs[1] / fs::relative(entry.path(), runs[0]));
  }
  const auto reports = read_score_report(runs[0] / scores);
  double final_mean = aggregate(reports).mean[3];
  return {!a.empty() && a == b && manifests >= 5 && differing == 0,
          fmt("score tables %s (%zu scans, mean final %.4f); %zu manifests, %zu differ",
              a == b ? "identical" : "differ", reports.size(), final_mean, manifests, differing)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  fs::path work = fs::path(TEXCOMP_BINARY_DIR) / "acceptance-work";
  bool keep = false;
  app.add_option("--only", only, "criteria to run");
  app.add_option("--work", work, "scratch directory for pipeline runs");
  app.add_flag("--keep", keep, "reuse pipeline runs left by a previous invocation");
  CLI11_PARSE(app, argc, argv);

  if (!keep) fs::remove_all(work);
  fs::create_directories(work);
  const fs::path configs = fs::path(TEXCOMP_SOURCE_DIR) / "configs";
  Context ctx{work, RunConfig::load(configs / "desk.cfg"), RunConfig::load(configs / "smoke.cfg"),
              fs::path(TEXCOMP_CLI_PATH), {}};
  ctx.log = [](const std::string& line) { std::fprintf(stderr, "  %s\n", line.c_str()); };

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"feature sampling matches brute-force trilinear interpolation", criterion_sampler},
      {"end-to-end gradients match central differences", criterion_gradients},
      {"masked convolution with all-ones masks is ordinary convolution", criterion_partial_conv},
      {"mask updates close a 5-pixel hole and never shrink", criterion_mask_dynamics},
      {"joint model overfits the five training fixtures", [&] { return criterion_overfit(ctx); }},
      {"marching cubes reproduces a sphere's area and topology", criterion_marching_cubes},
      {"observed texels are preserved bit-exact", criterion_preservation},
      {"score identities", criterion_metrics},
      {"refinement keeps or raises the texture score", [&] { return criterion_refinement(ctx); }},
      {"cross-partiality experiment", [&] { return criterion_cross_partiality(ctx); }},
      {"identical seeds give identical score tables", [&] { return criterion_determinism(ctx); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = int(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), number) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %2d %s: %s (%s)\n", number, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
