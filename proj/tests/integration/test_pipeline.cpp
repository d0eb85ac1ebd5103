#include "test_support.hpp"

#include "texcomp/error.hpp"
#include "texcomp/pipeline/experiments.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace texcomp;

namespace {

template <typename F>
std::string expect_error(Errc code, F&& f) {
  try {
    f();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == code);
    return e.what();
  }
  return {};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const fs::path kSmoke = fs::path(TEXCOMP_SOURCE_DIR) / "configs" / "smoke.cfg";

int cli(const std::string& args) {
  const std::string cmd = "\"" + std::string(TEXCOMP_CLI_PATH) + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return status == 0 ? 0 : 1;
}

std::string cli_stderr(const std::string& args, const fs::path& scratch) {
  const fs::path err = scratch / "stderr.txt";
  const std::string cmd = "\"" + std::string(TEXCOMP_CLI_PATH) + "\" " + args + " > /dev/null 2> \"" + err.string() + "\"";
  [[maybe_unused]] const int status = std::system(cmd.c_str());
  return slurp(err);
}

}  // namespace

TEST_CASE("key-value parsing: comments, whitespace and malformed lines") {
  const KeyValues kv = parse_key_values("# header\n  seed = 4  # trailing\n\nresolution=32\n");
  CHECK(kv.size() == 2);
  CHECK(kv.at("seed") == "4");
  CHECK(kv.at("resolution") == "32");
  const std::string msg = expect_error(Errc::invalid_argument, [] { parse_key_values("seed 4\n", "x.cfg"); });
  CHECK(msg.find("x.cfg:1") != std::string::npos);
}

TEST_CASE("config defaults mirror the full-scale values and reject bad input") {
  const RunConfig c = RunConfig::from_key_values({});
  CHECK(c.resolution == 128);
  CHECK(c.train.epochs == 54);
  CHECK(c.train.learning_rate == 1e-4);
  CHECK(c.train.subsample == 50000);
  CHECK(c.bank_size == 100000);
  CHECK(c.model.displacement == 0.0722);
  CHECK(c.fixtures.size() == 5);
  CHECK(c.model.resolution == c.resolution);

  expect_error(Errc::invalid_argument, [] { RunConfig::from_key_values({{"resolutoin", "32"}}); });
  expect_error(Errc::invalid_argument, [] { RunConfig::from_key_values({{"resolution", "30"}}); });
  expect_error(Errc::invalid_argument, [] { RunConfig::from_key_values({{"resolution", "3x"}}); });
  expect_error(Errc::invalid_argument, [] { RunConfig::from_key_values({{"partiality", "t3"}}); });
  expect_error(Errc::invalid_argument, [] { RunConfig::from_key_values({{"model.fusion", "maybe"}}); });
  expect_error(Errc::invalid_argument, [] { RunConfig::from_key_values({{"fixtures", "sphere,cone"}}); });
  expect_error(Errc::invalid_argument, [] {
    RunConfig::from_key_values({{"train.subsample", "10"}, {"train.bank_size", "5"}});
  });
}

TEST_CASE("canonical text round-trips and the run hash ignores downstream keys") {
  const RunConfig a = RunConfig::load(kSmoke);
  const RunConfig b = RunConfig::from_key_values(parse_key_values(a.canonical()));
  CHECK(a.canonical() == b.canonical());
  CHECK(a.hash() == b.hash());
  CHECK(a.run_name().size() == 4 + 12);

  RunConfig c = a;
  c.refine_mode = RefineMode::bilinear;
  c.score.samples = 7;
  CHECK(c.hash() == a.hash());
  CHECK(c.canonical() != a.canonical());
  c.seed = 1;
  CHECK(c.hash() != a.hash());
}

TEST_CASE("SHA-256 of known strings") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("stages name the command that produces a missing artifact") {
  const fs::path out = test::scratch_dir("pipeline-missing");
  const Run run(RunConfig::load(kSmoke), out);
  CHECK(expect_error(Errc::missing_artifact, [&] { run_train(run); }).find("texcomp prepare") != std::string::npos);
  run_prepare(run);
  CHECK(expect_error(Errc::missing_artifact, [&] { run_complete(run); }).find("texcomp train") != std::string::npos);
  CHECK(expect_error(Errc::missing_artifact, [&] { run_refine(run, RefineMode::full); }).find("texcomp complete") !=
        std::string::npos);
  CHECK(expect_error(Errc::missing_artifact, [&] { run_evaluate(run, RefineMode::full); }).find("texcomp refine") !=
        std::string::npos);

  RunConfig other = run.config();
  other.seed = 99;
  std::ofstream(run.path("config.txt")) << other.canonical(true);
  expect_error(Errc::config_mismatch, [&] { Run again(RunConfig::load(kSmoke), out); });
}

TEST_CASE("prepare writes partial scans, grids, pairs and a manifest") {
  const fs::path out = test::scratch_dir("pipeline-prepare");
  const Run run(RunConfig::load(kSmoke), out);
  run_prepare(run);
  for (const std::string split : {"train", "test"}) {
    const auto scans = prepared_scans(run, split);
    REQUIRE(scans.size() == 5);
    for (const ScanEntry& e : scans) {
      const fs::path dir = run.path(fs::path(e.partial).parent_path());
      for (const char* f : {"partial.obj", "partial.png", "partial.json", "occupancy.bin", "occupancy.bin.hdr",
                            "colors.bin", "colors.bin.hdr"})
        CHECK(fs::exists(dir / f));
      CHECK(fs::exists(run.path(e.ground_truth)));
    }
  }
  const auto train = prepared_scans(run, "train"), test = prepared_scans(run, "test");
  CHECK(train[0].seed != test[0].seed);
  const auto m = nlohmann::json::parse(slurp(run.path("prepare/manifest.json")));
  CHECK(m["config_hash"] == run.config().hash());
  CHECK(m["outputs"].contains("prepare/pairs.txt"));
  CHECK(m["outputs"]["prepare/pairs.txt"] == sha256_file(run.path("prepare/pairs.txt")));
  std::ifstream pairs(run.path("prepare/pairs.txt"));
  std::string gt, partial;
  int lines = 0;
  while (pairs >> gt >> partial) ++lines;
  CHECK(lines == 10);
}

TEST_CASE("unknown experiments list the available ones") {
  const fs::path out = test::scratch_dir("pipeline-experiment");
  const std::string msg = expect_error(
      Errc::unknown_experiment, [&] { run_experiment("sweep", RunConfig::load(kSmoke), out); });
  CHECK(msg.find("ablation") != std::string::npos);
  CHECK(msg.find("cross-partiality") != std::string::npos);
}

TEST_CASE("the CLI chain on five fixtures at N=32 yields a score per fixture") {
  const fs::path out = test::scratch_dir("pipeline-cli");
  const std::string common = "--quiet --config \"" + kSmoke.string() + "\" --resolution 32 --out \"" + out.string() + "\"";
  CHECK(cli_stderr("complete " + common, out).find("texcomp prepare") != std::string::npos);
  REQUIRE(cli("prepare " + common) == 0);
  CHECK(cli_stderr("complete " + common, out).find("texcomp train") != std::string::npos);
  for (const char* stage : {"train", "complete", "refine", "evaluate"}) {
    CAPTURE(stage);
    REQUIRE(cli(std::string(stage) + " " + common) == 0);
  }
  RunConfig c = RunConfig::load(kSmoke);
  c = RunConfig::from_key_values([&] {
    KeyValues kv = c.to_key_values();
    kv["resolution"] = "32";
    return kv;
  }());
  const fs::path dir = out / c.run_name();
  const auto reports = read_score_report(dir / "evaluate/full/scores.jsonl");
  REQUIRE(reports.size() == 5);
  std::set<std::string> names;
  for (const ScoreReport& r : reports) {
    names.insert(r.name.substr(0, r.name.find('-')));
    CHECK(r.final >= 0.0);
    CHECK(r.final <= 1.0);
  }
  CHECK(names == std::set<std::string>{"sphere", "box", "capsule", "ellipsoid", "torus"});
  for (const char* stage : {"prepare", "train", "complete", "refine/full", "evaluate/full"})
    CHECK(fs::exists(dir / stage / "manifest.json"));

  // A second mode reuses the same run directory.
  REQUIRE(cli("refine --mode no_refinement " + common) == 0);
  REQUIRE(cli("evaluate --mode no_refinement " + common) == 0);
  CHECK(fs::exists(dir / "evaluate/no_refinement/scores.jsonl"));
  CHECK(cli("experiment sweep " + common) != 0);
}

TEST_CASE("two runs with the same seed write byte-identical manifests and scores") {
  const fs::path a = test::scratch_dir("pipeline-det-a"), b = test::scratch_dir("pipeline-det-b");
  const RunConfig c = RunConfig::load(kSmoke);
  for (const fs::path& root : {a, b}) {
    const Run run(c, root);
    ensure_completed(run);
    run_refine(run, RefineMode::full);
    run_evaluate(run, RefineMode::full);
  }
  int manifests = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a / c.run_name())) {
    if (entry.path().filename() != "manifest.json") continue;
    ++manifests;
    CAPTURE(entry.path().string());
    CHECK(slurp(entry.path()) == slurp(b / c.run_name() / fs::relative(entry.path(), a / c.run_name())));
  }
  CHECK(manifests == 5);
  CHECK(slurp(a / c.run_name() / "evaluate/full/scores.jsonl") ==
        slurp(b / c.run_name() / "evaluate/full/scores.jsonl"));
  // Identical empty completions would make this trivially true.
  CHECK(aggregate(read_score_report(a / c.run_name() / "evaluate/full/scores.jsonl")).mean[3] > 0.1);
}
