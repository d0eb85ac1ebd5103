#include "texcomp/pipeline/experiments.hpp"

#include "texcomp/error.hpp"

#include <cstdio>
#include <fstream>

namespace fs = std::filesystem;

namespace texcomp {
namespace {

std::string label(RefineMode mode) {
  switch (mode) {
    case RefineMode::transfer_baseline: return "Texture-transfer baseline";
    case RefineMode::no_coarse_masks: return "w/o coarse masks";
    case RefineMode::no_refinement: return "w/o refinement";
    case RefineMode::bilinear: return "w/ bilinear interpolation";
    case RefineMode::no_partial_conv: return "w/o partial conv";
    case RefineMode::full: return "Full";
  }
  return "?";
}

TableRow make_row(std::string method, const Run& run, std::vector<ScoreReport> reports) {
  TableRow row;
  row.method = std::move(method);
  row.run_dir = run.dir();
  row.scores = aggregate(reports);
  row.reports = std::move(reports);
  return row;
}

// Refinement is reused when present; scoring always reruns so the table
// reflects the current eval settings.
std::vector<ScoreReport> refine_and_score(const Run& run, RefineMode mode, const Log& log) {
  if (!run.done(refine_dir(mode))) run_refine(run, mode, {}, log);
  return run_evaluate(run, mode, log);
}

ExperimentTable ablation(const RunConfig& base, const fs::path& out_root, const Log& log) {
  const Run run(base, out_root);
  ensure_completed(run, log);
  ExperimentTable t{"ablation", {}};
  for (const auto& [name, mode] : refine_modes())
    t.rows.push_back(make_row(label(mode), run, refine_and_score(run, mode, log)));
  return t;
}

ExperimentTable cross_partiality(const RunConfig& base, const fs::path& out_root, const Log& log) {
  ExperimentTable t{"cross-partiality", {}};
  for (PartialityType train : {PartialityType::view, PartialityType::holes}) {
    RunConfig c = base;
    c.partiality = train;
    c.test_partiality = PartialityType::holes;
    c.refine_mode = RefineMode::full;
    const Run run(c, out_root);
    ensure_completed(run, log);
    TableRow row = make_row("Full", run, refine_and_score(run, RefineMode::full, log));
    row.training = train == PartialityType::view ? "T2" : "T1";
    row.testing = "T1";
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string percent(const ScoreAggregate& a, int k) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f +- %.2f", 100.0 * a.mean[k], 100.0 * a.stddev[k]);
  return buf;
}

nlohmann::json table_json(const ExperimentTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  const char* keys[4] = {"shape", "texture", "area", "final"};
  for (const TableRow& r : t.rows) {
    nlohmann::json row{{"method", r.method}, {"run", r.run_dir.filename().string()}, {"count", r.scores.count}};
    if (!r.training.empty()) {
      row["training"] = r.training;
      row["testing"] = r.testing;
    }
    for (int k = 0; k < 4; ++k) row[keys[k]] = {{"mean", r.scores.mean[k]}, {"std", r.scores.stddev[k]}};
    rows.push_back(row);
  }
  return {{"experiment", t.experiment}, {"rows", rows}};
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"ablation", "cross-partiality"};
  return names;
}

void ensure_completed(const Run& run, const Log& log) {
  if (!run.done("prepare")) run_prepare(run, log);
  if (!run.done("train")) run_train(run, log);
  if (!run.done("complete")) run_complete(run, {}, log);
}

ExperimentTable run_experiment(const std::string& name, const RunConfig& base, const fs::path& out_root,
                               const Log& log) {
  ExperimentTable t;
  if (name == "ablation")
    t = ablation(base, out_root, log);
  else if (name == "cross-partiality")
    t = cross_partiality(base, out_root, log);
  else {
    std::string known;
    for (const auto& n : experiment_names()) known += (known.empty() ? "" : ", ") + n;
    throw Error(Errc::unknown_experiment, "unknown experiment '" + name + "'; available: " + known);
  }
  const Run home(base, out_root);
  const fs::path dir = home.path("experiments") / name;
  fs::create_directories(dir);
  std::ofstream(dir / "table.md") << format_table(t);
  std::ofstream(dir / "table.json") << table_json(t).dump(2) << '\n';
  return t;
}

std::string format_table(const ExperimentTable& t) {
  const bool partiality = !t.rows.empty() && !t.rows.front().training.empty();
  std::string out;
  if (partiality) {
    out += "| Method | Training | Testing | Shape Score (%) | Texture Score (%) | Final Score (%) |\n";
    out += "|---|---|---|---|---|---|\n";
    for (const TableRow& r : t.rows)
      out += "| " + r.method + " | " + r.training + " | " + r.testing + " | " + percent(r.scores, 0) + " | " +
             percent(r.scores, 1) + " | " + percent(r.scores, 3) + " |\n";
  } else {
    out += "| Method | Shape Score (%) | Area Score (%) | Texture Score (%) | Final Score (%) |\n";
    out += "|---|---|---|---|---|\n";
    for (const TableRow& r : t.rows)
      out += "| " + r.method + " | " + percent(r.scores, 0) + " | " + percent(r.scores, 2) + " | " +
             percent(r.scores, 1) + " | " + percent(r.scores, 3) + " |\n";
  }
  return out;
}

}  // namespace texcomp
