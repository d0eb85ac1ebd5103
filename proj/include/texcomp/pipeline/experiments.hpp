#pragma once

#include "texcomp/pipeline/stages.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace texcomp {

struct TableRow {
  std::string method;
  std::string training;  // partiality types; empty when the table has no such columns
  std::string testing;
  std::filesystem::path run_dir;
  std::vector<ScoreReport> reports;
  ScoreAggregate scores;
};

struct ExperimentTable {
  std::string experiment;
  std::vector<TableRow> rows;
};

const std::vector<std::string>& experiment_names();

// Runs every missing stage of the named configuration matrix below
// out_root and writes table.md and table.json to the base run's
// experiments/<name>/ directory. Throws unknown_experiment listing the
// available names.
ExperimentTable run_experiment(const std::string& name, const RunConfig& base, const std::filesystem::path& out_root,
                               const Log& log = {});

// Markdown table with percentages as mean +- population std.
std::string format_table(const ExperimentTable& table);

// Runs prepare, train and complete unless their manifests already exist.
void ensure_completed(const Run& run, const Log& log = {});

}  // namespace texcomp
