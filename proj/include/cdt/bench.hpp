#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdt/model.hpp"
#include "cdt/oracle.hpp"

namespace cdt {

struct IngestError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct IngestResult {
  // Keyed by group name; observations appear in file order within a group.
  std::map<std::string, std::vector<Observation>> by_group;
  std::vector<IngestError> errors;  // malformed lines, with line numbers
};

// Reads a JSONL observation file. Malformed lines are collected, not fatal;
// a duplicated id is fatal and names both offending lines. Groups under 100
// pairs are allowed with a logged warning.
IngestResult ingest(const std::string& path);

struct Split {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

// First ceil(f*n) observations by chronological order go to train. A
// fraction that would leave no test data is clamped to n-1 with a warning.
Split chronological_split(const std::vector<Observation>& corpus, double train_fraction);

// Three near-equal chronological phases; earlier phases absorb the remainder.
std::array<std::vector<Observation>, 3> three_phase_split(
    const std::vector<Observation>& corpus);

// Declarative description of one benchmark run. The oracle settings are
// carried opaquely for the CLI to build a backend from; the harness itself
// receives a ready oracle.
struct RunConfig {
  std::string data_path;
  std::string plan = "main";         // main | temporal | transfer
  std::vector<std::string> groups;   // empty = every ingested group
  std::vector<std::string> methods;  // empty = the plan's default set
  std::string source_group;          // transfer plan only
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
  std::string timestamp;  // stamped onto provenance; empty keeps runs reproducible
  HyperParams hp;
  std::map<std::string, std::string> profiles;  // human_profile texts by group
  nlohmann::json oracle = nlohmann::json::object();
};

RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& cfg);

struct CellResult {
  std::string group;
  std::string method;
  bool ok = true;
  std::string error;
  std::size_t predictions = 0;
};

struct RunReport {
  std::string dir;
  std::vector<CellResult> cells;
};

// Runs one experiment plan end to end and persists everything under out_dir:
// the config snapshot first, then trees, predictions and evaluations per
// (group, method) cell, analysis outputs, and summary tables. A failing cell
// is recorded and never takes the rest of the run down. Wall-clock data goes
// only into run_info.json so the remaining outputs stay byte-reproducible.
RunReport run_experiment(const RunConfig& cfg, Oracle& oracle, const std::string& out_dir);

}  // namespace cdt
