// Command-line front end. Links only the C API; all heavy lifting happens
// behind cdt_c.h. Errors leave as one machine-readable JSON object on stderr
// and a non-zero exit code.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cdt_c.h"

using nlohmann::json;

namespace {

constexpr int kUsageExit = 64;

struct CliFailure {
  int exit_code;
  std::string code;
  std::string message;
};

const char* status_name(cdt_status s) {
  switch (s) {
    case CDT_OK: return "ok";
    case CDT_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case CDT_ERR_DATA: return "data";
    case CDT_ERR_CONFIG: return "config";
    case CDT_ERR_IO: return "io";
    case CDT_ERR_UNSUPPORTED_SCHEMA: return "unsupported_schema";
    case CDT_ERR_ORACLE_TRANSPORT: return "oracle_transport";
    case CDT_ERR_ORACLE_PROTOCOL: return "oracle_protocol";
    case CDT_ERR_MISSING_TRANSCRIPT: return "missing_transcript";
    case CDT_ERR_INTERNAL: return "internal";
  }
  return "internal";
}

[[noreturn]] void fail_cli(const std::string& code, const std::string& message,
                           int exit_code) {
  throw CliFailure{exit_code, code, message};
}

void check(cdt_status s) {
  if (s != CDT_OK) throw CliFailure{static_cast<int>(s), status_name(s), cdt_last_error()};
}

// RAII over the C handles and returned strings.
struct StringOut {
  char* p = nullptr;
  ~StringOut() { cdt_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

using CorpusPtr = std::unique_ptr<cdt_corpus, decltype(&cdt_corpus_free)>;
using TreePtr = std::unique_ptr<cdt_tree, decltype(&cdt_tree_free)>;
using OraclePtr = std::unique_ptr<cdt_oracle, decltype(&cdt_oracle_free)>;

CorpusPtr load_corpus(const std::string& path) {
  cdt_corpus* c = nullptr;
  check(cdt_corpus_load(path.c_str(), &c));
  return CorpusPtr(c, &cdt_corpus_free);
}

TreePtr load_tree(const std::string& path) {
  cdt_tree* t = nullptr;
  check(cdt_tree_load(path.c_str(), &t));
  return TreePtr(t, &cdt_tree_free);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_cli("io", "cannot open file: " + path, CDT_ERR_IO);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail_cli("io", "cannot write file: " + path, CDT_ERR_IO);
  out << content;
  if (!content.empty() && content.back() != '\n') out << '\n';
}

void write_or_print(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    if (content.empty() || content.back() != '\n') std::cout << '\n';
  } else {
    write_file(path, content);
  }
}

json parse_json_file(const std::string& path, const std::string& what) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) fail_cli("config", what + " is not valid JSON: " + path, CDT_ERR_CONFIG);
  return j;
}

// Shared oracle selection: a config file names the provider, --record /
// --replay force the transcript layer on top of (or instead of) it.
struct OracleFlags {
  std::string config_path;
  std::string record_dir;
  std::string replay_dir;
};

void add_oracle_flags(CLI::App* cmd, OracleFlags& flags) {
  cmd->add_option("--oracle", flags.config_path,
                  "Oracle config JSON file (provider and transcript settings)");
  auto* rec = cmd->add_option("--record", flags.record_dir,
                              "Record every oracle exchange into this transcript directory");
  auto* rep = cmd->add_option("--replay", flags.replay_dir,
                              "Serve oracle calls from this transcript directory, no network");
  rec->excludes(rep);
  rep->excludes(rec);
}

json oracle_config_json(const OracleFlags& flags) {
  json cfg = json::object();
  if (!flags.config_path.empty()) cfg = parse_json_file(flags.config_path, "oracle config");
  if (!flags.replay_dir.empty()) {
    cfg["transcript"] = {{"mode", "replay"}, {"dir", flags.replay_dir}};
  } else if (!flags.record_dir.empty()) {
    cfg["transcript"] = {{"mode", "record"}, {"dir", flags.record_dir}};
  }
  return cfg;
}

OraclePtr build_oracle(const OracleFlags& flags) {
  cdt_oracle* o = nullptr;
  check(cdt_oracle_create(oracle_config_json(flags).dump().c_str(), &o));
  return OraclePtr(o, &cdt_oracle_free);
}

// Tree-shaping options shared by build/adapt/transfer.
struct ShapeFlags {
  std::string hyperparams_path;
  std::string timestamp;
};

json shape_options(const ShapeFlags& flags) {
  json options = json::object();
  if (!flags.hyperparams_path.empty()) {
    options["hyperparams"] = parse_json_file(flags.hyperparams_path, "hyperparams file");
  }
  if (!flags.timestamp.empty()) options["timestamp"] = flags.timestamp;
  return options;
}

void report_corpus_line_errors(const cdt_corpus* corpus) {
  StringOut errors;
  check(cdt_corpus_errors_json(corpus, &errors.p));
  json arr = json::parse(errors.str());
  for (const auto& e : arr) {
    std::cerr << json{{"warning", {{"line", e.at("line")}, {"message", e.at("message")}}}}.dump()
              << "\n";
  }
}

std::string tree_summary(const cdt_tree* tree, const std::string& path) {
  StringOut group;
  check(cdt_tree_group(tree, &group.p));
  size_t statements = 0;
  check(cdt_tree_statement_count(tree, &statements));
  return json{{"tree", path}, {"group", group.str()}, {"statements", statements}}.dump();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Codified decision trees over behavioral observation streams"};
  app.require_subcommand(1);

  // ---- build ----
  auto* build_cmd = app.add_subcommand("build", "Construct a tree from a group's observations");
  struct {
    std::string data, group, out;
    std::uint64_t seed = 0;
    int n_target = 4, n_upper = 8;
    ShapeFlags shape;
    OracleFlags oracle;
  } build_opt;
  build_cmd->add_option("--data", build_opt.data, "Observation JSONL file")->required();
  build_cmd->add_option("--group", build_opt.group, "Group to model")->required();
  build_cmd->add_option("--out", build_opt.out, "Output tree JSON path")->required();
  build_cmd->add_option("--seed", build_opt.seed, "Base seed for candidate construction");
  build_cmd->add_option("--n-target", build_opt.n_target, "Statement count aimed for per node");
  build_cmd->add_option("--n-upper", build_opt.n_upper, "Hard statement cap per node");
  build_cmd->add_option("--hyperparams", build_opt.shape.hyperparams_path,
                        "Hyperparameter JSON file");
  build_cmd->add_option("--timestamp", build_opt.shape.timestamp,
                        "Timestamp recorded in provenance (empty keeps output reproducible)");
  add_oracle_flags(build_cmd, build_opt.oracle);
  build_cmd->callback([&] {
    json options = shape_options(build_opt.shape);
    options["seed"] = build_opt.seed;
    options["n_target"] = build_opt.n_target;
    options["n_upper"] = build_opt.n_upper;
    OraclePtr oracle = build_oracle(build_opt.oracle);
    CorpusPtr corpus = load_corpus(build_opt.data);
    report_corpus_line_errors(corpus.get());
    cdt_tree* raw = nullptr;
    check(cdt_build(corpus.get(), build_opt.group.c_str(), options.dump().c_str(),
                    oracle.get(), &raw));
    TreePtr tree(raw, &cdt_tree_free);
    check(cdt_tree_save(tree.get(), build_opt.out.c_str()));
    std::cout << tree_summary(tree.get(), build_opt.out) << "\n";
  });

  // ---- adapt ----
  auto* adapt_cmd =
      app.add_subcommand("adapt", "Fold new observations into an existing tree");
  struct {
    std::string tree, data, group, out, report;
    ShapeFlags shape;
    OracleFlags oracle;
  } adapt_opt;
  adapt_cmd->add_option("--tree", adapt_opt.tree, "Tree JSON to adapt")->required();
  adapt_cmd->add_option("--data", adapt_opt.data,
                        "Observation JSONL; ids already in the tree count as history, "
                        "the rest are folded in as new arrivals")
      ->required();
  adapt_cmd->add_option("--group", adapt_opt.group, "Group (defaults to the tree's group)");
  adapt_cmd->add_option("--out", adapt_opt.out, "Output tree JSON path")->required();
  adapt_cmd->add_option("--report", adapt_opt.report, "Write the adaptation report JSON here");
  adapt_cmd->add_option("--hyperparams", adapt_opt.shape.hyperparams_path,
                        "Hyperparameter JSON file (defaults to the tree's own)");
  adapt_cmd->add_option("--timestamp", adapt_opt.shape.timestamp,
                        "Timestamp recorded in provenance");
  add_oracle_flags(adapt_cmd, adapt_opt.oracle);
  adapt_cmd->callback([&] {
    json options = shape_options(adapt_opt.shape);
    OraclePtr oracle = build_oracle(adapt_opt.oracle);
    TreePtr tree = load_tree(adapt_opt.tree);
    CorpusPtr corpus = load_corpus(adapt_opt.data);
    report_corpus_line_errors(corpus.get());
    cdt_tree* raw = nullptr;
    StringOut report;
    check(cdt_adapt(tree.get(), corpus.get(), adapt_opt.group.c_str(),
                    options.dump().c_str(), oracle.get(), &raw, &report.p));
    TreePtr adapted(raw, &cdt_tree_free);
    check(cdt_tree_save(adapted.get(), adapt_opt.out.c_str()));
    if (!adapt_opt.report.empty()) write_file(adapt_opt.report, report.str());
    json summary = json::parse(tree_summary(adapted.get(), adapt_opt.out));
    if (!adapt_opt.report.empty()) summary["report"] = adapt_opt.report;
    std::cout << summary.dump() << "\n";
  });

  // ---- transfer ----
  auto* transfer_cmd =
      app.add_subcommand("transfer", "Re-ground a source tree on a target group's corpus");
  struct {
    std::string tree, data, target_group, out, report;
    ShapeFlags shape;
    OracleFlags oracle;
  } transfer_opt;
  transfer_cmd->add_option("--tree", transfer_opt.tree, "Source tree JSON")->required();
  transfer_cmd->add_option("--data", transfer_opt.data, "Target group observation JSONL")
      ->required();
  transfer_cmd->add_option("--target-group", transfer_opt.target_group,
                           "Group the tree is transferred to")
      ->required();
  transfer_cmd->add_option("--out", transfer_opt.out, "Output tree JSON path")->required();
  transfer_cmd->add_option("--report", transfer_opt.report,
                           "Write the adaptation report JSON here");
  transfer_cmd->add_option("--hyperparams", transfer_opt.shape.hyperparams_path,
                           "Hyperparameter JSON file (defaults to the tree's own)");
  transfer_cmd->add_option("--timestamp", transfer_opt.shape.timestamp,
                           "Timestamp recorded in provenance");
  add_oracle_flags(transfer_cmd, transfer_opt.oracle);
  transfer_cmd->callback([&] {
    json options = shape_options(transfer_opt.shape);
    OraclePtr oracle = build_oracle(transfer_opt.oracle);
    TreePtr tree = load_tree(transfer_opt.tree);
    CorpusPtr corpus = load_corpus(transfer_opt.data);
    report_corpus_line_errors(corpus.get());
    cdt_tree* raw = nullptr;
    StringOut report;
    check(cdt_transfer(tree.get(), corpus.get(), transfer_opt.target_group.c_str(),
                       options.dump().c_str(), oracle.get(), &raw, &report.p));
    TreePtr transferred(raw, &cdt_tree_free);
    check(cdt_tree_save(transferred.get(), transfer_opt.out.c_str()));
    if (!transfer_opt.report.empty()) write_file(transfer_opt.report, report.str());
    json summary = json::parse(tree_summary(transferred.get(), transfer_opt.out));
    if (!transfer_opt.report.empty()) summary["report"] = transfer_opt.report;
    std::cout << summary.dump() << "\n";
  });

  // ---- predict ----
  auto* predict_cmd =
      app.add_subcommand("predict", "Predict a group's next action for a scene");
  struct {
    std::string tree, context, context_file, question, trace;
    std::string baseline, data, group, profile_file;
    int rag_k = 8, summary_block = 40;
    OracleFlags oracle;
  } predict_opt;
  predict_cmd->add_option("--tree", predict_opt.tree, "Tree JSON (tree-guided prediction)");
  auto* ctx_opt = predict_cmd->add_option("--context", predict_opt.context, "Scene text");
  predict_cmd->add_option("--context-file", predict_opt.context_file,
                          "Read the scene text from a file")
      ->excludes(ctx_opt);
  predict_cmd->add_option("--question", predict_opt.question,
                          "Question to answer (defaults to the group's next action)");
  predict_cmd->add_option("--trace", predict_opt.trace,
                          "Write the gate traversal trace JSON here (tree mode only)");
  predict_cmd->add_option("--baseline", predict_opt.baseline,
                          "Predict without a tree: vanilla | human_profile | summarization | rag");
  predict_cmd->add_option("--data", predict_opt.data,
                          "Observation JSONL (summarization/rag baselines)");
  predict_cmd->add_option("--group", predict_opt.group, "Group name (baseline modes)");
  predict_cmd->add_option("--profile-file", predict_opt.profile_file,
                          "Profile text file for the human_profile baseline");
  predict_cmd->add_option("--rag-k", predict_opt.rag_k, "Examples retrieved by the rag baseline");
  predict_cmd->add_option("--summary-block", predict_opt.summary_block,
                          "Scene-action pairs folded per summarization pass");
  add_oracle_flags(predict_cmd, predict_opt.oracle);
  predict_cmd->callback([&] {
    std::string context = predict_opt.context;
    if (!predict_opt.context_file.empty()) context = read_file(predict_opt.context_file);
    if (context.empty()) {
      fail_cli("usage", "provide a scene via --context or --context-file", kUsageExit);
    }
    OraclePtr oracle = build_oracle(predict_opt.oracle);
    if (predict_opt.baseline.empty()) {
      if (predict_opt.tree.empty()) {
        fail_cli("usage", "provide --tree, or pick a --baseline mode", kUsageExit);
      }
      TreePtr tree = load_tree(predict_opt.tree);
      StringOut prediction;
      StringOut trace;
      check(cdt_predict(tree.get(), context.c_str(), predict_opt.question.c_str(),
                        oracle.get(), &prediction.p,
                        predict_opt.trace.empty() ? nullptr : &trace.p));
      if (!predict_opt.trace.empty()) write_file(predict_opt.trace, trace.str());
      std::cout << prediction.str() << "\n";
      return;
    }
    CorpusPtr corpus(nullptr, &cdt_corpus_free);
    if (!predict_opt.data.empty()) {
      corpus = load_corpus(predict_opt.data);
      report_corpus_line_errors(corpus.get());
    }
    json options = {{"rag_k", predict_opt.rag_k},
                    {"summary_block", predict_opt.summary_block}};
    if (!predict_opt.profile_file.empty()) {
      options["profile_text"] = read_file(predict_opt.profile_file);
    }
    StringOut prediction;
    check(cdt_baseline_predict(corpus.get(), predict_opt.group.c_str(),
                               predict_opt.baseline.c_str(), context.c_str(),
                               predict_opt.question.c_str(), options.dump().c_str(),
                               oracle.get(), &prediction.p));
    std::cout << prediction.str() << "\n";
  });

  // ---- evaluate ----
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "Grade predictions against recorded actions");
  struct {
    std::string data, predictions, out, method;
    OracleFlags oracle;
  } evaluate_opt;
  evaluate_cmd->add_option("--data", evaluate_opt.data, "Observation JSONL file")->required();
  evaluate_cmd
      ->add_option("--predictions", evaluate_opt.predictions,
                   "JSONL with one {observation_id, prediction[, method]} object per line")
      ->required();
  evaluate_cmd->add_option("--out", evaluate_opt.out,
                           "Output evaluation JSONL (stdout when omitted)");
  evaluate_cmd->add_option("--method", evaluate_opt.method,
                           "Method label overriding the per-line value");
  add_oracle_flags(evaluate_cmd, evaluate_opt.oracle);
  evaluate_cmd->callback([&] {
    OraclePtr oracle = build_oracle(evaluate_opt.oracle);

    std::map<std::string, std::string> by_id;
    {
      std::istringstream in(read_file(evaluate_opt.data));
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json obs = json::parse(line, nullptr, false);
        if (obs.is_discarded() || !obs.is_object() || !obs.contains("id")) continue;
        std::string id = obs.at("id").get<std::string>();
        if (!by_id.emplace(id, obs.dump()).second) {
          fail_cli("data", "duplicate observation id \"" + id + "\" at line " +
                               std::to_string(line_no),
                   CDT_ERR_DATA);
        }
      }
    }

    std::ostringstream out;
    std::istringstream in(read_file(evaluate_opt.predictions));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json p = json::parse(line, nullptr, false);
      if (p.is_discarded() || !p.is_object() || !p.contains("observation_id") ||
          !p.contains("prediction")) {
        fail_cli("data",
                 "predictions line " + std::to_string(line_no) +
                     " needs observation_id and prediction fields",
                 CDT_ERR_DATA);
      }
      std::string id = p.at("observation_id").get<std::string>();
      auto it = by_id.find(id);
      if (it == by_id.end()) {
        fail_cli("data", "prediction references unknown observation id \"" + id + "\"",
                 CDT_ERR_DATA);
      }
      std::string method = !evaluate_opt.method.empty() ? evaluate_opt.method
                                                        : p.value("method", "");
      StringOut record;
      check(cdt_evaluate_prediction(it->second.c_str(),
                                    p.at("prediction").get<std::string>().c_str(),
                                    method.c_str(), oracle.get(), &record.p));
      out << json::parse(record.str()).dump() << "\n";
    }
    write_or_print(evaluate_opt.out, out.str());
  });

  // ---- analyze ----
  auto* analyze_cmd = app.add_subcommand("analyze", "Similarity and drift analyses");
  analyze_cmd->require_subcommand(1);

  auto* drift_cmd =
      analyze_cmd->add_subcommand("drift", "Test one group for temporal behavioral drift");
  struct {
    std::string data, group, out;
    double tau = 0.7;
    std::size_t top_n = 20;
    OracleFlags oracle;
  } drift_opt;
  drift_cmd->add_option("--data", drift_opt.data, "Observation JSONL file")->required();
  drift_cmd->add_option("--group", drift_opt.group, "Group to test")->required();
  drift_cmd->add_option("--tau", drift_opt.tau, "Context-similarity threshold for pairing");
  drift_cmd->add_option("--top-n", drift_opt.top_n, "Pairs kept per comparison");
  drift_cmd->add_option("--out", drift_opt.out, "Output JSON path (stdout when omitted)");
  add_oracle_flags(drift_cmd, drift_opt.oracle);
  drift_cmd->callback([&] {
    OraclePtr oracle = build_oracle(drift_opt.oracle);
    CorpusPtr corpus = load_corpus(drift_opt.data);
    report_corpus_line_errors(corpus.get());
    json options = {{"tau", drift_opt.tau}, {"top_n", drift_opt.top_n}};
    StringOut result;
    check(cdt_analyze_drift(corpus.get(), drift_opt.group.c_str(), options.dump().c_str(),
                            oracle.get(), &result.p));
    write_or_print(drift_opt.out, result.str());
  });

  auto* similarity_cmd = analyze_cmd->add_subcommand(
      "similarity", "Pairwise similarity matrix over groups or trees");
  struct {
    std::string mode = "bss";
    std::string data, out, json_out;
    std::vector<std::string> groups;
    std::vector<std::string> trees;
    std::vector<std::string> names;
    double tau = 0.7;
    std::size_t top_n = 20;
    OracleFlags oracle;
  } sim_opt;
  similarity_cmd->add_option("--mode", sim_opt.mode, "bss | emd_gate | emd_stmt");
  similarity_cmd->add_option("--data", sim_opt.data, "Observation JSONL (bss mode)");
  similarity_cmd->add_option("--groups", sim_opt.groups,
                             "Groups to compare (bss mode; defaults to every group)");
  similarity_cmd->add_option("--tree", sim_opt.trees, "Tree JSON path (emd modes; repeatable)");
  similarity_cmd->add_option("--name", sim_opt.names,
                             "Display name for the matching --tree (repeatable)");
  similarity_cmd->add_option("--tau", sim_opt.tau, "Context-similarity threshold (bss)");
  similarity_cmd->add_option("--top-n", sim_opt.top_n, "Pairs kept per comparison (bss)");
  similarity_cmd->add_option("--out", sim_opt.out, "Output CSV path (stdout when omitted)");
  similarity_cmd->add_option("--json", sim_opt.json_out,
                             "Also write the full matrix with evidence as JSON");
  add_oracle_flags(similarity_cmd, sim_opt.oracle);
  similarity_cmd->callback([&] {
    OraclePtr oracle = build_oracle(sim_opt.oracle);
    json spec = {{"tau", sim_opt.tau}, {"top_n", sim_opt.top_n}};
    CorpusPtr corpus(nullptr, &cdt_corpus_free);
    if (sim_opt.mode == "bss") {
      if (sim_opt.data.empty()) {
        fail_cli("usage", "bss mode needs --data", kUsageExit);
      }
      corpus = load_corpus(sim_opt.data);
      report_corpus_line_errors(corpus.get());
      if (!sim_opt.groups.empty()) spec["groups"] = sim_opt.groups;
    } else {
      json trees = json::array();
      for (std::size_t i = 0; i < sim_opt.trees.size(); ++i) {
        json entry = {{"path", sim_opt.trees[i]}};
        if (i < sim_opt.names.size()) entry["name"] = sim_opt.names[i];
        trees.push_back(std::move(entry));
      }
      spec["trees"] = std::move(trees);
    }
    StringOut csv;
    StringOut full;
    check(cdt_analyze_similarity(corpus.get(), sim_opt.mode.c_str(), spec.dump().c_str(),
                                 oracle.get(), &csv.p,
                                 sim_opt.json_out.empty() ? nullptr : &full.p));
    if (!sim_opt.json_out.empty()) write_file(sim_opt.json_out, full.str());
    write_or_print(sim_opt.out, csv.str());
  });

  // ---- export ----
  auto* export_cmd = app.add_subcommand("export", "Render a tree for inspection");
  struct {
    std::string tree, out;
    bool dot = false;
    bool outline = false;
  } export_opt;
  export_cmd->add_option("--tree", export_opt.tree, "Tree JSON path")->required();
  export_cmd->add_flag("--dot", export_opt.dot,
                       "DOT graph, gates on edges, statements in node labels (default)");
  export_cmd->add_flag("--outline", export_opt.outline, "Indented plain-text outline");
  export_cmd->add_option("--out", export_opt.out, "Output path (stdout when omitted)");
  export_cmd->callback([&] {
    if (export_opt.dot && export_opt.outline) {
      fail_cli("usage", "pick one of --dot or --outline", kUsageExit);
    }
    TreePtr tree = load_tree(export_opt.tree);
    StringOut rendered;
    if (export_opt.outline) {
      check(cdt_tree_outline(tree.get(), &rendered.p));
    } else {
      check(cdt_tree_to_dot(tree.get(), &rendered.p));
    }
    write_or_print(export_opt.out, rendered.str());
  });

  // ---- validate ----
  auto* validate_cmd =
      app.add_subcommand("validate", "Check a tree file's structural invariants");
  struct {
    std::string tree;
  } validate_opt;
  validate_cmd->add_option("--tree", validate_opt.tree, "Tree JSON path")->required();
  validate_cmd->callback([&] {
    TreePtr tree = load_tree(validate_opt.tree);
    StringOut problems;
    check(cdt_tree_validate(tree.get(), &problems.p));
    json arr = json::parse(problems.str());
    std::cout << arr.dump(2) << "\n";
    if (!arr.empty()) {
      fail_cli("data", "tree has " + std::to_string(arr.size()) + " structural problems",
               CDT_ERR_DATA);
    }
  });

  // ---- run ----
  auto* run_cmd = app.add_subcommand("run", "Run a full benchmark plan from a config file");
  struct {
    std::string config, out;
    std::string record_dir, replay_dir;
  } run_opt;
  run_cmd->add_option("--config", run_opt.config, "Run config JSON file")->required();
  run_cmd->add_option("--out", run_opt.out, "Run output directory")->required();
  auto* run_rec = run_cmd->add_option("--record", run_opt.record_dir,
                                      "Record oracle exchanges, overriding the config");
  auto* run_rep = run_cmd->add_option("--replay", run_opt.replay_dir,
                                      "Replay oracle exchanges, overriding the config");
  run_rec->excludes(run_rep);
  run_rep->excludes(run_rec);
  run_cmd->callback([&] {
    json cfg = parse_json_file(run_opt.config, "run config");
    if (!run_opt.replay_dir.empty() || !run_opt.record_dir.empty()) {
      json oracle_cfg = cfg.value("oracle", json::object());
      if (!run_opt.replay_dir.empty()) {
        oracle_cfg["transcript"] = {{"mode", "replay"}, {"dir", run_opt.replay_dir}};
      } else {
        oracle_cfg["transcript"] = {{"mode", "record"}, {"dir", run_opt.record_dir}};
      }
      cfg["oracle"] = std::move(oracle_cfg);
    }
    StringOut report;
    check(cdt_run_experiment(cfg.dump().c_str(), run_opt.out.c_str(), nullptr, &report.p));
    std::cout << report.str() << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << json{{"error", {{"code", "usage"}, {"message", e.what()}}}}.dump() << "\n";
    return kUsageExit;
  } catch (const CliFailure& f) {
    std::cerr << json{{"error", {{"code", f.code}, {"message", f.message}}}}.dump() << "\n";
    return f.exit_code == 0 ? 1 : f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"code", "internal"}, {"message", e.what()}}}}.dump() << "\n";
    return CDT_ERR_INTERNAL;
  }
  return 0;
}
