#include "cdt/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>

#include "cdt/adapt.hpp"
#include "cdt/analyze.hpp"
#include "cdt/construct.hpp"
#include "cdt/error.hpp"
#include "cdt/evaluate.hpp"
#include "cdt/infer.hpp"
#include "cdt/log.hpp"
#include "cdt/rng.hpp"
#include "cdt/serde.hpp"

namespace fs = std::filesystem;

namespace cdt {

using nlohmann::json;

IngestResult ingest(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open observation file: " + path);

  IngestResult res;
  std::map<std::string, std::size_t> first_line;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      res.errors.push_back({lineno, "invalid JSON"});
      continue;
    }
    std::optional<Observation> obs;
    try {
      obs = observation_from_json(j);
    } catch (const Error& e) {
      res.errors.push_back({lineno, e.what()});
      continue;
    }
    auto [it, inserted] = first_line.emplace(obs->id, lineno);
    if (!inserted)
      fail(ErrorKind::data, "duplicate observation id '" + obs->id + "' (lines " +
                                std::to_string(it->second) + " and " + std::to_string(lineno) +
                                ")");
    res.by_group[obs->group].push_back(std::move(*obs));
  }
  for (const auto& [group, events] : res.by_group) {
    if (events.size() < 100)
      log_warn("group '" + group + "' has only " + std::to_string(events.size()) +
               " context-decision pairs");
  }
  return res;
}

namespace {

std::size_t train_count(std::size_t n, double f) {
  if (n < 2) fail(ErrorKind::data, "need at least 2 observations to split");
  if (!(f > 0.0) || f > 1.0)
    fail(ErrorKind::config, "train fraction must be in (0, 1]");
  auto train = static_cast<std::size_t>(std::ceil(f * static_cast<double>(n)));
  if (train >= n) {
    log_warn("train fraction " + std::to_string(f) + " leaves no test data over " +
             std::to_string(n) + " events; keeping one for test");
    train = n - 1;
  }
  if (train < 1) train = 1;
  return train;
}

}  // namespace

Split chronological_split(const std::vector<Observation>& corpus, double train_fraction) {
  std::vector<Observation> sorted = sort_chronologically(corpus);
  std::size_t train = train_count(sorted.size(), train_fraction);
  Split s;
  for (std::size_t i = 0; i < sorted.size(); ++i)
    (i < train ? s.train_ids : s.test_ids).push_back(sorted[i].id);
  return s;
}

std::array<std::vector<Observation>, 3> three_phase_split(
    const std::vector<Observation>& corpus) {
  std::vector<Observation> sorted = sort_chronologically(corpus);
  std::size_t n = sorted.size();
  if (n < 3) fail(ErrorKind::data, "three phases need at least 3 observations");
  std::size_t q = n / 3, r = n % 3;
  std::array<std::size_t, 3> sizes = {q + (r > 0 ? 1 : 0), q + (r > 1 ? 1 : 0), q};
  std::array<std::vector<Observation>, 3> phases;
  std::size_t at = 0;
  for (int p = 0; p < 3; ++p) {
    phases[p].assign(sorted.begin() + static_cast<std::ptrdiff_t>(at),
                     sorted.begin() + static_cast<std::ptrdiff_t>(at + sizes[p]));
    at += sizes[p];
  }
  return phases;
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  c.data_path = j.value("data", "");
  c.plan = j.value("plan", "main");
  c.groups = j.value("groups", std::vector<std::string>{});
  c.methods = j.value("methods", std::vector<std::string>{});
  c.source_group = j.value("source_group", "");
  c.train_fraction = j.value("train_fraction", 0.7);
  c.seed = j.value("seed", std::uint64_t{0});
  c.timestamp = j.value("timestamp", "");
  if (j.contains("hyperparams")) c.hp = hyperparams_from_json(j.at("hyperparams"));
  if (j.contains("profiles")) {
    if (!j.at("profiles").is_object())
      fail(ErrorKind::config, "profiles must map group names to profile texts");
    for (const auto& [k, v] : j.at("profiles").items()) c.profiles[k] = v.get<std::string>();
  }
  if (j.contains("oracle")) c.oracle = j.at("oracle");
  return c;
}

json run_config_to_json(const RunConfig& cfg) {
  return json{{"data", cfg.data_path},
              {"plan", cfg.plan},
              {"groups", cfg.groups},
              {"methods", cfg.methods},
              {"source_group", cfg.source_group},
              {"train_fraction", cfg.train_fraction},
              {"seed", cfg.seed},
              {"timestamp", cfg.timestamp},
              {"hyperparams", hyperparams_to_json(cfg.hp)},
              {"profiles", cfg.profiles},
              {"oracle", cfg.oracle}};
}

namespace {

const std::vector<std::string>& default_methods(const std::string& plan) {
  static const std::vector<std::string> main_methods = {"cdt", "vanilla", "summarization", "rag"};
  static const std::vector<std::string> temporal_methods = {"fixed", "retrained", "adapted"};
  static const std::vector<std::string> transfer_methods = {"vanilla", "target_cdt", "transfer"};
  if (plan == "temporal") return temporal_methods;
  if (plan == "transfer") return transfer_methods;
  return main_methods;
}

const std::set<std::string>& allowed_methods(const std::string& plan) {
  static const std::set<std::string> main_methods = {"cdt", "vanilla", "human_profile",
                                                     "summarization", "rag"};
  static const std::set<std::string> temporal_methods = {"fixed", "retrained", "adapted"};
  static const std::set<std::string> transfer_methods = {"vanilla", "target_cdt", "transfer"};
  if (plan == "temporal") return temporal_methods;
  if (plan == "transfer") return transfer_methods;
  return main_methods;
}

std::string safe_name(const std::string& s) {
  std::string out;
  for (char c : s) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
              c == '.' || c == '_' || c == '-';
    out += ok ? c : '_';
  }
  return out.empty() ? "_" : out;
}

std::string wall_time() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

struct RunState {
  const RunConfig& cfg;
  Oracle& oracle;
  std::string dir;
  RunReport report;
  std::vector<EvaluationRecord> records;
  std::map<std::string, std::string> profile_cache;  // summarization profiles per group
};

using Predictor = std::function<std::string(const Observation&, json& trace)>;

// One (group, method) cell: predict and grade the whole eval set, then write
// both JSONL files. Everything inside is guarded by the caller.
std::size_t predict_and_grade(RunState& st, const std::string& group_dir,
                              const std::string& method,
                              const std::vector<Observation>& eval_set,
                              const Predictor& predictor) {
  std::ostringstream pred_lines, eval_lines;
  std::vector<EvaluationRecord> local;
  for (const auto& obs : eval_set) {
    json trace = nullptr;
    std::string text = predictor(obs, trace);
    pred_lines << json{{"observation_id", obs.id},
                       {"group", obs.group},
                       {"method", method},
                       {"prediction", text},
                       {"trace", trace}}
                      .dump()
               << "\n";
    EvaluationRecord r = evaluate_prediction(obs, text, method, st.oracle);
    eval_lines << record_to_json(r).dump() << "\n";
    local.push_back(std::move(r));
  }
  write_text_file(group_dir + "/predictions_" + method + ".jsonl", pred_lines.str());
  write_text_file(group_dir + "/evaluations_" + method + ".jsonl", eval_lines.str());
  for (auto& r : local) st.records.push_back(std::move(r));
  return eval_set.size();
}

void run_cell(RunState& st, const std::string& group, const std::string& method,
              const std::function<std::size_t()>& body) {
  CellResult cell;
  cell.group = group;
  cell.method = method;
  try {
    cell.predictions = body();
  } catch (const Error& e) {
    cell.ok = false;
    cell.error = e.what();
    log_warn("cell " + group + "/" + method + " failed: " + cell.error);
  } catch (const std::exception& e) {
    cell.ok = false;
    cell.error = std::string("unexpected: ") + e.what();
    log_warn("cell " + group + "/" + method + " failed: " + cell.error);
  }
  st.report.cells.push_back(std::move(cell));
}

Predictor tree_predictor(RunState& st, const Cdt& tree) {
  return [&st, &tree](const Observation& obs, json& trace) {
    TraversalTrace t;
    std::string text = predict(tree, obs.context, obs.question, st.oracle, &t);
    trace = trace_to_json(t);
    return text;
  };
}

Predictor baseline_predictor(RunState& st, BaselineKind kind, const std::string& group,
                             const std::vector<Observation>& corpus) {
  return [&st, kind, group, &corpus](const Observation& obs, json&) {
    BaselineConfig bc;
    bc.profile_cache = &st.profile_cache;
    if (kind == BaselineKind::human_profile) {
      auto it = st.cfg.profiles.find(group);
      if (it == st.cfg.profiles.end())
        fail(ErrorKind::config, "no profile text configured for group '" + group + "'");
      bc.profile_text = it->second;
    }
    return baseline_predict(kind, corpus, group, obs.context, obs.question, st.oracle, bc);
  };
}

void run_main_plan(RunState& st, const std::vector<std::string>& groups,
                   const std::vector<std::string>& methods, const IngestResult& data) {
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const std::string& group = groups[gi];
    std::string gdir = st.dir + "/groups/" + safe_name(group);
    fs::create_directories(gdir);

    std::vector<Observation> sorted = sort_chronologically(data.by_group.at(group));
    std::size_t train_n = train_count(sorted.size(), st.cfg.train_fraction);
    std::vector<Observation> train(sorted.begin(),
                                   sorted.begin() + static_cast<std::ptrdiff_t>(train_n));
    std::vector<Observation> test(sorted.begin() + static_cast<std::ptrdiff_t>(train_n),
                                  sorted.end());
    std::uint64_t group_seed = mix_seed(st.cfg.seed, gi);

    std::optional<Cdt> tree;
    std::string tree_error;
    if (std::find(methods.begin(), methods.end(), "cdt") != methods.end()) {
      try {
        BuildOptions bo;
        bo.seed = mix_seed(group_seed, 1);
        bo.timestamp = st.cfg.timestamp;
        tree = build_tree_with_selection(train, group, st.cfg.hp, st.oracle, bo);
        save_tree(*tree, gdir + "/tree.json");
      } catch (const Error& e) {
        tree_error = e.what();
      }
    }

    for (const auto& method : methods) {
      run_cell(st, group, method, [&]() -> std::size_t {
        if (method == "cdt") {
          if (!tree) fail(ErrorKind::data, "tree build failed: " + tree_error);
          return predict_and_grade(st, gdir, method, test, tree_predictor(st, *tree));
        }
        auto kind = baseline_kind_from_string(method);
        if (!kind) fail(ErrorKind::config, "unknown method: " + method);
        return predict_and_grade(st, gdir, method, test,
                                 baseline_predictor(st, *kind, group, train));
      });
    }
  }
}

void run_temporal_plan(RunState& st, const std::vector<std::string>& groups,
                       const std::vector<std::string>& methods, const IngestResult& data) {
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const std::string& group = groups[gi];
    std::string gdir = st.dir + "/groups/" + safe_name(group);
    fs::create_directories(gdir);
    std::uint64_t group_seed = mix_seed(st.cfg.seed, gi);

    std::array<std::vector<Observation>, 3> phases;
    std::string phase_error;
    bool have_phases = false;
    try {
      phases = three_phase_split(data.by_group.at(group));
      have_phases = true;
    } catch (const Error& e) {
      phase_error = e.what();
    }

    std::optional<Cdt> base, retrained, adapted;
    std::string base_error, retrained_error, adapted_error;
    std::vector<Observation> eval_set;
    if (have_phases) {
      eval_set = phases[1];
      eval_set.insert(eval_set.end(), phases[2].begin(), phases[2].end());

      try {
        BuildOptions bo;
        bo.seed = mix_seed(group_seed, 1);
        bo.timestamp = st.cfg.timestamp;
        base = build_tree_with_selection(phases[0], group, st.cfg.hp, st.oracle, bo);
        save_tree(*base, gdir + "/tree_p1.json");
      } catch (const Error& e) {
        base_error = e.what();
      }

      if (std::find(methods.begin(), methods.end(), "retrained") != methods.end()) {
        try {
          std::vector<Observation> p12 = phases[0];
          p12.insert(p12.end(), phases[1].begin(), phases[1].end());
          BuildOptions bo;
          bo.seed = mix_seed(group_seed, 2);
          bo.timestamp = st.cfg.timestamp;
          retrained = build_tree_with_selection(p12, group, st.cfg.hp, st.oracle, bo);
          save_tree(*retrained, gdir + "/tree_retrained.json");
        } catch (const Error& e) {
          retrained_error = e.what();
        }
      }

      if (std::find(methods.begin(), methods.end(), "adapted") != methods.end()) {
        if (base) {
          try {
            AdaptOptions ao;
            ao.timestamp = st.cfg.timestamp;
            auto [t, rep] = adapt_tree(*base, phases[1], phases[0], st.oracle, st.cfg.hp, ao);
            adapted = std::move(t);
            save_tree(*adapted, gdir + "/tree_adapted.json");
            write_text_file(gdir + "/adapt_report.json",
                            adapt_report_to_json(rep).dump(2) + "\n");
          } catch (const Error& e) {
            adapted_error = e.what();
          }
        } else {
          adapted_error = "base tree build failed: " + base_error;
        }
      }
    } else {
      base_error = retrained_error = adapted_error = phase_error;
    }

    auto tree_for = [&](const std::string& method) -> std::pair<const Cdt*, std::string> {
      if (method == "fixed") return {base ? &*base : nullptr, base_error};
      if (method == "retrained") return {retrained ? &*retrained : nullptr, retrained_error};
      if (method == "adapted") return {adapted ? &*adapted : nullptr, adapted_error};
      return {nullptr, "unknown method: " + method};
    };

    for (const auto& method : methods) {
      run_cell(st, group, method, [&]() -> std::size_t {
        auto [tree, error] = tree_for(method);
        if (tree == nullptr) fail(ErrorKind::data, "tree unavailable: " + error);
        return predict_and_grade(st, gdir, method, eval_set, tree_predictor(st, *tree));
      });
    }
  }
}

void run_transfer_plan(RunState& st, const std::vector<std::string>& groups,
                       const std::vector<std::string>& methods, const IngestResult& data) {
  const std::string& source = st.cfg.source_group;
  if (source.empty())
    fail(ErrorKind::config, "transfer plan needs source_group in the run config");
  if (!data.by_group.count(source))
    fail(ErrorKind::config, "source group '" + source + "' is not in the data");

  std::string sdir = st.dir + "/groups/" + safe_name(source);
  fs::create_directories(sdir);
  std::optional<Cdt> source_tree;
  std::string source_error;
  run_cell(st, source, "source_cdt", [&]() -> std::size_t {
    BuildOptions bo;
    bo.seed = mix_seed(st.cfg.seed, 9001);
    bo.timestamp = st.cfg.timestamp;
    source_tree = build_tree_with_selection(sort_chronologically(data.by_group.at(source)),
                                            source, st.cfg.hp, st.oracle, bo);
    save_tree(*source_tree, sdir + "/tree_source.json");
    return 0;
  });
  if (!source_tree) {
    for (const auto& c : st.report.cells)
      if (c.group == source && c.method == "source_cdt") source_error = c.error;
  }

  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const std::string& group = groups[gi];
    if (group == source) continue;
    std::string gdir = st.dir + "/groups/" + safe_name(group);
    fs::create_directories(gdir);
    std::uint64_t group_seed = mix_seed(st.cfg.seed, gi);

    std::vector<Observation> sorted = sort_chronologically(data.by_group.at(group));
    std::size_t train_n = train_count(sorted.size(), st.cfg.train_fraction);
    std::vector<Observation> train(sorted.begin(),
                                   sorted.begin() + static_cast<std::ptrdiff_t>(train_n));
    std::vector<Observation> test(sorted.begin() + static_cast<std::ptrdiff_t>(train_n),
                                  sorted.end());

    for (const auto& method : methods) {
      run_cell(st, group, method, [&]() -> std::size_t {
        if (method == "vanilla") {
          return predict_and_grade(st, gdir, method, test,
                                   baseline_predictor(st, BaselineKind::vanilla, group, train));
        }
        if (method == "target_cdt") {
          BuildOptions bo;
          bo.seed = mix_seed(group_seed, 1);
          bo.timestamp = st.cfg.timestamp;
          Cdt tree = build_tree_with_selection(train, group, st.cfg.hp, st.oracle, bo);
          save_tree(tree, gdir + "/tree_target.json");
          return predict_and_grade(st, gdir, method, test, tree_predictor(st, tree));
        }
        if (method == "transfer") {
          if (!source_tree)
            fail(ErrorKind::data, "source tree unavailable: " + source_error);
          AdaptOptions ao;
          ao.timestamp = st.cfg.timestamp;
          auto [tree, rep] =
              transfer_tree(*source_tree, group, train, st.oracle, st.cfg.hp, ao);
          save_tree(tree, gdir + "/tree_transferred.json");
          write_text_file(gdir + "/transfer_report.json",
                          adapt_report_to_json(rep).dump(2) + "\n");
          return predict_and_grade(st, gdir, method, test, tree_predictor(st, tree));
        }
        fail(ErrorKind::config, "unknown method: " + method);
      });
    }
  }
}

void run_analysis(RunState& st, const std::vector<std::string>& groups,
                  const IngestResult& data) {
  BssOptions bo;
  bo.tau = st.cfg.hp.bss_context_tau;
  bo.top_n = static_cast<std::size_t>(st.cfg.hp.bss_top_n);

  for (const auto& group : groups) {
    const auto& events = data.by_group.at(group);
    if (events.size() < 6) continue;
    try {
      DriftResult d = drift_test(group, events, st.oracle, bo);
      json j{{"group", d.group},       {"within", d.within},
             {"cross", d.cross},       {"u", d.u},
             {"p_value", d.p_value},   {"significant", d.significant}};
      write_text_file(st.dir + "/groups/" + safe_name(group) + "/drift.json",
                      j.dump(2) + "\n");
    } catch (const Error& e) {
      log_warn("drift analysis for '" + group + "' skipped: " + std::string(e.what()));
    }
  }

  if (groups.size() >= 2) {
    try {
      std::vector<SimilarityInput> inputs;
      for (const auto& group : groups) {
        SimilarityInput in;
        in.name = group;
        in.events = sort_chronologically(data.by_group.at(group));
        inputs.push_back(std::move(in));
      }
      SimilarityMatrix m = similarity_matrix(inputs, SimilarityMode::bss, st.oracle, bo);
      fs::create_directories(st.dir + "/analysis");
      write_text_file(st.dir + "/analysis/similarity_bss.csv", similarity_to_csv(m));
    } catch (const Error& e) {
      log_warn("similarity analysis skipped: " + std::string(e.what()));
    }
  }
}

}  // namespace

RunReport run_experiment(const RunConfig& cfg, Oracle& oracle, const std::string& out_dir) {
  cfg.hp.validate();
  if (cfg.plan != "main" && cfg.plan != "temporal" && cfg.plan != "transfer")
    fail(ErrorKind::config, "unknown plan: " + cfg.plan);
  if (cfg.data_path.empty()) fail(ErrorKind::config, "run config names no data file");

  std::vector<std::string> methods = cfg.methods.empty() ? default_methods(cfg.plan) : cfg.methods;
  for (const auto& m : methods) {
    if (!allowed_methods(cfg.plan).count(m))
      fail(ErrorKind::config, "method '" + m + "' is not part of the " + cfg.plan + " plan");
  }

  fs::create_directories(out_dir);
  write_text_file(out_dir + "/config.json", run_config_to_json(cfg).dump(2) + "\n");
  std::string started = wall_time();
  auto t0 = std::chrono::steady_clock::now();

  IngestResult data = ingest(cfg.data_path);
  {
    json errs = json::array();
    for (const auto& e : data.errors)
      errs.push_back(json{{"line", e.line}, {"message", e.message}});
    write_text_file(out_dir + "/ingest_errors.json", errs.dump(2) + "\n");
  }

  std::vector<std::string> groups = cfg.groups;
  if (groups.empty()) {
    for (const auto& [g, _] : data.by_group) groups.push_back(g);
  } else {
    std::set<std::string> seen;
    for (const auto& g : groups) {
      if (!data.by_group.count(g))
        fail(ErrorKind::config, "group '" + g + "' is not in the data");
      if (!seen.insert(g).second)
        fail(ErrorKind::config, "group '" + g + "' is listed twice");
    }
  }

  RunState st{cfg, oracle, out_dir, {}, {}, {}};
  st.report.dir = out_dir;

  if (cfg.plan == "main") {
    run_main_plan(st, groups, methods, data);
  } else if (cfg.plan == "temporal") {
    run_temporal_plan(st, groups, methods, data);
  } else {
    run_transfer_plan(st, groups, methods, data);
  }

  run_analysis(st, groups, data);

  if (st.records.empty()) {
    write_text_file(out_dir + "/summary.csv",
                    "method,records,consistency,initiative,scope,magnitude,horizon,overall\n");
  } else {
    write_text_file(out_dir + "/summary.csv",
                    aggregate_to_csv(aggregate(st.records, GroupBy::method)));
  }

  {
    json errs = json::array();
    for (const auto& c : st.report.cells) {
      if (!c.ok) errs.push_back(json{{"group", c.group}, {"method", c.method}, {"error", c.error}});
    }
    write_text_file(out_dir + "/errors.json", errs.dump(2) + "\n");
  }

  auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json info{{"started", started},
            {"finished", wall_time()},
            {"elapsed_seconds", elapsed},
            {"plan", cfg.plan},
            {"groups", groups.size()},
            {"cells", st.report.cells.size()}};
  write_text_file(out_dir + "/run_info.json", info.dump(2) + "\n");

  return std::move(st.report);
}

}  // namespace cdt
