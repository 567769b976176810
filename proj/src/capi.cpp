#include "cdt_c.h"

#include <cstdlib>
#include <cstring>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cdt/adapt.hpp"
#include "cdt/analyze.hpp"
#include "cdt/bench.hpp"
#include "cdt/construct.hpp"
#include "cdt/error.hpp"
#include "cdt/evaluate.hpp"
#include "cdt/infer.hpp"
#include "cdt/model.hpp"
#include "cdt/oracle.hpp"
#include "cdt/serde.hpp"

using nlohmann::json;

struct cdt_corpus {
  cdt::IngestResult data;
  std::vector<std::string> group_names;  // sorted, mirrors data.by_group keys
};

struct cdt_tree {
  cdt::Cdt tree;
};

struct cdt_oracle {
  std::shared_ptr<cdt::CountingOracle> counting;
};

namespace {

thread_local std::string g_last_error;

cdt_status status_from(cdt::ErrorKind kind) {
  switch (kind) {
    case cdt::ErrorKind::invalid_argument: return CDT_ERR_INVALID_ARGUMENT;
    case cdt::ErrorKind::data: return CDT_ERR_DATA;
    case cdt::ErrorKind::config: return CDT_ERR_CONFIG;
    case cdt::ErrorKind::io: return CDT_ERR_IO;
    case cdt::ErrorKind::schema: return CDT_ERR_UNSUPPORTED_SCHEMA;
    case cdt::ErrorKind::oracle_transport: return CDT_ERR_ORACLE_TRANSPORT;
    case cdt::ErrorKind::oracle_protocol: return CDT_ERR_ORACLE_PROTOCOL;
    case cdt::ErrorKind::missing_transcript: return CDT_ERR_MISSING_TRANSCRIPT;
    case cdt::ErrorKind::internal: return CDT_ERR_INTERNAL;
  }
  return CDT_ERR_INTERNAL;
}

// Runs the body and funnels every exception into a status code plus the
// thread-local message. Bodies assign their outputs last, so a throw leaves
// the caller's pointers untouched.
template <typename Fn>
cdt_status guarded(Fn&& body) {
  try {
    body();
    g_last_error.clear();
    return CDT_OK;
  } catch (const cdt::Error& e) {
    g_last_error = e.what();
    return status_from(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CDT_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CDT_ERR_INTERNAL;
  }
}

cdt_status arg_error(const std::string& message) {
  g_last_error = message;
  return CDT_ERR_INVALID_ARGUMENT;
}

// Heap copy handed across the C boundary; released by cdt_string_free.
char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Owns a pending output string until the body reaches its assignment step.
struct OwnedCStr {
  char* p = nullptr;
  explicit OwnedCStr(const std::string& s) : p(dup_string(s)) {}
  OwnedCStr(const OwnedCStr&) = delete;
  OwnedCStr& operator=(const OwnedCStr&) = delete;
  ~OwnedCStr() { std::free(p); }
  char* release() {
    char* out = p;
    p = nullptr;
    return out;
  }
};

json parse_json_arg(const char* text, const std::string& what) {
  if (text == nullptr || *text == '\0') return json::object();
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) cdt::fail(cdt::ErrorKind::config, what + " is not valid JSON");
  if (!j.is_object()) cdt::fail(cdt::ErrorKind::config, what + " must be a JSON object");
  return j;
}

const std::vector<cdt::Observation>& group_events(const cdt_corpus& c, const char* group) {
  if (group == nullptr || *group == '\0') {
    cdt::fail(cdt::ErrorKind::invalid_argument, "group name is empty");
  }
  auto it = c.data.by_group.find(group);
  if (it == c.data.by_group.end()) {
    cdt::fail(cdt::ErrorKind::data, "group \"" + std::string(group) + "\" not found in corpus");
  }
  return it->second;
}

cdt::HyperParams hyperparams_from_options(const json& options) {
  return cdt::hyperparams_from_json(options.value("hyperparams", json::object()));
}

// Adaptation defaults to the tree's own thresholds unless overridden.
cdt::HyperParams hyperparams_or_tree_defaults(const json& options, const cdt::Cdt& tree) {
  if (options.contains("hyperparams")) {
    return cdt::hyperparams_from_json(options.at("hyperparams"));
  }
  return tree.hyperparams;
}

json matched_pairs_to_json(const std::vector<cdt::MatchedPair>& pairs) {
  json arr = json::array();
  for (const auto& p : pairs) {
    arr.push_back({{"event_a", p.event_a},
                   {"event_b", p.event_b},
                   {"context_cosine", p.context_cosine},
                   {"action_cosine", p.action_cosine}});
  }
  return arr;
}

}  // namespace

extern "C" {

const char* cdt_last_error(void) { return g_last_error.c_str(); }

void cdt_string_free(char* s) { std::free(s); }
void cdt_corpus_free(cdt_corpus* c) { delete c; }
void cdt_tree_free(cdt_tree* t) { delete t; }
void cdt_oracle_free(cdt_oracle* o) { delete o; }

/* ---- corpus ----------------------------------------------------------- */

cdt_status cdt_corpus_load(const char* jsonl_path, cdt_corpus** out) {
  if (jsonl_path == nullptr) return arg_error("jsonl_path is null");
  if (out == nullptr) return arg_error("output pointer is null");
  return guarded([&] {
    auto handle = std::make_unique<cdt_corpus>();
    handle->data = cdt::ingest(jsonl_path);
    for (const auto& [name, events] : handle->data.by_group) {
      (void)events;
      handle->group_names.push_back(name);
    }
    *out = handle.release();
  });
}

cdt_status cdt_corpus_group_count(const cdt_corpus* c, size_t* out) {
  if (c == nullptr) return arg_error("corpus handle is null");
  if (out == nullptr) return arg_error("output pointer is null");
  *out = c->group_names.size();
  g_last_error.clear();
  return CDT_OK;
}

cdt_status cdt_corpus_group_name(const cdt_corpus* c, size_t index, char** out) {
  if (c == nullptr) return arg_error("corpus handle is null");
  if (out == nullptr) return arg_error("output pointer is null");
  if (index >= c->group_names.size()) return arg_error("group index out of range");
  return guarded([&] { *out = dup_string(c->group_names[index]); });
}

cdt_status cdt_corpus_group_size(const cdt_corpus* c, const char* group, size_t* out) {
  if (c == nullptr) return arg_error("corpus handle is null");
  if (out == nullptr) return arg_error("output pointer is null");
  return guarded([&] { *out = group_events(*c, group).size(); });
}

cdt_status cdt_corpus_errors_json(const cdt_corpus* c, char** out) {
  if (c == nullptr) return arg_error("corpus handle is null");
  if (out == nullptr) return arg_error("output pointer is null");
  return guarded([&] {
    json arr = json::array();
    for (const auto& e : c->data.errors) {
      arr.push_back({{"line", e.line}, {"message", e.message}});
    }
    *out = dup_string(arr.dump(2));
  });
}

cdt_status cdt_corpus_observations_json(const cdt_corpus* c, const char* group, char** out) {
  if (c == nullptr) return arg_error("corpus handle is null");
  if (out == nullptr) return arg_error("output pointer is null");
  return guarded([&] {
    std::vector<cdt::Observation> events =
        cdt::sort_chronologically(group_events(*c, group));
    json arr = json::array();
    for (const auto& o : events) arr.push_back(cdt::observation_to_json(o));
    *out = dup_string(arr.dump(2));
  });
}

/* ---- oracle ----------------------------------------------------------- */

cdt_status cdt_oracle_create(const char* config_json, cdt_oracle** out) {
  if (out == nullptr) return arg_error("output pointer is null");
  return guarded([&] {
    json config = parse_json_arg(config_json, "oracle config");
    auto inner = cdt::make_oracle(config);
    auto handle = std::make_unique<cdt_oracle>();
    handle->counting = std::make_shared<cdt::CountingOracle>(std::move(inner));
    *out = handle.release();
  });
}

cdt_status cdt_oracle_counts_json(const cdt_oracle* o, char** out) {
  if (o == nullptr) return arg_error("oracle handle is null");
  if (out == nullptr) return arg_error("output pointer is null");
  return guarded([&] {
    cdt::OracleCallCounts n = o->counting->counts();
    json j = {{"generate", n.generate},
              {"judge_gate", n.judge_gate},
              {"relate_batch", n.relate_batch},
              {"embed", n.embed}};
    *out = dup_string(j.dump(2));
  });
}

/* ---- trees ------------------------------------------------------------ */

cdt_status cdt_tree_load(const char* path, cdt_tree** out) {
  if (path == nullptr) return arg_error("path is null");
  if (out == nullptr) return arg_error("output pointer is null");
  return guarded([&] {
    auto handle = std::make_unique<cdt_tree>();
    handle->tree = cdt::load_tree(path);
    *out = handle.release();
  });
}

cdt_status cdt_tree_save(const cdt_tree* t, const char* path) {
  if (t == nullptr) return arg_error("tree handle is null");
  if (path == nullptr) return arg_error("path is null");
  return guarded([&] { cdt::save_tree(t->tree, path); });
}

cdt_status cdt_tree_to_json(const cdt_tree* t, char** out) {
  if (t == nullptr) return arg_error("tree handle is null");
  if (out == nullptr) return arg_error("output pointer is null");
  return guarded([&] { *out = dup_string(cdt::serialize_tree(t->tree)); });
}

cdt_status cdt_tree_from_json(const char* json_text, cdt_tree** out) {
  if (json_text == nullptr) return arg_error("json_text is null");
  if (out == nullptr) return arg_error("output pointer is null");
  return guarded([&] {
    auto handle = std::make_unique<cdt_tree>();
    handle->tree = cdt::deserialize_tree(json_text);
    *out = handle.release();
  });
}

cdt_status cdt_tree_to_dot(const cdt_tree* t, char** out) {
  if (t == nullptr) return arg_error("tree handle is null");
  if (out == nullptr) return arg_error("output pointer is null");
  return guarded([&] { *out = dup_string(cdt::tree_to_dot(t->tree)); });
}

cdt_status cdt_tree_outline(const cdt_tree* t, char** out) {
  if (t == nullptr) return arg_error("tree handle is null");
  if (out == nullptr) return arg_error("output pointer is null");
  return guarded([&] { *out = dup_string(cdt::render_tree_outline(t->tree)); });
}

cdt_status cdt_tree_validate(const cdt_tree* t, char** out) {
  if (t == nullptr) return arg_error("tree handle is null");
  if (out == nullptr) return arg_error("output pointer is null");
  return guarded([&] {
    json arr = json::array();
    for (const auto& problem : cdt::validate_tree(t->tree)) arr.push_back(problem);
    *out = dup_string(arr.dump(2));
  });
}

cdt_status cdt_tree_group(const cdt_tree* t, char** out) {
  if (t == nullptr) return arg_error("tree handle is null");
  if (out == nullptr) return arg_error("output pointer is null");
  return guarded([&] { *out = dup_string(t->tree.group); });
}

cdt_status cdt_tree_statement_count(const cdt_tree* t, size_t* out) {
  if (t == nullptr) return arg_error("tree handle is null");
  if (out == nullptr) return arg_error("output pointer is null");
  *out = cdt::count_statements(t->tree);
  g_last_error.clear();
  return CDT_OK;
}

/* ---- pipelines -------------------------------------------------------- */

cdt_status cdt_build(const cdt_corpus* corpus, const char* group, const char* options_json,
                     cdt_oracle* oracle, cdt_tree** out) {
  if (corpus == nullptr) return arg_error("corpus handle is null");
  if (oracle == nullptr) return arg_error("oracle handle is null");
  if (out == nullptr) return arg_error("output pointer is null");
  return guarded([&] {
    json options = parse_json_arg(options_json, "build options");
    cdt::HyperParams hp = hyperparams_from_options(options);
    cdt::BuildOptions opts;
    opts.seed = options.value("seed", opts.seed);
    opts.timestamp = options.value("timestamp", opts.timestamp);
    opts.n_target = options.value("n_target", opts.n_target);
    opts.n_upper = options.value("n_upper", opts.n_upper);
    const auto& events = group_events(*corpus, group);
    auto handle = std::make_unique<cdt_tree>();
    handle->tree = cdt::build_tree_with_selection(events, group, hp, *oracle->counting, opts);
    *out = handle.release();
  });
}

cdt_status cdt_adapt(const cdt_tree* tree, const cdt_corpus* corpus, const char* group,
                     const char* options_json, cdt_oracle* oracle, cdt_tree** out_tree,
                     char** out_report_json) {
  if (tree == nullptr) return arg_error("tree handle is null");
  if (corpus == nullptr) return arg_error("corpus handle is null");
  if (oracle == nullptr) return arg_error("oracle handle is null");
  if (out_tree == nullptr || out_report_json == nullptr) {
    return arg_error("output pointer is null");
  }
  return guarded([&] {
    const char* effective_group = (group == nullptr || *group == '\0')
                                      ? tree->tree.group.c_str()
                                      : group;
    const auto& events = group_events(*corpus, effective_group);
    std::vector<cdt::Observation> history;
    std::vector<cdt::Observation> arrivals;
    for (const auto& o : events) {
      if (cdt::contains_id(tree->tree.root.routed_event_ids, o.id)) {
        history.push_back(o);
      } else {
        arrivals.push_back(o);
      }
    }
    if (arrivals.empty()) {
      cdt::fail(cdt::ErrorKind::data,
                "no new observations for group \"" + std::string(effective_group) +
                    "\"; every id in the corpus is already part of the tree");
    }
    json options = parse_json_arg(options_json, "adapt options");
    cdt::HyperParams hp = hyperparams_or_tree_defaults(options, tree->tree);
    cdt::AdaptOptions opts;
    opts.timestamp = options.value("timestamp", opts.timestamp);
    auto [adapted, report] =
        cdt::adapt_tree(tree->tree, arrivals, history, *oracle->counting, hp, opts);
    auto handle = std::make_unique<cdt_tree>();
    handle->tree = std::move(adapted);
    OwnedCStr report_text(cdt::adapt_report_to_json(report).dump(2));
    *out_tree = handle.release();
    *out_report_json = report_text.release();
  });
}

cdt_status cdt_transfer(const cdt_tree* tree, const cdt_corpus* corpus,
                        const char* target_group, const char* options_json,
                        cdt_oracle* oracle, cdt_tree** out_tree, char** out_report_json) {
  if (tree == nullptr) return arg_error("tree handle is null");
  if (corpus == nullptr) return arg_error("corpus handle is null");
  if (oracle == nullptr) return arg_error("oracle handle is null");
  if (out_tree == nullptr || out_report_json == nullptr) {
    return arg_error("output pointer is null");
  }
  return guarded([&] {
    const auto& events = group_events(*corpus, target_group);
    json options = parse_json_arg(options_json, "transfer options");
    cdt::HyperParams hp = hyperparams_or_tree_defaults(options, tree->tree);
    cdt::AdaptOptions opts;
    opts.timestamp = options.value("timestamp", opts.timestamp);
    auto [transferred, report] =
        cdt::transfer_tree(tree->tree, target_group, events, *oracle->counting, hp, opts);
    auto handle = std::make_unique<cdt_tree>();
    handle->tree = std::move(transferred);
    OwnedCStr report_text(cdt::adapt_report_to_json(report).dump(2));
    *out_tree = handle.release();
    *out_report_json = report_text.release();
  });
}

cdt_status cdt_predict(const cdt_tree* tree, const char* context, const char* question,
                       cdt_oracle* oracle, char** out_prediction, char** out_trace_json) {
  if (tree == nullptr) return arg_error("tree handle is null");
  if (context == nullptr) return arg_error("context is null");
  if (oracle == nullptr) return arg_error("oracle handle is null");
  if (out_prediction == nullptr) return arg_error("output pointer is null");
  return guarded([&] {
    cdt::TraversalTrace trace;
    std::string prediction = cdt::predict(tree->tree, context, question ? question : "",
                                          *oracle->counting, &trace);
    OwnedCStr prediction_text(prediction);
    if (out_trace_json != nullptr) {
      OwnedCStr trace_text(cdt::trace_to_json(trace).dump(2));
      *out_trace_json = trace_text.release();
    }
    *out_prediction = prediction_text.release();
  });
}

cdt_status cdt_baseline_predict(const cdt_corpus* corpus, const char* group, const char* kind,
                                const char* context, const char* question,
                                const char* options_json, cdt_oracle* oracle, char** out) {
  if (kind == nullptr) return arg_error("baseline kind is null");
  if (context == nullptr) return arg_error("context is null");
  if (oracle == nullptr) return arg_error("oracle handle is null");
  if (out == nullptr) return arg_error("output pointer is null");
  return guarded([&] {
    auto parsed_kind = cdt::baseline_kind_from_string(kind);
    if (!parsed_kind) {
      cdt::fail(cdt::ErrorKind::invalid_argument,
                "unknown baseline kind: \"" + std::string(kind) + "\"");
    }
    std::string group_name = group ? group : "";
    static const std::vector<cdt::Observation> kNoEvents;
    const std::vector<cdt::Observation>* events = &kNoEvents;
    if (corpus != nullptr && !group_name.empty() &&
        corpus->data.by_group.count(group_name) > 0) {
      events = &corpus->data.by_group.at(group_name);
    }
    json options = parse_json_arg(options_json, "baseline options");
    cdt::BaselineConfig config;
    config.profile_text = options.value("profile_text", config.profile_text);
    config.rag_k = options.value("rag_k", config.rag_k);
    config.summary_block = options.value("summary_block", config.summary_block);
    std::string prediction =
        cdt::baseline_predict(*parsed_kind, *events, group_name, context,
                              question ? question : "", *oracle->counting, config);
    *out = dup_string(prediction);
  });
}

cdt_status cdt_evaluate_prediction(const char* observation_json, const char* prediction,
                                   const char* method, cdt_oracle* oracle,
                                   char** out_record_json) {
  if (observation_json == nullptr) return arg_error("observation_json is null");
  if (prediction == nullptr) return arg_error("prediction is null");
  if (oracle == nullptr) return arg_error("oracle handle is null");
  if (out_record_json == nullptr) return arg_error("output pointer is null");
  return guarded([&] {
    json doc = json::parse(observation_json, nullptr, false);
    if (doc.is_discarded()) {
      cdt::fail(cdt::ErrorKind::data, "observation is not valid JSON");
    }
    cdt::Observation obs = cdt::observation_from_json(doc);
    cdt::EvaluationRecord record = cdt::evaluate_prediction(
        obs, prediction, method ? method : "", *oracle->counting);
    *out_record_json = dup_string(cdt::record_to_json(record).dump(2));
  });
}

/* ---- analysis --------------------------------------------------------- */

cdt_status cdt_analyze_drift(const cdt_corpus* corpus, const char* group,
                             const char* options_json, cdt_oracle* oracle, char** out_json) {
  if (corpus == nullptr) return arg_error("corpus handle is null");
  if (oracle == nullptr) return arg_error("oracle handle is null");
  if (out_json == nullptr) return arg_error("output pointer is null");
  return guarded([&] {
    const auto& events = group_events(*corpus, group);
    json options = parse_json_arg(options_json, "drift options");
    cdt::BssOptions opt;
    opt.tau = options.value("tau", opt.tau);
    opt.top_n = options.value("top_n", opt.top_n);
    cdt::DriftResult r = cdt::drift_test(group, events, *oracle->counting, opt);
    json j = {{"group", r.group},       {"within", r.within},
              {"cross", r.cross},       {"u", r.u},
              {"p_value", r.p_value},   {"significant", r.significant}};
    *out_json = dup_string(j.dump(2));
  });
}

cdt_status cdt_analyze_similarity(const cdt_corpus* corpus, const char* mode,
                                  const char* spec_json, cdt_oracle* oracle,
                                  char** out_csv, char** out_json) {
  if (mode == nullptr) return arg_error("mode is null");
  if (oracle == nullptr) return arg_error("oracle handle is null");
  if (out_csv == nullptr) return arg_error("output pointer is null");
  return guarded([&] {
    cdt::SimilarityMode parsed_mode = cdt::similarity_mode_from_string(mode);
    json spec = parse_json_arg(spec_json, "similarity spec");
    cdt::BssOptions opt;
    opt.tau = spec.value("tau", opt.tau);
    opt.top_n = spec.value("top_n", opt.top_n);

    std::vector<cdt::SimilarityInput> inputs;
    std::vector<cdt::Cdt> tree_storage;  // keeps SimilarityInput pointers alive
    if (parsed_mode == cdt::SimilarityMode::bss) {
      if (corpus == nullptr) {
        cdt::fail(cdt::ErrorKind::invalid_argument,
                  "behavioral similarity needs a loaded corpus");
      }
      std::vector<std::string> names;
      if (spec.contains("groups")) {
        for (const auto& g : spec.at("groups")) names.push_back(g.get<std::string>());
      } else {
        names = corpus->group_names;
      }
      if (names.size() < 2) {
        cdt::fail(cdt::ErrorKind::data, "similarity needs at least two groups");
      }
      for (const auto& name : names) {
        cdt::SimilarityInput input;
        input.name = name;
        input.events = group_events(*corpus, name.c_str());
        inputs.push_back(std::move(input));
      }
    } else {
      if (!spec.contains("trees") || !spec.at("trees").is_array() ||
          spec.at("trees").size() < 2) {
        cdt::fail(cdt::ErrorKind::config,
                  "tree-distance modes need a \"trees\" list with at least two entries");
      }
      tree_storage.reserve(spec.at("trees").size());
      for (const auto& entry : spec.at("trees")) {
        std::string path = entry.value("path", "");
        if (path.empty()) {
          cdt::fail(cdt::ErrorKind::config, "every tree entry needs a \"path\"");
        }
        tree_storage.push_back(cdt::load_tree(path));
        cdt::SimilarityInput input;
        input.name = entry.value("name", tree_storage.back().group);
        input.tree = &tree_storage.back();
        inputs.push_back(std::move(input));
      }
    }

    cdt::SimilarityMatrix m =
        cdt::similarity_matrix(inputs, parsed_mode, *oracle->counting, opt);
    OwnedCStr csv_text(cdt::similarity_to_csv(m));
    if (out_json != nullptr) {
      json cells = json::array();
      for (const auto& row : m.cells) {
        json r = json::array();
        for (const auto& cell : row) {
          if (cell) r.push_back(*cell); else r.push_back(nullptr);
        }
        cells.push_back(std::move(r));
      }
      json evidence = json::array();
      for (const auto& e : m.evidence) {
        evidence.push_back({{"name_a", e.name_a},
                            {"name_b", e.name_b},
                            {"pairs", matched_pairs_to_json(e.pairs)}});
      }
      json j = {{"mode", cdt::to_string(parsed_mode)},
                {"names", m.names},
                {"cells", std::move(cells)},
                {"errors", m.errors},
                {"evidence", std::move(evidence)}};
      OwnedCStr json_text(j.dump(2));
      *out_json = json_text.release();
    }
    *out_csv = csv_text.release();
  });
}

/* ---- experiment harness ----------------------------------------------- */

cdt_status cdt_run_experiment(const char* config_json, const char* out_dir,
                              cdt_oracle* oracle, char** out_report_json) {
  if (config_json == nullptr) return arg_error("config_json is null");
  if (out_dir == nullptr || *out_dir == '\0') return arg_error("out_dir is empty");
  if (out_report_json == nullptr) return arg_error("output pointer is null");
  return guarded([&] {
    json doc = json::parse(config_json, nullptr, false);
    if (doc.is_discarded()) {
      cdt::fail(cdt::ErrorKind::config, "run config is not valid JSON");
    }
    cdt::RunConfig cfg = cdt::run_config_from_json(doc);
    std::shared_ptr<cdt::CountingOracle> local;
    cdt::Oracle* active = nullptr;
    if (oracle != nullptr) {
      active = oracle->counting.get();
    } else {
      local = std::make_shared<cdt::CountingOracle>(cdt::make_oracle(cfg.oracle));
      active = local.get();
    }
    cdt::RunReport report = cdt::run_experiment(cfg, *active, out_dir);
    json cells = json::array();
    for (const auto& cell : report.cells) {
      cells.push_back({{"group", cell.group},
                       {"method", cell.method},
                       {"ok", cell.ok},
                       {"error", cell.error},
                       {"predictions", cell.predictions}});
    }
    json j = {{"dir", report.dir}, {"cells", std::move(cells)}};
    *out_report_json = dup_string(j.dump(2));
  });
}

}  // extern "C"
