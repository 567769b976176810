#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdt/model.hpp"
#include "cdt/oracle.hpp"

namespace cdt {

struct GateActivation {
  std::string gate_id;
  std::string question;
  GateAnswer answer = GateAnswer::unknown;
};

struct CollectedStatement {
  std::string id;
  std::string text;
};

// Everything one prediction saw on its way through the tree: every gate it
// judged (with the answer), every node it entered, and the statements it
// picked up, in collection order and without duplicates.
struct TraversalTrace {
  std::vector<GateActivation> gates;
  std::vector<std::string> reached_node_ids;
  std::vector<CollectedStatement> statements;
  std::string background;
};

// Top-down, non-exclusive walk: root statements are always collected, a Yes
// answer opens a child subtree, No and Unknown both skip it, and several
// siblings may open at once. Gates below a skipped subtree are never judged.
TraversalTrace traverse(const Cdt& tree, const std::string& context, Oracle& oracle,
                        std::size_t background_cap = 4000);

// Renders the satisfied gate conditions, then the collected statements, one
// line each in trace order. Output beyond `cap` characters is cut with a
// logged warning.
std::string assemble_background(const TraversalTrace& trace, std::size_t cap = 4000);

nlohmann::json trace_to_json(const TraversalTrace& trace);

// Traversal followed by one generation call over the assembled background.
// An empty question falls back to asking what the group does next. Trees
// with no statements at all drop to the plain context-only prompt.
std::string predict(const Cdt& tree, const std::string& context, const std::string& question,
                    Oracle& oracle, TraversalTrace* trace_out = nullptr);

enum class BaselineKind { vanilla, human_profile, summarization, rag };

const char* to_string(BaselineKind k);
std::optional<BaselineKind> baseline_kind_from_string(const std::string& s);

struct BaselineConfig {
  std::string profile_text;  // required by human_profile
  int rag_k = 8;
  int summary_block = 40;  // scene-action pairs folded per profile pass
  // Optional cross-call cache for summarization profiles, keyed by group.
  std::map<std::string, std::string>* profile_cache = nullptr;
};

// Reference predictors the tree is compared against. None of them touch a
// tree: they work from the raw corpus (or a supplied profile) alone.
std::string baseline_predict(BaselineKind kind, const std::vector<Observation>& corpus,
                             const std::string& group, const std::string& context,
                             const std::string& question, Oracle& oracle,
                             const BaselineConfig& config = {});

}  // namespace cdt
