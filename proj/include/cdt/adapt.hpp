#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cdt/model.hpp"
#include "cdt/oracle.hpp"

namespace cdt {

// What happens to a statement when its evidence is re-read after new
// observations arrive. `remove` drops it outright; `demote` sends it through
// the push-down machinery, which may still end in deletion.
enum class StatementFate { keep, keep_insufficient, remove, demote };

const char* to_string(StatementFate f);

// Pure threshold logic over one statement's evidence tallies. Too little
// sup/con evidence parks the statement instead of judging it.
StatementFate classify_statement(const StatementStats& stats, const HyperParams& hp);

struct StatementOutcome {
  std::string statement_id;
  std::string text;
  std::optional<double> p;  // precision at decision time; empty when undefined
  std::int64_t n = 0;       // sup + con evidence behind the decision
  std::string detail;       // e.g. destination node for pushed-down statements
};

// One processed node. A statement that existed before the run lands in
// exactly one of the first four buckets; statements that arrived mid-run
// (pushed down from the parent) are reported at the parent, not here.
struct NodeReport {
  std::string node_id;
  std::vector<StatementOutcome> kept;
  std::vector<StatementOutcome> kept_insufficient;
  std::vector<StatementOutcome> deleted;
  std::vector<StatementOutcome> demoted;
  std::vector<StatementOutcome> added;
  std::vector<std::string> new_children;
};

struct AdaptReport {
  std::vector<NodeReport> nodes;  // pre-order over the pre-existing tree
  OracleCallCounts oracle_calls;
};

nlohmann::json adapt_report_to_json(const AdaptReport& report);

struct AdaptOptions {
  std::string timestamp;        // stamped on provenance entries; empty is fine
  std::string phase = "adapt";  // provenance phase tag
};

// Folds a batch of new observations into an existing tree: evidence rows are
// extended, every statement is re-classified, borderline ones are pushed into
// subtrees or deleted, and uncovered events can seed fresh statements.
// `history` must supply the observation texts behind the tree's existing
// evidence rows (adaptation needs them to score fresh statement candidates
// against old events); it may be empty only if the tree holds no events.
// The input tree is not modified.
std::pair<Cdt, AdaptReport> adapt_tree(const Cdt& tree, const std::vector<Observation>& d_new,
                                       const std::vector<Observation>& history, Oracle& oracle,
                                       const HyperParams& hp, const AdaptOptions& opts = {});

// Re-targets a tree at a different group: statements are kept as candidate
// structure but all event-level evidence is reset, then the target corpus is
// folded in through the same adaptation pass. Statements the target corpus
// never reaches stay parked with empty evidence.
std::pair<Cdt, AdaptReport> transfer_tree(const Cdt& source, const std::string& target_group,
                                          const std::vector<Observation>& target_corpus,
                                          Oracle& oracle, const HyperParams& hp,
                                          const AdaptOptions& opts = {});

}  // namespace cdt
