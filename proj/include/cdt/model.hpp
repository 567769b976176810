#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace cdt {

enum class Source { wikipedia, techcrunch, synthetic };

// Relation of one recorded decision to one behavioral statement.
enum class EvidenceLabel { sup, con, irr };

enum class StatementOrigin { constructed, adapted_add, demoted, transferred };

const char* to_string(Source s);
const char* to_string(EvidenceLabel l);
const char* to_string(StatementOrigin o);
std::optional<Source> source_from_string(const std::string& s);
std::optional<EvidenceLabel> evidence_label_from_string(const std::string& s);
std::optional<StatementOrigin> statement_origin_from_string(const std::string& s);

// One observed scene/decision pair for a group.
struct Observation {
  std::string id;
  std::string group;
  std::string domain;
  Source source = Source::synthetic;
  std::int64_t order_key = 0;
  std::string context;
  std::string decision;
  std::string question;
};

struct Statement {
  std::string id;
  std::string text;
  StatementOrigin origin = StatementOrigin::constructed;
  std::string created_at_phase;
};

struct Gate {
  std::string id;
  std::string question;  // yes/no scene condition
};

// Per-node evidence grid: rows are events routed to the node, columns are
// the node's statements. Cells are never relabeled once written.
struct GroundingMatrix {
  std::string node_id;
  std::vector<std::string> event_ids;
  std::vector<std::string> statement_ids;
  std::vector<std::vector<EvidenceLabel>> labels;  // labels[event][statement]

  bool empty() const { return event_ids.empty() || statement_ids.empty(); }
  std::optional<std::size_t> event_row(const std::string& event_id) const;
  std::optional<std::size_t> statement_col(const std::string& statement_id) const;
};

struct StatementStats {
  std::int64_t n_sup = 0;
  std::int64_t n_con = 0;
  std::int64_t n_irr = 0;

  std::int64_t effective_n() const { return n_sup + n_con; }
  // Undefined when no sup/con evidence exists; never coerced to 0 or 1.
  std::optional<double> precision() const {
    if (n_sup + n_con == 0) return std::nullopt;
    return static_cast<double>(n_sup) / static_cast<double>(n_sup + n_con);
  }
};

struct CdtNode {
  std::string id;
  int depth = 0;
  std::vector<Statement> statements;
  // Sorted, unique observation ids. Always a subset of the parent's set.
  std::vector<std::string> routed_event_ids;
  GroundingMatrix grounding;
  // Child order is creation order and is load-bearing for determinism.
  std::vector<std::pair<Gate, CdtNode>> children;
};

struct HyperParams {
  int d_max = 3;
  int rounds_r = 4;
  int per_centroid_m = 8;
  int hypotheses_k = 3;
  double tau_accept_keep = 0.65;
  double tau_reject_delete = 0.35;
  double tau_filter = 0.8;
  int tau_min = 3;
  int min_node_size = 8;
  int candidates_c = 3;
  int voting_rounds = 5;
  int bss_top_n = 20;
  double bss_context_tau = 0.7;

  // Throws a config error describing every violated bound.
  void validate() const;
};

struct ProvenanceEvent {
  int seq = 0;
  std::string timestamp;  // supplied by the orchestrator; empty in deterministic runs
  std::string phase;      // e.g. "build", "adapt"
  std::string op;
  std::string node_id;
  std::string statement_id;
  nlohmann::json details = nlohmann::json::object();
};

struct Cdt {
  std::string group;
  HyperParams hyperparams;
  CdtNode root;
  std::vector<ProvenanceEvent> provenance_log;
};

// Stable ascending order: order_key, then id as tiebreak. Rejects input
// spanning more than one group.
std::vector<Observation> sort_chronologically(std::vector<Observation> corpus);

// Structural checks over a whole tree. Returns one message per violation,
// empty when the tree is well formed.
std::vector<std::string> validate_tree(const Cdt& tree);

void for_each_node(CdtNode& node, const std::function<void(CdtNode&)>& fn);
void for_each_node(const CdtNode& node, const std::function<void(const CdtNode&)>& fn);
CdtNode* find_node(CdtNode& root, const std::string& node_id);
const CdtNode* find_node(const CdtNode& root, const std::string& node_id);
const Statement* find_statement(const Cdt& tree, const std::string& statement_id);
std::size_t count_statements(const Cdt& tree);

// Insert into a sorted unique id vector.
void insert_routed_id(std::vector<std::string>& ids, const std::string& id);
bool contains_id(const std::vector<std::string>& ids, const std::string& id);

// Fresh node/statement/gate ids. Scanning an existing tree resumes the
// counters past every id already in use, so adaptation never collides.
class IdAllocator {
 public:
  IdAllocator() = default;
  static IdAllocator scan(const Cdt& tree);

  std::string node_id() { return "n" + std::to_string(next_node_++); }
  std::string statement_id() { return "s" + std::to_string(next_statement_++); }
  std::string gate_id() { return "g" + std::to_string(next_gate_++); }

 private:
  std::int64_t next_node_ = 0;
  std::int64_t next_statement_ = 0;
  std::int64_t next_gate_ = 0;
};

}  // namespace cdt
