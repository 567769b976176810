#include "cdt/model.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "cdt/error.hpp"

namespace cdt {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::data: return "data";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
    case ErrorKind::schema: return "schema";
    case ErrorKind::oracle_transport: return "oracle_transport";
    case ErrorKind::oracle_protocol: return "oracle_protocol";
    case ErrorKind::missing_transcript: return "missing_transcript";
    case ErrorKind::internal: return "internal";
  }
  return "unknown";
}

const char* to_string(Source s) {
  switch (s) {
    case Source::wikipedia: return "wikipedia";
    case Source::techcrunch: return "techcrunch";
    case Source::synthetic: return "synthetic";
  }
  return "synthetic";
}

const char* to_string(EvidenceLabel l) {
  switch (l) {
    case EvidenceLabel::sup: return "sup";
    case EvidenceLabel::con: return "con";
    case EvidenceLabel::irr: return "irr";
  }
  return "irr";
}

const char* to_string(StatementOrigin o) {
  switch (o) {
    case StatementOrigin::constructed: return "constructed";
    case StatementOrigin::adapted_add: return "adapted_add";
    case StatementOrigin::demoted: return "demoted";
    case StatementOrigin::transferred: return "transferred";
  }
  return "constructed";
}

std::optional<Source> source_from_string(const std::string& s) {
  if (s == "wikipedia") return Source::wikipedia;
  if (s == "techcrunch") return Source::techcrunch;
  if (s == "synthetic") return Source::synthetic;
  return std::nullopt;
}

std::optional<EvidenceLabel> evidence_label_from_string(const std::string& s) {
  if (s == "sup") return EvidenceLabel::sup;
  if (s == "con") return EvidenceLabel::con;
  if (s == "irr") return EvidenceLabel::irr;
  return std::nullopt;
}

std::optional<StatementOrigin> statement_origin_from_string(const std::string& s) {
  if (s == "constructed") return StatementOrigin::constructed;
  if (s == "adapted_add") return StatementOrigin::adapted_add;
  if (s == "demoted") return StatementOrigin::demoted;
  if (s == "transferred") return StatementOrigin::transferred;
  return std::nullopt;
}

std::optional<std::size_t> GroundingMatrix::event_row(const std::string& event_id) const {
  for (std::size_t i = 0; i < event_ids.size(); ++i) {
    if (event_ids[i] == event_id) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> GroundingMatrix::statement_col(const std::string& statement_id) const {
  for (std::size_t j = 0; j < statement_ids.size(); ++j) {
    if (statement_ids[j] == statement_id) return j;
  }
  return std::nullopt;
}

void HyperParams::validate() const {
  std::vector<std::string> bad;
  if (d_max < 1) bad.push_back("d_max must be >= 1");
  if (rounds_r < 1) bad.push_back("rounds_r must be >= 1");
  if (per_centroid_m < 1) bad.push_back("per_centroid_m must be >= 1");
  if (hypotheses_k < 1) bad.push_back("hypotheses_k must be >= 1");
  if (!(tau_accept_keep > 0.0 && tau_accept_keep <= 1.0))
    bad.push_back("tau_accept_keep must be in (0, 1]");
  if (!(tau_reject_delete >= 0.0 && tau_reject_delete < tau_accept_keep))
    bad.push_back("tau_reject_delete must satisfy 0 <= tau_reject_delete < tau_accept_keep");
  if (!(tau_filter > 0.0 && tau_filter <= 1.0))
    bad.push_back("tau_filter must be in (0, 1]");
  if (tau_min < 1) bad.push_back("tau_min must be >= 1");
  if (min_node_size < 1) bad.push_back("min_node_size must be >= 1");
  if (candidates_c < 1) bad.push_back("candidates_c must be >= 1");
  if (voting_rounds < 1) bad.push_back("voting_rounds must be >= 1");
  if (bss_top_n < 1) bad.push_back("bss_top_n must be >= 1");
  if (!(bss_context_tau >= -1.0 && bss_context_tau <= 1.0))
    bad.push_back("bss_context_tau must be in [-1, 1]");
  if (!bad.empty()) {
    std::ostringstream os;
    os << "invalid hyperparameters:";
    for (const auto& b : bad) os << " " << b << ";";
    fail(ErrorKind::config, os.str());
  }
}

std::vector<Observation> sort_chronologically(std::vector<Observation> corpus) {
  if (!corpus.empty()) {
    const std::string& g = corpus.front().group;
    for (const auto& obs : corpus) {
      if (obs.group != g) {
        fail(ErrorKind::invalid_argument,
             "sort_chronologically: mixed groups \"" + g + "\" and \"" + obs.group + "\"");
      }
    }
  }
  std::stable_sort(corpus.begin(), corpus.end(), [](const Observation& a, const Observation& b) {
    if (a.order_key != b.order_key) return a.order_key < b.order_key;
    return a.id < b.id;
  });
  return corpus;
}

void for_each_node(CdtNode& node, const std::function<void(CdtNode&)>& fn) {
  fn(node);
  for (auto& [gate, child] : node.children) {
    (void)gate;
    for_each_node(child, fn);
  }
}

void for_each_node(const CdtNode& node, const std::function<void(const CdtNode&)>& fn) {
  fn(node);
  for (const auto& [gate, child] : node.children) {
    (void)gate;
    for_each_node(child, fn);
  }
}

CdtNode* find_node(CdtNode& root, const std::string& node_id) {
  if (root.id == node_id) return &root;
  for (auto& [gate, child] : root.children) {
    (void)gate;
    if (CdtNode* hit = find_node(child, node_id)) return hit;
  }
  return nullptr;
}

const CdtNode* find_node(const CdtNode& root, const std::string& node_id) {
  return find_node(const_cast<CdtNode&>(root), node_id);
}

const Statement* find_statement(const Cdt& tree, const std::string& statement_id) {
  const Statement* found = nullptr;
  for_each_node(tree.root, [&](const CdtNode& n) {
    for (const auto& s : n.statements) {
      if (s.id == statement_id) found = &s;
    }
  });
  return found;
}

std::size_t count_statements(const Cdt& tree) {
  std::size_t n = 0;
  for_each_node(tree.root, [&](const CdtNode& node) { n += node.statements.size(); });
  return n;
}

void insert_routed_id(std::vector<std::string>& ids, const std::string& id) {
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) ids.insert(it, id);
}

bool contains_id(const std::vector<std::string>& ids, const std::string& id) {
  return std::binary_search(ids.begin(), ids.end(), id);
}

namespace {

void check_node(const CdtNode& node, const CdtNode* parent, const HyperParams& hp,
                std::set<std::string>& node_ids, std::set<std::string>& statement_ids,
                std::set<std::string>& gate_ids, std::vector<std::string>& out) {
  auto complain = [&](const std::string& what) {
    out.push_back("node " + (node.id.empty() ? std::string("<unnamed>") : node.id) + ": " + what);
  };

  if (node.id.empty()) complain("empty node id");
  if (!node_ids.insert(node.id).second) complain("duplicate node id");

  if (parent == nullptr) {
    if (node.depth != 0) complain("root depth must be 0");
  } else if (node.depth != parent->depth + 1) {
    complain("depth " + std::to_string(node.depth) + " != parent depth + 1");
  }
  if (node.depth > hp.d_max) {
    complain("depth " + std::to_string(node.depth) + " exceeds d_max " + std::to_string(hp.d_max));
  }

  if (!std::is_sorted(node.routed_event_ids.begin(), node.routed_event_ids.end()))
    complain("routed_event_ids not sorted");
  if (std::adjacent_find(node.routed_event_ids.begin(), node.routed_event_ids.end()) !=
      node.routed_event_ids.end())
    complain("routed_event_ids contains duplicates");
  if (parent != nullptr) {
    for (const auto& id : node.routed_event_ids) {
      if (!contains_id(parent->routed_event_ids, id)) {
        complain("routed event " + id + " not routed to parent");
        break;
      }
    }
  }

  for (const auto& s : node.statements) {
    if (s.text.empty()) complain("statement " + s.id + " has empty text");
    if (s.id.empty()) complain("statement with empty id");
    else if (!statement_ids.insert(s.id).second) complain("duplicate statement id " + s.id);
  }

  const GroundingMatrix& m = node.grounding;
  if (!m.statement_ids.empty() || !m.event_ids.empty() || !m.labels.empty()) {
    if (m.node_id != node.id) complain("grounding matrix node_id mismatch");
    if (m.labels.size() != m.event_ids.size()) complain("grounding row count mismatch");
    for (const auto& row : m.labels) {
      if (row.size() != m.statement_ids.size()) {
        complain("grounding column count mismatch");
        break;
      }
    }
    std::set<std::string> node_statement_ids;
    for (const auto& s : node.statements) node_statement_ids.insert(s.id);
    for (const auto& sid : m.statement_ids) {
      if (!node_statement_ids.count(sid)) complain("grounding references foreign statement " + sid);
    }
    for (const auto& eid : m.event_ids) {
      if (!contains_id(node.routed_event_ids, eid)) {
        complain("grounding references unrouted event " + eid);
        break;
      }
    }
    std::set<std::string> seen_rows(m.event_ids.begin(), m.event_ids.end());
    if (seen_rows.size() != m.event_ids.size()) complain("grounding has duplicate event rows");
  } else if (!node.statements.empty() && !node.routed_event_ids.empty()) {
    // A statement-bearing node with routed evidence is expected to carry a matrix.
    complain("missing grounding matrix for statement-bearing node");
  }

  for (const auto& [gate, child] : node.children) {
    if (gate.question.empty()) complain("gate " + gate.id + " has empty question");
    if (gate.id.empty()) complain("gate with empty id");
    else if (!gate_ids.insert(gate.id).second) complain("duplicate gate id " + gate.id);
    check_node(child, &node, hp, node_ids, statement_ids, gate_ids, out);
  }
}

}  // namespace

std::vector<std::string> validate_tree(const Cdt& tree) {
  std::vector<std::string> out;
  std::set<std::string> node_ids, statement_ids, gate_ids;
  check_node(tree.root, nullptr, tree.hyperparams, node_ids, statement_ids, gate_ids, out);

  int last_seq = 0;
  for (std::size_t i = 0; i < tree.provenance_log.size(); ++i) {
    const auto& ev = tree.provenance_log[i];
    if (i > 0 && ev.seq <= last_seq) {
      out.push_back("provenance event " + std::to_string(i) + ": seq not strictly increasing");
    }
    last_seq = ev.seq;
  }
  return out;
}

IdAllocator IdAllocator::scan(const Cdt& tree) {
  IdAllocator alloc;
  auto bump = [](const std::string& id, char prefix, std::int64_t& counter) {
    if (id.size() < 2 || id[0] != prefix) return;
    std::int64_t v = 0;
    for (std::size_t i = 1; i < id.size(); ++i) {
      if (id[i] < '0' || id[i] > '9') return;
      v = v * 10 + (id[i] - '0');
    }
    if (v + 1 > counter) counter = v + 1;
  };
  for_each_node(tree.root, [&](const CdtNode& node) {
    bump(node.id, 'n', alloc.next_node_);
    for (const auto& s : node.statements) bump(s.id, 's', alloc.next_statement_);
    for (const auto& [gate, child] : node.children) {
      (void)child;
      bump(gate.id, 'g', alloc.next_gate_);
    }
  });
  return alloc;
}

}  // namespace cdt
