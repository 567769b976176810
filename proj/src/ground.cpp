#include "cdt/ground.hpp"

#include <algorithm>
#include <map>

#include "cdt/error.hpp"

namespace cdt {

namespace {

void require_unique(const std::vector<std::string>& ids, const char* what) {
  std::vector<std::string> sorted = ids;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    fail(ErrorKind::invalid_argument, std::string("duplicate ") + what + " in matrix input");
  }
}

}  // namespace

GroundingMatrix compute_matrix(const std::string& node_id, const std::string& group,
                               const std::vector<Observation>& events,
                               const std::vector<Statement>& statements, Oracle& oracle) {
  if (statements.empty()) {
    fail(ErrorKind::invalid_argument, "compute_matrix requires at least one statement");
  }
  GroundingMatrix m;
  m.node_id = node_id;
  for (const auto& s : statements) m.statement_ids.push_back(s.id);
  require_unique(m.statement_ids, "statement id");
  for (const auto& e : events) m.event_ids.push_back(e.id);
  require_unique(m.event_ids, "event id");
  for (const auto& e : events) {
    m.labels.push_back(oracle.relate_batch(group, e.decision, statements));
  }
  return m;
}

void extend_matrix(GroundingMatrix& m, const std::string& group,
                   const std::vector<Observation>& new_events,
                   const std::vector<Statement>& new_statements,
                   const std::vector<Observation>& old_events,
                   const std::vector<Statement>& old_statements, Oracle& oracle) {
  for (const auto& e : new_events) {
    if (m.event_row(e.id)) {
      fail(ErrorKind::invalid_argument, "extend_matrix: event already present: " + e.id);
    }
  }
  for (const auto& s : new_statements) {
    if (m.statement_col(s.id)) {
      fail(ErrorKind::invalid_argument, "extend_matrix: statement already present: " + s.id);
    }
  }

  // Column extension first: each existing row gets labels for the new
  // statements only, so no old cell is ever re-queried.
  if (!new_statements.empty() && !m.event_ids.empty()) {
    std::map<std::string, const Observation*> events_by_id;
    for (const auto& e : old_events) events_by_id[e.id] = &e;
    for (std::size_t row = 0; row < m.event_ids.size(); ++row) {
      auto it = events_by_id.find(m.event_ids[row]);
      if (it == events_by_id.end()) {
        fail(ErrorKind::invalid_argument,
             "extend_matrix: no observation provided for existing row " + m.event_ids[row]);
      }
      std::vector<EvidenceLabel> fresh =
          oracle.relate_batch(group, it->second->decision, new_statements);
      for (EvidenceLabel l : fresh) m.labels[row].push_back(l);
    }
  }

  // Row extension: one call per new event against the full post-extension
  // statement set, assembled in column order.
  if (!new_events.empty()) {
    std::map<std::string, const Statement*> stmts_by_id;
    for (const auto& s : old_statements) stmts_by_id[s.id] = &s;
    std::vector<Statement> all_stmts;
    for (const auto& sid : m.statement_ids) {
      auto it = stmts_by_id.find(sid);
      if (it == stmts_by_id.end()) {
        fail(ErrorKind::invalid_argument,
             "extend_matrix: no statement text provided for existing column " + sid);
      }
      all_stmts.push_back(*it->second);
    }
    for (const auto& s : new_statements) all_stmts.push_back(s);
    if (all_stmts.empty()) {
      fail(ErrorKind::invalid_argument,
           "extend_matrix: cannot add events to a matrix with no statement columns");
    }
    for (const auto& e : new_events) {
      m.labels.push_back(oracle.relate_batch(group, e.decision, all_stmts));
      m.event_ids.push_back(e.id);
    }
  }

  for (const auto& s : new_statements) m.statement_ids.push_back(s.id);
  // New rows above already carry labels for the new columns because the batch
  // covered the full set; only the bookkeeping order differs.
}

StatementStats stats_for(const GroundingMatrix& m, const std::string& statement_id) {
  auto col = m.statement_col(statement_id);
  if (!col) {
    fail(ErrorKind::invalid_argument, "stats_for: unknown statement " + statement_id);
  }
  StatementStats stats;
  for (const auto& row : m.labels) {
    switch (row[*col]) {
      case EvidenceLabel::sup: ++stats.n_sup; break;
      case EvidenceLabel::con: ++stats.n_con; break;
      case EvidenceLabel::irr: ++stats.n_irr; break;
    }
  }
  return stats;
}

std::vector<std::string> uncovered_events(const GroundingMatrix& m,
                                          const std::vector<std::string>& surviving_statement_ids) {
  std::vector<std::size_t> cols;
  for (const auto& sid : surviving_statement_ids) {
    auto col = m.statement_col(sid);
    if (!col) fail(ErrorKind::invalid_argument, "uncovered_events: unknown statement " + sid);
    cols.push_back(*col);
  }
  std::vector<std::string> out;
  for (std::size_t row = 0; row < m.event_ids.size(); ++row) {
    bool covered = false;
    for (std::size_t col : cols) {
      if (m.labels[row][col] == EvidenceLabel::sup) {
        covered = true;
        break;
      }
    }
    if (!covered) out.push_back(m.event_ids[row]);
  }
  return out;
}

}  // namespace cdt
