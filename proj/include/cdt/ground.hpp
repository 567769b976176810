#pragma once

#include <string>
#include <vector>

#include "cdt/model.hpp"
#include "cdt/oracle.hpp"

namespace cdt {

// Builds the evidence matrix for one node from scratch. One batched relation
// call per event, covering every statement. Rows follow the given event order,
// columns the given statement order. Requires at least one statement.
GroundingMatrix compute_matrix(const std::string& node_id, const std::string& group,
                               const std::vector<Observation>& events,
                               const std::vector<Statement>& statements, Oracle& oracle);

// Grows an existing matrix by new rows (events) and/or new columns
// (statements). Existing cells are never relabeled: fresh labels are fetched
// only for the new row/column/corner region. old_events and old_statements
// must cover every existing row and column (lookup is by id); each existing
// row costs one call over the new statements, each new row one call over the
// full post-extension statement set.
void extend_matrix(GroundingMatrix& m, const std::string& group,
                   const std::vector<Observation>& new_events,
                   const std::vector<Statement>& new_statements,
                   const std::vector<Observation>& old_events,
                   const std::vector<Statement>& old_statements, Oracle& oracle);

// Tallies one statement's column.
StatementStats stats_for(const GroundingMatrix& m, const std::string& statement_id);

// Event ids whose row has no supporting label among the surviving statement
// columns, in row order. Events the matrix has never seen are not reported.
std::vector<std::string> uncovered_events(const GroundingMatrix& m,
                                          const std::vector<std::string>& surviving_statement_ids);

}  // namespace cdt
