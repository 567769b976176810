#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cdt/model.hpp"
#include "cdt/oracle.hpp"

namespace cdt {

enum class EvalDimension { initiative, scope, magnitude, horizon };

const char* to_string(EvalDimension d);
std::optional<EvalDimension> eval_dimension_from_string(const std::string& s);

struct DimensionScore {
  int score = 0;  // 100 on match, 0 on mismatch
  std::string rationale;
};

// One scored prediction. Consistency is graded 100/50/0 by entailment against
// the reference decision; the four strategic dimensions are 100/0.
struct EvaluationRecord {
  std::string observation_id;
  std::string group;
  std::string domain;
  std::string method;  // which predictor produced the text
  std::string prediction;
  int consistency = 0;
  std::string consistency_verdict;  // entails / neutral / contradicts
  DimensionScore initiative;
  DimensionScore scope;
  DimensionScore magnitude;
  DimensionScore horizon;
};

nlohmann::json record_to_json(const EvaluationRecord& r);
EvaluationRecord record_from_json(const nlohmann::json& j);

// Entailment grade for a prediction given the reference decision:
// entails 100, neutral 50, contradicts 0. Returns the score with the judge's
// verdict word.
std::pair<int, std::string> score_consistency(const std::string& context,
                                              const std::string& reference,
                                              const std::string& prediction, Oracle& oracle);

// Match/mismatch grade on one strategic dimension, rationale included.
DimensionScore score_dimension(EvalDimension dim, const std::string& group,
                               const std::string& context, const std::string& reference,
                               const std::string& prediction, Oracle& oracle);

// All five grades for one prediction against its source observation.
EvaluationRecord evaluate_prediction(const Observation& obs, const std::string& prediction,
                                     const std::string& method, Oracle& oracle);

enum class GroupBy { group, domain, method };

const char* to_string(GroupBy g);
std::optional<GroupBy> group_by_from_string(const std::string& s);

struct AggregateRow {
  std::string key;
  std::size_t records = 0;
  double consistency = 0.0;
  double initiative = 0.0;
  double scope = 0.0;
  double magnitude = 0.0;
  double horizon = 0.0;
  double overall = 0.0;  // mean of the five dimension means
};

// Mean scores per key, plus two overall rows: one averaging every record
// (weighted by record count) and one averaging the per-key means, since a
// summary table can reasonably want either reading.
struct AggregateTable {
  GroupBy group_by = GroupBy::group;
  std::vector<AggregateRow> rows;  // sorted by key
  AggregateRow overall_weighted;
  AggregateRow overall_unweighted;
};

AggregateTable aggregate(const std::vector<EvaluationRecord>& records, GroupBy by);

std::string aggregate_to_csv(const AggregateTable& table);

}  // namespace cdt
