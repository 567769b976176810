#include "cdt/evaluate.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "cdt/error.hpp"
#include "cdt/prompts.hpp"

namespace cdt {

using nlohmann::json;

const char* to_string(EvalDimension d) {
  switch (d) {
    case EvalDimension::initiative:
      return "initiative";
    case EvalDimension::scope:
      return "scope";
    case EvalDimension::magnitude:
      return "magnitude";
    case EvalDimension::horizon:
      return "horizon";
  }
  return "?";
}

std::optional<EvalDimension> eval_dimension_from_string(const std::string& s) {
  if (s == "initiative") return EvalDimension::initiative;
  if (s == "scope") return EvalDimension::scope;
  if (s == "magnitude") return EvalDimension::magnitude;
  if (s == "horizon") return EvalDimension::horizon;
  return std::nullopt;
}

const char* to_string(GroupBy g) {
  switch (g) {
    case GroupBy::group:
      return "group";
    case GroupBy::domain:
      return "domain";
    case GroupBy::method:
      return "method";
  }
  return "?";
}

std::optional<GroupBy> group_by_from_string(const std::string& s) {
  if (s == "group") return GroupBy::group;
  if (s == "domain") return GroupBy::domain;
  if (s == "method") return GroupBy::method;
  return std::nullopt;
}

namespace {

std::string lowercased(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Earliest verdict token wins, so a verdict sentence that mentions another
// label in passing still parses by its leading word.
std::optional<std::string> parse_verdict(const std::string& text) {
  std::string low = lowercased(text);
  std::size_t best_pos = std::string::npos;
  std::string best;
  for (const auto& [token, verdict] :
       {std::pair<const char*, const char*>{"entail", "entails"},
        std::pair<const char*, const char*>{"contradict", "contradicts"},
        std::pair<const char*, const char*>{"neutral", "neutral"}}) {
    auto pos = low.find(token);
    if (pos != std::string::npos && pos < best_pos) {
      best_pos = pos;
      best = verdict;
    }
  }
  if (best_pos == std::string::npos) return std::nullopt;
  return best;
}

std::string judge_text(Oracle& oracle, const std::string& prompt, int max_tokens) {
  GenerationRequest req;
  req.prompt = prompt;
  req.role = "judge";
  req.max_tokens = max_tokens;
  return oracle.generate(req).text;
}

std::string retried(const std::string& prompt) {
  return prompt + "\n\n" + prompts::strict_retry_suffix();
}

std::optional<DimensionScore> parse_dimension(const std::string& text, const std::string& field) {
  if (auto j = extract_json(text); j && j->is_object() && j->contains(field) &&
                                   (*j)[field].is_string()) {
    std::string v = lowercased((*j)[field].get<std::string>());
    DimensionScore out;
    if (j->contains("reason") && (*j)["reason"].is_string())
      out.rationale = (*j)["reason"].get<std::string>();
    if (v == "match") {
      out.score = 100;
      return out;
    }
    if (v == "mismatch") {
      out.score = 0;
      return out;
    }
    return std::nullopt;
  }
  // No usable JSON: fall back to the bare words. "mismatch" is checked first
  // because it contains "match".
  std::string low = lowercased(text);
  if (low.find("mismatch") != std::string::npos) return DimensionScore{0, ""};
  if (low.find("match") != std::string::npos) return DimensionScore{100, ""};
  return std::nullopt;
}

}  // namespace

std::pair<int, std::string> score_consistency(const std::string& context,
                                              const std::string& reference,
                                              const std::string& prediction, Oracle& oracle) {
  std::string prompt = prompts::consistency_eval(context, reference, prediction);
  auto verdict = parse_verdict(judge_text(oracle, prompt, 16));
  if (!verdict) verdict = parse_verdict(judge_text(oracle, retried(prompt), 16));
  if (!verdict)
    fail(ErrorKind::oracle_protocol, "entailment verdict unparseable after retry");
  if (*verdict == "entails") return {100, *verdict};
  if (*verdict == "contradicts") return {0, *verdict};
  return {50, *verdict};
}

DimensionScore score_dimension(EvalDimension dim, const std::string& group,
                               const std::string& context, const std::string& reference,
                               const std::string& prediction, Oracle& oracle) {
  const std::string field = to_string(dim);
  std::string prompt = prompts::dimension_eval(field, group, context, prediction, reference);
  auto score = parse_dimension(judge_text(oracle, prompt, 256), field);
  if (!score) score = parse_dimension(judge_text(oracle, retried(prompt), 256), field);
  if (!score)
    fail(ErrorKind::oracle_protocol,
         std::string(to_string(dim)) + " verdict unparseable after retry");
  return *score;
}

EvaluationRecord evaluate_prediction(const Observation& obs, const std::string& prediction,
                                     const std::string& method, Oracle& oracle) {
  EvaluationRecord r;
  r.observation_id = obs.id;
  r.group = obs.group;
  r.domain = obs.domain;
  r.method = method;
  r.prediction = prediction;
  auto [score, verdict] = score_consistency(obs.context, obs.decision, prediction, oracle);
  r.consistency = score;
  r.consistency_verdict = verdict;
  r.initiative =
      score_dimension(EvalDimension::initiative, obs.group, obs.context, obs.decision, prediction,
                      oracle);
  r.scope = score_dimension(EvalDimension::scope, obs.group, obs.context, obs.decision, prediction,
                            oracle);
  r.magnitude = score_dimension(EvalDimension::magnitude, obs.group, obs.context, obs.decision,
                                prediction, oracle);
  r.horizon = score_dimension(EvalDimension::horizon, obs.group, obs.context, obs.decision,
                              prediction, oracle);
  return r;
}

json record_to_json(const EvaluationRecord& r) {
  return json{{"observation_id", r.observation_id},
              {"group", r.group},
              {"domain", r.domain},
              {"method", r.method},
              {"prediction", r.prediction},
              {"consistency", r.consistency},
              {"consistency_verdict", r.consistency_verdict},
              {"initiative", json{{"score", r.initiative.score}, {"reason", r.initiative.rationale}}},
              {"scope", json{{"score", r.scope.score}, {"reason", r.scope.rationale}}},
              {"magnitude", json{{"score", r.magnitude.score}, {"reason", r.magnitude.rationale}}},
              {"horizon", json{{"score", r.horizon.score}, {"reason", r.horizon.rationale}}}};
}

EvaluationRecord record_from_json(const json& j) {
  EvaluationRecord r;
  r.observation_id = j.at("observation_id").get<std::string>();
  r.group = j.at("group").get<std::string>();
  r.domain = j.at("domain").get<std::string>();
  r.method = j.at("method").get<std::string>();
  r.prediction = j.at("prediction").get<std::string>();
  r.consistency = j.at("consistency").get<int>();
  r.consistency_verdict = j.at("consistency_verdict").get<std::string>();
  auto dim = [&](const char* name) {
    DimensionScore d;
    d.score = j.at(name).at("score").get<int>();
    d.rationale = j.at(name).at("reason").get<std::string>();
    return d;
  };
  r.initiative = dim("initiative");
  r.scope = dim("scope");
  r.magnitude = dim("magnitude");
  r.horizon = dim("horizon");
  return r;
}

namespace {

struct Sums {
  std::size_t n = 0;
  double consistency = 0.0, initiative = 0.0, scope = 0.0, magnitude = 0.0, horizon = 0.0;

  void add(const EvaluationRecord& r) {
    ++n;
    consistency += r.consistency;
    initiative += r.initiative.score;
    scope += r.scope.score;
    magnitude += r.magnitude.score;
    horizon += r.horizon.score;
  }

  AggregateRow mean(const std::string& key) const {
    AggregateRow row;
    row.key = key;
    row.records = n;
    double dn = static_cast<double>(n);
    row.consistency = consistency / dn;
    row.initiative = initiative / dn;
    row.scope = scope / dn;
    row.magnitude = magnitude / dn;
    row.horizon = horizon / dn;
    row.overall = (row.consistency + row.initiative + row.scope + row.magnitude + row.horizon) / 5.0;
    return row;
  }
};

}  // namespace

AggregateTable aggregate(const std::vector<EvaluationRecord>& records, GroupBy by) {
  if (records.empty()) fail(ErrorKind::invalid_argument, "nothing to aggregate");

  auto key_of = [&](const EvaluationRecord& r) -> const std::string& {
    switch (by) {
      case GroupBy::group:
        return r.group;
      case GroupBy::domain:
        return r.domain;
      case GroupBy::method:
        return r.method;
    }
    return r.group;
  };

  std::map<std::string, Sums> buckets;
  Sums total;
  for (const auto& r : records) {
    buckets[key_of(r)].add(r);
    total.add(r);
  }

  AggregateTable table;
  table.group_by = by;
  AggregateRow acc;
  for (const auto& [key, sums] : buckets) {
    AggregateRow row = sums.mean(key);
    acc.consistency += row.consistency;
    acc.initiative += row.initiative;
    acc.scope += row.scope;
    acc.magnitude += row.magnitude;
    acc.horizon += row.horizon;
    table.rows.push_back(std::move(row));
  }

  table.overall_weighted = total.mean("overall_weighted");
  double k = static_cast<double>(table.rows.size());
  table.overall_unweighted.key = "overall_unweighted";
  table.overall_unweighted.records = records.size();
  table.overall_unweighted.consistency = acc.consistency / k;
  table.overall_unweighted.initiative = acc.initiative / k;
  table.overall_unweighted.scope = acc.scope / k;
  table.overall_unweighted.magnitude = acc.magnitude / k;
  table.overall_unweighted.horizon = acc.horizon / k;
  table.overall_unweighted.overall =
      (table.overall_unweighted.consistency + table.overall_unweighted.initiative +
       table.overall_unweighted.scope + table.overall_unweighted.magnitude +
       table.overall_unweighted.horizon) /
      5.0;
  return table;
}

std::string aggregate_to_csv(const AggregateTable& table) {
  auto esc = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += "\"\"";
      else out += c;
    }
    out += "\"";
    return out;
  };
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  os << to_string(table.group_by)
     << ",records,consistency,initiative,scope,magnitude,horizon,overall\n";
  auto line = [&](const AggregateRow& r) {
    os << esc(r.key) << "," << r.records << "," << r.consistency << "," << r.initiative << ","
       << r.scope << "," << r.magnitude << "," << r.horizon << "," << r.overall << "\n";
  };
  for (const auto& r : table.rows) line(r);
  line(table.overall_weighted);
  line(table.overall_unweighted);
  return os.str();
}

}  // namespace cdt
