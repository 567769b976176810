#include "cdt/mock_oracle.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cdt/error.hpp"
#include "cdt/rng.hpp"

namespace cdt {

using nlohmann::json;

namespace {

std::uint64_t seed_from_text(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1 || len < 8) {
    fail(ErrorKind::internal, "SHA-256 digest failed");
  }
  std::uint64_t seed = 0;
  for (int i = 0; i < 8; ++i) seed = (seed << 8) | digest[i];
  return seed;
}

// Substring of `text` between `begin` and the earliest of `ends` (or EOF).
std::string section(const std::string& text, const std::string& begin,
                    const std::vector<std::string>& ends) {
  const std::size_t at = text.find(begin);
  if (at == std::string::npos) return "";
  const std::size_t from = at + begin.size();
  std::size_t to = text.size();
  for (const auto& end : ends) {
    const std::size_t hit = text.find(end, from);
    if (hit != std::string::npos && hit < to) to = hit;
  }
  return text.substr(from, to - from);
}

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
  if (needle.empty()) return 0;
  std::size_t n = 0;
  for (std::size_t at = text.find(needle); at != std::string::npos;
       at = text.find(needle, at + needle.size())) {
    ++n;
  }
  return n;
}

std::optional<int> first_int_after(const std::string& text, const std::string& marker) {
  std::size_t at = text.find(marker);
  if (at == std::string::npos) return std::nullopt;
  at += marker.size();
  while (at < text.size() && !std::isdigit(static_cast<unsigned char>(text[at]))) ++at;
  if (at >= text.size()) return std::nullopt;
  int value = 0;
  while (at < text.size() && std::isdigit(static_cast<unsigned char>(text[at]))) {
    value = value * 10 + (text[at] - '0');
    ++at;
  }
  return value;
}

}  // namespace

std::vector<double> hash_vector(const std::string& text, const std::string& salt,
                                std::size_t dim) {
  SplitMix64 rng(seed_from_text(salt + "\x1f" + text));
  std::vector<double> v(dim);
  for (std::size_t i = 0; i < dim; ++i) v[i] = rng.next_unit() * 2.0 - 1.0;
  return v;
}

// ---------------------------------------------------------------------------
// HashOracle

HashOracleConfig HashOracleConfig::from_json(const json& j) {
  HashOracleConfig c;
  c.seed = j.value("seed", static_cast<std::uint64_t>(0));
  c.dim = j.value("dim", static_cast<std::size_t>(16));
  if (c.dim == 0) fail(ErrorKind::config, "hash oracle dim must be positive");
  return c;
}

GenerationResponse HashOracle::generate(const GenerationRequest& req) {
  GenerationResponse r;
  r.text = "stub-" + std::to_string(seed_from_text(std::to_string(config_.seed) + req.prompt) % 100000);
  return r;
}

GateAnswer HashOracle::judge_gate(const std::string& scene, const Gate& gate,
                                  const std::string& group) {
  const std::uint64_t h =
      seed_from_text(std::to_string(config_.seed) + "|" + group + "|" + scene + "|" + gate.question);
  switch (h % 3) {
    case 0: return GateAnswer::yes;
    case 1: return GateAnswer::no;
    default: return GateAnswer::unknown;
  }
}

std::vector<EvidenceLabel> HashOracle::relate_batch(const std::string& group,
                                                    const std::string& decision,
                                                    const std::vector<Statement>& statements) {
  std::vector<EvidenceLabel> out;
  out.reserve(statements.size());
  for (const auto& s : statements) {
    const std::uint64_t h =
        seed_from_text(std::to_string(config_.seed) + "|" + group + "|" + decision + "|" + s.text);
    out.push_back(h % 3 == 0 ? EvidenceLabel::sup
                             : (h % 3 == 1 ? EvidenceLabel::con : EvidenceLabel::irr));
  }
  return out;
}

std::vector<EmbeddingVector> HashOracle::embed(const std::vector<std::string>& texts,
                                               EmbedLens lens) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  const std::string salt = "hash:" + std::to_string(config_.seed) + ":" + to_string(lens);
  for (const auto& t : texts) {
    EmbeddingVector v;
    v.values = hash_vector(t, salt, config_.dim);
    v.provider = "hash";
    out.push_back(std::move(v));
  }
  return out;
}

// ---------------------------------------------------------------------------
// ScriptedOracle

void ScriptedOracle::script_generate(const std::string& prompt_contains,
                                     const std::string& response_text) {
  generate_rules_.push_back({prompt_contains, response_text});
}

void ScriptedOracle::script_gate(const std::string& scene_contains,
                                 const std::string& question_contains, GateAnswer answer) {
  gate_rules_.push_back({scene_contains, question_contains, answer});
}

void ScriptedOracle::script_relation(const std::string& decision_contains,
                                     const std::string& statement_contains, EvidenceLabel label) {
  relation_rules_.push_back({decision_contains, statement_contains, label});
}

void ScriptedOracle::script_embedding(const std::string& text, std::vector<double> values) {
  embeddings_[text] = std::move(values);
}

GenerationResponse ScriptedOracle::generate(const GenerationRequest& req) {
  for (const auto& rule : generate_rules_) {
    if (req.prompt.find(rule.contains) != std::string::npos) {
      return GenerationResponse{rule.response, "stop"};
    }
  }
  return GenerationResponse{generate_fallback_, "stop"};
}

GateAnswer ScriptedOracle::judge_gate(const std::string& scene, const Gate& gate,
                                      const std::string& group) {
  (void)group;
  for (const auto& rule : gate_rules_) {
    const bool scene_ok =
        rule.scene_contains.empty() || scene.find(rule.scene_contains) != std::string::npos;
    const bool question_ok = rule.question_contains.empty() ||
                             gate.question.find(rule.question_contains) != std::string::npos;
    if (scene_ok && question_ok) return rule.answer;
  }
  return gate_default_;
}

std::vector<EvidenceLabel> ScriptedOracle::relate_batch(const std::string& group,
                                                        const std::string& decision,
                                                        const std::vector<Statement>& statements) {
  (void)group;
  std::vector<EvidenceLabel> out;
  for (const auto& s : statements) {
    EvidenceLabel label = relation_default_;
    for (const auto& rule : relation_rules_) {
      const bool decision_ok = rule.decision_contains.empty() ||
                               decision.find(rule.decision_contains) != std::string::npos;
      const bool statement_ok = rule.statement_contains.empty() ||
                                s.text.find(rule.statement_contains) != std::string::npos;
      if (decision_ok && statement_ok) {
        label = rule.label;
        break;
      }
    }
    out.push_back(label);
  }
  return out;
}

std::vector<EmbeddingVector> ScriptedOracle::embed(const std::vector<std::string>& texts,
                                                   EmbedLens lens) {
  std::vector<EmbeddingVector> out;
  for (const auto& t : texts) {
    EmbeddingVector v;
    auto it = embeddings_.find(t);
    if (it != embeddings_.end()) {
      v.values = it->second;
    } else {
      v.values = hash_vector(t, std::string("scripted:") + to_string(lens), dim_);
    }
    v.provider = "scripted";
    out.push_back(std::move(v));
  }
  return out;
}

// ---------------------------------------------------------------------------
// PlantedWorld

PlantedRule PlantedRule::from_json(const json& j) {
  PlantedRule r;
  r.id = j.at("id").get<std::string>();
  r.context_marker = j.at("context_marker").get<std::string>();
  r.decision_marker = j.at("decision_marker").get<std::string>();
  r.contra_marker = j.value("contra_marker", "");
  r.statement = j.at("statement").get<std::string>();
  r.gate = j.at("gate").get<std::string>();
  r.action = j.value("action", "");
  if (r.action.empty()) r.action = "Takes the " + r.decision_marker + " step it favors.";
  for (const auto& [other, label] : j.value("cross", json::object()).items()) {
    auto l = evidence_label_from_string(label.get<std::string>());
    if (!l) fail(ErrorKind::config, "bad cross label in planted rule " + r.id);
    r.cross[other] = *l;
  }
  return r;
}

json PlantedRule::to_json() const {
  json cross_obj = json::object();
  for (const auto& [other, label] : cross) cross_obj[other] = to_string(label);
  return json{{"id", id},
              {"context_marker", context_marker},
              {"decision_marker", decision_marker},
              {"contra_marker", contra_marker},
              {"statement", statement},
              {"gate", gate},
              {"action", action},
              {"cross", cross_obj}};
}

const PlantedRule* PlantedWorld::rule_for_context(const std::string& text) const {
  for (const auto& r : rules) {
    if (!r.context_marker.empty() && text.find(r.context_marker) != std::string::npos) return &r;
  }
  return nullptr;
}

const PlantedRule* PlantedWorld::rule_for_decision(const std::string& text) const {
  for (const auto& r : rules) {
    if (!r.decision_marker.empty() && text.find(r.decision_marker) != std::string::npos) return &r;
  }
  return nullptr;
}

const PlantedRule* PlantedWorld::rule_for_statement(const std::string& text) const {
  for (const auto& r : rules) {
    if (text == r.statement) return &r;
  }
  return rule_for_context(text);
}

const PlantedRule* PlantedWorld::rule_for_gate(const std::string& text) const {
  for (const auto& r : rules) {
    if (text == r.gate) return &r;
  }
  return rule_for_context(text);
}

std::size_t PlantedWorld::rule_index(const PlantedRule* rule) const {
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (&rules[i] == rule) return i;
  }
  return rules.size();
}

PlantedWorld PlantedWorld::from_json(const json& j) {
  PlantedWorld w;
  for (const auto& r : j.value("rules", json::array())) {
    w.rules.push_back(PlantedRule::from_json(r));
  }
  w.seed = j.value("seed", static_cast<std::uint64_t>(0));
  w.dim = j.value("dim", static_cast<std::size_t>(16));
  w.noise = j.value("noise", 0.05);
  w.vote_marker = j.value("vote_marker", "");
  if (w.dim == 0) fail(ErrorKind::config, "planted oracle dim must be positive");
  if (w.noise < 0.0) fail(ErrorKind::config, "planted oracle noise must be >= 0");
  return w;
}

json PlantedWorld::to_json() const {
  json rule_list = json::array();
  for (const auto& r : rules) rule_list.push_back(r.to_json());
  return json{{"kind", "planted"}, {"rules", rule_list},   {"seed", seed},
              {"dim", dim},        {"noise", noise},        {"vote_marker", vote_marker}};
}

// ---------------------------------------------------------------------------
// PlantedRuleOracle

EvidenceLabel PlantedRuleOracle::relation_of(const std::string& decision,
                                             const std::string& statement) const {
  const PlantedRule* rs = world_.rule_for_statement(statement);
  if (rs == nullptr) return EvidenceLabel::irr;
  if (!rs->contra_marker.empty() && decision.find(rs->contra_marker) != std::string::npos) {
    return EvidenceLabel::con;
  }
  const PlantedRule* rd = world_.rule_for_decision(decision);
  if (rd == nullptr) return EvidenceLabel::irr;
  if (rd == rs) return EvidenceLabel::sup;
  auto it = rs->cross.find(rd->id);
  return it == rs->cross.end() ? EvidenceLabel::irr : it->second;
}

bool PlantedRuleOracle::action_consistent(const std::string& action,
                                          const std::string& statement) const {
  return relation_of(action, statement) == EvidenceLabel::sup;
}

GateAnswer PlantedRuleOracle::judge_gate(const std::string& scene, const Gate& gate,
                                         const std::string& group) {
  (void)group;
  const PlantedRule* rule = world_.rule_for_gate(gate.question);
  if (rule == nullptr) return GateAnswer::unknown;
  return scene.find(rule->context_marker) != std::string::npos ? GateAnswer::yes : GateAnswer::no;
}

std::vector<EvidenceLabel> PlantedRuleOracle::relate_batch(
    const std::string& group, const std::string& decision,
    const std::vector<Statement>& statements) {
  (void)group;
  std::vector<EvidenceLabel> out;
  out.reserve(statements.size());
  for (const auto& s : statements) out.push_back(relation_of(decision, s.text));
  return out;
}

std::vector<EmbeddingVector> PlantedRuleOracle::embed(const std::vector<std::string>& texts,
                                                      EmbedLens lens) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  const std::string salt = "planted:" + std::to_string(world_.seed) + ":" + to_string(lens);
  for (const auto& t : texts) {
    std::vector<double> v(world_.dim, 0.0);
    int axis = -1;
    for (std::size_t i = 0; i < world_.rules.size(); ++i) {
      const auto& r = world_.rules[i];
      if (!r.context_marker.empty() && t.find(r.context_marker) != std::string::npos) {
        axis = static_cast<int>((2 * i) % world_.dim);
        break;
      }
      if (!r.decision_marker.empty() && t.find(r.decision_marker) != std::string::npos) {
        axis = static_cast<int>((2 * i + 1) % world_.dim);
        break;
      }
    }
    if (axis >= 0) {
      v[static_cast<std::size_t>(axis)] = 1.0;
      if (world_.noise > 0.0) {
        std::vector<double> jitter = hash_vector(t, salt, world_.dim);
        for (std::size_t d = 0; d < world_.dim; ++d) v[d] += world_.noise * jitter[d];
      }
    } else {
      v = hash_vector(t, salt, world_.dim);
    }
    EmbeddingVector e;
    e.values = std::move(v);
    e.provider = "planted";
    out.push_back(std::move(e));
  }
  return out;
}

GenerationResponse PlantedRuleOracle::generate(const GenerationRequest& req) {
  return GenerationResponse{dispatch(req.prompt), "stop"};
}

std::string PlantedRuleOracle::dispatch(const std::string& prompt) const {
  // Hypothesis generation
  if (prompt.find("action_hypotheses = [") != std::string::npos) {
    const std::string pairs =
        section(prompt, "# Scene-Action Pairs", {"# Established Statements"});
    const std::string established =
        section(prompt, "# Established Statements", {"# Already Proposed Common Points"});
    struct Scored {
      std::size_t count;
      std::size_t index;
    };
    std::vector<Scored> scored;
    for (std::size_t i = 0; i < world_.rules.size(); ++i) {
      const auto& r = world_.rules[i];
      if (established.find(r.statement) != std::string::npos) continue;
      const std::size_t count = count_occurrences(pairs, r.context_marker);
      if (count > 0) scored.push_back({count, i});
    }
    std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
      return a.count > b.count;
    });
    json actions = json::array();
    json gates = json::array();
    for (const auto& s : scored) {
      actions.push_back(world_.rules[s.index].statement);
      gates.push_back(world_.rules[s.index].gate);
    }
    if (actions.empty()) {
      actions.push_back("The group proceeds with routine operations when nothing notable occurs.");
      gates.push_back("Might the scene lead the group's next action to address routine matters?");
    }
    return json{{"action_hypotheses", actions}, {"scene_check_hypotheses", gates}}.dump();
  }

  // Hypothesis summarization / dedup
  if (prompt.find("Summarize & Compress") != std::string::npos) {
    const std::string input = section(prompt, "Input pairs:", {"## Goal"});
    json parsed = json::parse(input, nullptr, false);
    json pairs = json::array();
    std::vector<std::string> seen;
    if (parsed.is_array()) {
      for (const auto& p : parsed) {
        std::string action = p.value("action_hypothesis", "");
        std::string gate = p.value("scene_check_hypothesis", "");
        const PlantedRule* rule = world_.rule_for_statement(action);
        if (rule != nullptr) {
          action = rule->statement;
          gate = rule->gate;
        }
        if (std::find(seen.begin(), seen.end(), action) != seen.end()) continue;
        seen.push_back(action);
        pairs.push_back(json{{"scene_check_hypothesis", gate}, {"action_hypothesis", action}});
      }
    }
    const std::string bounds = section(prompt, "You should output between", {" pairs"});
    const int upper = first_int_after(bounds, "and").value_or(8);
    while (pairs.size() > static_cast<std::size_t>(std::max(upper, 1))) {
      pairs.erase(pairs.size() - 1);
    }
    return json{{"pairs", pairs}}.dump();
  }

  // Ungated statement consistency (yes/no)
  if (prompt.find("Is the action consistent with the behavioral pattern") != std::string::npos) {
    const std::string action = section(prompt, "Action: ", {"\n\nStatement:"});
    const std::string statement = section(prompt, "Statement: ", {"\n\nQuestion:"});
    return action_consistent(action, statement) ? "yes" : "no";
  }

  // Candidate tree voting
  if (prompt.find("best_candidate_index") != std::string::npos) {
    const std::string candidates = section(prompt, "Here are the candidates:", {"\nTask:"});
    int chosen = 1;
    if (!world_.vote_marker.empty()) {
      const int total = first_int_after(prompt, "I have generated ").value_or(1);
      for (int i = 1; i <= total; ++i) {
        const std::string block =
            section(candidates, "Candidate " + std::to_string(i) + ":",
                    {"Candidate " + std::to_string(i + 1) + ":"});
        if (block.find(world_.vote_marker) != std::string::npos) {
          chosen = i;
          break;
        }
      }
    }
    return json{{"best_candidate_index", chosen}, {"reasoning", "marker preference"}}.dump();
  }

  // Demotion gate candidates
  if (prompt.find("Generate 3 candidate yes/no gate questions") != std::string::npos) {
    const std::string sup =
        section(prompt, "## Supporting events", {"## Contradicting events"});
    const PlantedRule* best = nullptr;
    std::size_t best_count = 0;
    for (const auto& r : world_.rules) {
      const std::size_t count = count_occurrences(sup, r.context_marker);
      if (count > best_count) {
        best = &r;
        best_count = count;
      }
    }
    json candidates = json::array();
    if (best != nullptr) candidates.push_back(best->gate);
    candidates.push_back("Is the scene dominated by unusual external circumstances?");
    candidates.push_back("Does the scene revolve around a scheduled routine review?");
    while (candidates.size() > 3) candidates.erase(candidates.size() - 1);
    return candidates.dump();
  }

  // Gate/statement semantic compatibility
  if (prompt.find("Does this gate question provide a meaningful scene condition") !=
      std::string::npos) {
    const std::string statement = section(prompt, "## Statement\n\"", {"\"\n"});
    const std::string question = section(prompt, "## Gate question\n\"", {"\"\n"});
    const PlantedRule* rs = world_.rule_for_statement(statement);
    const PlantedRule* rq = world_.rule_for_gate(question);
    return (rs != nullptr && rs == rq) ? "yes" : "no";
  }

  // New statements for uncovered events
  if (prompt.find("Generate new behavioral statements") != std::string::npos) {
    const std::string uncovered =
        section(prompt, "## Uncovered events at this node:", {"## Existing statements"});
    const std::string existing =
        section(prompt, "## Existing statements at this node", {"## Task"});
    json statements = json::array();
    for (const auto& r : world_.rules) {
      if (existing.find(r.statement) != std::string::npos) continue;
      if (count_occurrences(uncovered, r.decision_marker) > 0 ||
          count_occurrences(uncovered, r.context_marker) > 0) {
        statements.push_back(r.statement);
      }
    }
    return json{{"statements", statements}}.dump();
  }

  // Action prediction (tree background, vanilla, retrieval, profile layouts)
  const bool predict_bg = prompt.find("Predict the specific action taken by") != std::string::npos;
  const bool predict_profile =
      prompt.find("Answer a concise narration in one sentence") != std::string::npos;
  if (predict_bg || predict_profile) {
    std::string support = section(prompt, "# Background Knowledge\n", {"\n# Context", "\n# Scene"});
    support += section(prompt, "# In-Context Examples\n", {"\n# Context"});
    std::string context = section(prompt, "# Context\n", {"\n# Question"});
    if (context.empty()) context = section(prompt, "# Scene\n", {"\n# Question"});
    for (const auto& r : world_.rules) {
      const bool known = support.find(r.context_marker) != std::string::npos ||
                         support.find(r.decision_marker) != std::string::npos;
      const bool triggered = context.find(r.context_marker) != std::string::npos;
      if (known && triggered) return r.action;
    }
    return "The group takes no notable new action.";
  }

  // Consistency judgment between reference and prediction
  if (prompt.find("Determine the relationship between the premise and hypothesis") !=
      std::string::npos) {
    const std::string premise = section(prompt, "Premise: ", {"\nHypothesis:"});
    const std::string hypothesis = section(prompt, "Hypothesis: ", {"\n\nDetermine"});
    const PlantedRule* rp = world_.rule_for_decision(premise);
    const PlantedRule* rh = world_.rule_for_decision(hypothesis);
    if (rp != nullptr && !rp->contra_marker.empty() &&
        hypothesis.find(rp->contra_marker) != std::string::npos) {
      return "contradicts";
    }
    if (rp != nullptr && rp == rh) return "entails";
    if (rp != nullptr && rh != nullptr && rp != rh) return "contradicts";
    return "neutral";
  }

  // Dimension judgments
  for (const char* dim : {"initiative", "scope", "magnitude", "horizon"}) {
    const std::string tag = std::string("Output: {\"") + dim + "\"";
    if (prompt.find(tag) != std::string::npos) {
      const std::string prediction = section(prompt, "# Your Response: ", {"\n# Ground Truth:"});
      const std::string reference = section(prompt, "# Ground Truth: ", {"\n\n"});
      const PlantedRule* rp = world_.rule_for_decision(prediction);
      const PlantedRule* rr = world_.rule_for_decision(reference);
      const bool match = (rp == rr);
      return json{{dim, match ? "match" : "mismatch"}, {"reason", "marker comparison"}}.dump();
    }
  }

  // Profile extraction
  if (prompt.find("starting with ===Profile===") != std::string::npos) {
    const std::string block = section(prompt, "# Scene-Action Pairs\n", {"\nNow, based on"});
    std::ostringstream os;
    os << "===Profile===\nThe group repeatedly demonstrates these patterns:";
    bool any = false;
    for (const auto& r : world_.rules) {
      if (block.find(r.decision_marker) != std::string::npos ||
          block.find(r.context_marker) != std::string::npos) {
        os << " " << r.statement;
        any = true;
      }
    }
    if (!any) os << " No stable pattern is visible in the provided pairs.";
    return os.str();
  }

  // Profile aggregation
  if (prompt.find("Directly update the main profile") != std::string::npos) {
    std::ostringstream os;
    os << "The group repeatedly demonstrates these patterns:";
    bool any = false;
    for (const auto& r : world_.rules) {
      if (prompt.find(r.statement) != std::string::npos ||
          prompt.find(r.context_marker) != std::string::npos) {
        os << " " << r.statement;
        any = true;
      }
    }
    if (!any) os << " No stable pattern is visible.";
    return os.str();
  }

  return "ok";
}

}  // namespace cdt
