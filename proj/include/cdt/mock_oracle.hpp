#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdt/oracle.hpp"

namespace cdt {

// Deterministic pseudo-embedding: SHA-256 of (salt, lens, text) seeds a
// splitmix64 stream that fills the vector. Identical text, identical vector;
// stable across platforms and processes.
std::vector<double> hash_vector(const std::string& text, const std::string& salt,
                                std::size_t dim);

struct HashOracleConfig {
  std::uint64_t seed = 0;
  std::size_t dim = 16;

  static HashOracleConfig from_json(const nlohmann::json& j);
};

// Stub provider whose every answer is a pure hash of the request. Useful
// where tests only need determinism and plausible-shaped outputs.
class HashOracle : public Oracle {
 public:
  explicit HashOracle(HashOracleConfig config) : config_(config) {}

  GenerationResponse generate(const GenerationRequest& req) override;
  GateAnswer judge_gate(const std::string& scene, const Gate& gate,
                        const std::string& group) override;
  std::vector<EvidenceLabel> relate_batch(const std::string& group, const std::string& decision,
                                          const std::vector<Statement>& statements) override;
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                     EmbedLens lens) override;

 private:
  HashOracleConfig config_;
};

// Table-driven test double: exact behavior is scripted per call pattern,
// with explicit defaults for everything unscripted.
class ScriptedOracle : public Oracle {
 public:
  ScriptedOracle() = default;

  void script_generate(const std::string& prompt_contains, const std::string& response_text);
  void set_generate_fallback(const std::string& text) { generate_fallback_ = text; }

  void script_gate(const std::string& scene_contains, const std::string& question_contains,
                   GateAnswer answer);
  void set_gate_default(GateAnswer answer) { gate_default_ = answer; }

  void script_relation(const std::string& decision_contains,
                       const std::string& statement_contains, EvidenceLabel label);
  void set_relation_default(EvidenceLabel label) { relation_default_ = label; }

  void script_embedding(const std::string& text, std::vector<double> values);

  GenerationResponse generate(const GenerationRequest& req) override;
  GateAnswer judge_gate(const std::string& scene, const Gate& gate,
                        const std::string& group) override;
  std::vector<EvidenceLabel> relate_batch(const std::string& group, const std::string& decision,
                                          const std::vector<Statement>& statements) override;
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                     EmbedLens lens) override;

 private:
  struct GenerateRule {
    std::string contains;
    std::string response;
  };
  struct GateRule {
    std::string scene_contains;
    std::string question_contains;
    GateAnswer answer;
  };
  struct RelationRule {
    std::string decision_contains;
    std::string statement_contains;
    EvidenceLabel label;
  };

  std::vector<GenerateRule> generate_rules_;
  std::string generate_fallback_ = "ok";
  std::vector<GateRule> gate_rules_;
  GateAnswer gate_default_ = GateAnswer::unknown;
  std::vector<RelationRule> relation_rules_;
  EvidenceLabel relation_default_ = EvidenceLabel::irr;
  std::map<std::string, std::vector<double>> embeddings_;
  std::size_t dim_ = 16;
};

// ---------------------------------------------------------------------------
// Planted-rule provider

// One behavioral regularity baked into a synthetic world. Scenes of the
// rule contain context_marker, actions contain decision_marker, and the
// canonical statement/gate texts contain context_marker so they can be
// recognized wherever they resurface (prompts, trees, backgrounds).
struct PlantedRule {
  std::string id;
  std::string context_marker;
  std::string decision_marker;
  std::string contra_marker;  // optional: actions carrying it contradict the rule
  std::string statement;
  std::string gate;
  std::string action;  // canonical action text, contains decision_marker
  std::map<std::string, EvidenceLabel> cross;  // vs other rules' decisions; default irr

  static PlantedRule from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct PlantedWorld {
  std::vector<PlantedRule> rules;
  std::uint64_t seed = 0;
  std::size_t dim = 16;
  double noise = 0.05;
  std::string vote_marker;  // candidate tree containing it wins selection votes

  const PlantedRule* rule_for_context(const std::string& text) const;
  const PlantedRule* rule_for_decision(const std::string& text) const;
  const PlantedRule* rule_for_statement(const std::string& text) const;
  const PlantedRule* rule_for_gate(const std::string& text) const;
  std::size_t rule_index(const PlantedRule* rule) const;

  static PlantedWorld from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Fully deterministic provider that behaves as if the planted rules were
// true regularities of the data: hypothesis prompts yield the canonical
// statement/gate pairs, gate judgments test context markers, relation labels
// follow the rule table, and embeddings place marked texts on per-rule axes
// so clustering and similarity analysis see the planted structure.
class PlantedRuleOracle : public Oracle {
 public:
  explicit PlantedRuleOracle(PlantedWorld world) : world_(std::move(world)) {}

  const PlantedWorld& world() const { return world_; }

  GenerationResponse generate(const GenerationRequest& req) override;
  GateAnswer judge_gate(const std::string& scene, const Gate& gate,
                        const std::string& group) override;
  std::vector<EvidenceLabel> relate_batch(const std::string& group, const std::string& decision,
                                          const std::vector<Statement>& statements) override;
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                     EmbedLens lens) override;

  // Exposed for tests that need the same verdict logic the prompts follow.
  bool action_consistent(const std::string& action, const std::string& statement) const;
  EvidenceLabel relation_of(const std::string& decision, const std::string& statement) const;

 private:
  std::string dispatch(const std::string& prompt) const;

  PlantedWorld world_;
};

}  // namespace cdt
