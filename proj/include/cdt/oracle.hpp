#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdt/model.hpp"

namespace cdt {

// Which encoder a text is embedded with. general_context and
// surface_decision are the two halves of composite clustering vectors;
// plain serves retrieval and similarity analysis.
enum class EmbedLens { general_context, surface_decision, plain };

const char* to_string(EmbedLens lens);

enum class GateAnswer { yes, no, unknown };

const char* to_string(GateAnswer a);

struct GenerationRequest {
  std::string prompt;
  double temperature = 0.0;
  int max_tokens = 2048;
  std::string role = "generate";  // provider hint for per-role model routing
};

struct GenerationResponse {
  std::string text;
  std::string finish_reason = "stop";
};

struct EmbeddingVector {
  std::vector<double> values;
  std::string provider;
};

// The four operations every pipeline is written against. Implementations
// must be deterministic functions of the request (plus their own seed).
class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual GenerationResponse generate(const GenerationRequest& req) = 0;

  // Does the scene satisfy the gate condition?
  virtual GateAnswer judge_gate(const std::string& scene, const Gate& gate,
                                const std::string& group) = 0;

  // One call covers one decision against every statement in the batch.
  virtual std::vector<EvidenceLabel> relate_batch(const std::string& group,
                                                  const std::string& decision,
                                                  const std::vector<Statement>& statements) = 0;

  virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                             EmbedLens lens) = 0;
};

struct OracleCallCounts {
  std::int64_t generate = 0;
  std::int64_t judge_gate = 0;
  std::int64_t relate_batch = 0;
  std::int64_t embed = 0;
};

// Pass-through wrapper that tallies calls; tests and build logging use it.
class CountingOracle : public Oracle {
 public:
  explicit CountingOracle(std::shared_ptr<Oracle> inner) : inner_(std::move(inner)) {}

  GenerationResponse generate(const GenerationRequest& req) override;
  GateAnswer judge_gate(const std::string& scene, const Gate& gate,
                        const std::string& group) override;
  std::vector<EvidenceLabel> relate_batch(const std::string& group, const std::string& decision,
                                          const std::vector<Statement>& statements) override;
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                     EmbedLens lens) override;

  OracleCallCounts counts() const;
  void reset_counts();

 private:
  std::shared_ptr<Oracle> inner_;
  mutable std::mutex mu_;
  OracleCallCounts counts_;
};

// ---------------------------------------------------------------------------
// Transcript cache

enum class TranscriptMode { record, replay, passthrough };

std::optional<TranscriptMode> transcript_mode_from_string(const std::string& s);

// SHA-256 over a canonical (sorted-key) encoding, so digests are invariant
// to field ordering in the request object.
std::string request_digest(const nlohmann::json& request);

// Directory of <digest>.json files, each holding {"request":..., "response":...}.
class TranscriptStore {
 public:
  explicit TranscriptStore(std::string dir);

  std::optional<nlohmann::json> lookup(const std::string& digest) const;
  void store(const std::string& digest, const nlohmann::json& request,
             const nlohmann::json& response);
  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  mutable std::mutex mu_;
};

// Record / replay / passthrough around any inner oracle. In replay mode a
// missing entry is an error; a live call is never made.
class TranscriptOracle : public Oracle {
 public:
  TranscriptOracle(TranscriptMode mode, const std::string& dir, std::shared_ptr<Oracle> inner);

  GenerationResponse generate(const GenerationRequest& req) override;
  GateAnswer judge_gate(const std::string& scene, const Gate& gate,
                        const std::string& group) override;
  std::vector<EvidenceLabel> relate_batch(const std::string& group, const std::string& decision,
                                          const std::vector<Statement>& statements) override;
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                     EmbedLens lens) override;

 private:
  nlohmann::json run(const nlohmann::json& request,
                     const std::function<nlohmann::json()>& live);

  TranscriptMode mode_;
  std::unique_ptr<TranscriptStore> store_;
  std::shared_ptr<Oracle> inner_;
};

// ---------------------------------------------------------------------------
// Tolerant response parsing (exposed for tests)

// "Yes." / "yes" / " YES " all parse; anything else is nullopt.
std::optional<bool> parse_yes_no(const std::string& text);
std::optional<GateAnswer> parse_gate_answer(const std::string& text);
// Accepts a JSON array of labels or a newline-separated list; checks count.
std::optional<std::vector<EvidenceLabel>> parse_relation_labels(const std::string& text,
                                                                std::size_t expected);
// First JSON object/array embedded in free text (code fences tolerated).
std::optional<nlohmann::json> extract_json(const std::string& text);

// ---------------------------------------------------------------------------
// Text-completion backend and the adapter that turns it into a full Oracle.

class TextBackend {
 public:
  virtual ~TextBackend() = default;
  virtual GenerationResponse complete(const GenerationRequest& req) = 0;
  virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                             EmbedLens lens) = 0;
};

// Implements judge_gate / relate_batch by prompting a text backend and
// parsing tolerantly: one strict reprompt, then a protocol error.
class ChatBackedOracle : public Oracle {
 public:
  explicit ChatBackedOracle(std::shared_ptr<TextBackend> backend) : backend_(std::move(backend)) {}

  GenerationResponse generate(const GenerationRequest& req) override;
  GateAnswer judge_gate(const std::string& scene, const Gate& gate,
                        const std::string& group) override;
  std::vector<EvidenceLabel> relate_batch(const std::string& group, const std::string& decision,
                                          const std::vector<Statement>& statements) override;
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                     EmbedLens lens) override;

 private:
  std::shared_ptr<TextBackend> backend_;
};

// Builds the configured oracle stack from a JSON config:
//   {"provider": {...}, "transcript": {"mode": "...", "dir": "..."}}
// Provider kinds: "hash", "planted", "http". In replay mode the provider
// section may be omitted entirely.
std::shared_ptr<Oracle> make_oracle(const nlohmann::json& config);

}  // namespace cdt
