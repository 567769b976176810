#include "cdt/oracle.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "cdt/error.hpp"
#include "cdt/http_oracle.hpp"
#include "cdt/log.hpp"
#include "cdt/mock_oracle.hpp"
#include "cdt/prompts.hpp"

namespace cdt {

using nlohmann::json;

const char* to_string(EmbedLens lens) {
  switch (lens) {
    case EmbedLens::general_context: return "general_context";
    case EmbedLens::surface_decision: return "surface_decision";
    case EmbedLens::plain: return "plain";
  }
  return "plain";
}

const char* to_string(GateAnswer a) {
  switch (a) {
    case GateAnswer::yes: return "yes";
    case GateAnswer::no: return "no";
    case GateAnswer::unknown: return "unknown";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// CountingOracle

GenerationResponse CountingOracle::generate(const GenerationRequest& req) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    ++counts_.generate;
  }
  return inner_->generate(req);
}

GateAnswer CountingOracle::judge_gate(const std::string& scene, const Gate& gate,
                                      const std::string& group) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    ++counts_.judge_gate;
  }
  return inner_->judge_gate(scene, gate, group);
}

std::vector<EvidenceLabel> CountingOracle::relate_batch(const std::string& group,
                                                        const std::string& decision,
                                                        const std::vector<Statement>& statements) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    ++counts_.relate_batch;
  }
  return inner_->relate_batch(group, decision, statements);
}

std::vector<EmbeddingVector> CountingOracle::embed(const std::vector<std::string>& texts,
                                                   EmbedLens lens) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    ++counts_.embed;
  }
  return inner_->embed(texts, lens);
}

OracleCallCounts CountingOracle::counts() const {
  std::lock_guard<std::mutex> lock(mu_);
  return counts_;
}

void CountingOracle::reset_counts() {
  std::lock_guard<std::mutex> lock(mu_);
  counts_ = OracleCallCounts{};
}

// ---------------------------------------------------------------------------
// Digest and transcript store

static std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorKind::internal, "SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string request_digest(const json& request) {
  // nlohmann objects keep keys sorted, so dump() is already canonical.
  return sha256_hex(request.dump());
}

std::optional<TranscriptMode> transcript_mode_from_string(const std::string& s) {
  if (s == "record") return TranscriptMode::record;
  if (s == "replay") return TranscriptMode::replay;
  if (s == "passthrough") return TranscriptMode::passthrough;
  return std::nullopt;
}

TranscriptStore::TranscriptStore(std::string dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) fail(ErrorKind::io, "cannot create transcript dir " + dir_ + ": " + ec.message());
}

std::optional<json> TranscriptStore::lookup(const std::string& digest) const {
  std::lock_guard<std::mutex> lock(mu_);
  const std::filesystem::path path = std::filesystem::path(dir_) / (digest + ".json");
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream os;
  os << in.rdbuf();
  json doc = json::parse(os.str(), nullptr, false);
  if (doc.is_discarded() || !doc.contains("response")) {
    fail(ErrorKind::io, "corrupt transcript entry: " + path.string());
  }
  return doc;
}

void TranscriptStore::store(const std::string& digest, const json& request,
                            const json& response) {
  std::lock_guard<std::mutex> lock(mu_);
  const std::filesystem::path path = std::filesystem::path(dir_) / (digest + ".json");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot write transcript entry: " + path.string());
  out << json{{"request", request}, {"response", response}}.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// TranscriptOracle

TranscriptOracle::TranscriptOracle(TranscriptMode mode, const std::string& dir,
                                   std::shared_ptr<Oracle> inner)
    : mode_(mode), store_(std::make_unique<TranscriptStore>(dir)), inner_(std::move(inner)) {
  if (mode_ != TranscriptMode::replay && inner_ == nullptr) {
    fail(ErrorKind::config, "transcript mode requires a live provider unless replaying");
  }
}

json TranscriptOracle::run(const json& request, const std::function<json()>& live) {
  const std::string digest = request_digest(request);
  if (mode_ == TranscriptMode::passthrough) return live();
  if (auto hit = store_->lookup(digest)) return hit->at("response");
  if (mode_ == TranscriptMode::replay) {
    fail(ErrorKind::missing_transcript,
         "no transcript entry for " + request.value("op", "?") + " request (digest " + digest +
             ") in " + store_->dir());
  }
  json response = live();
  store_->store(digest, request, response);
  return response;
}

GenerationResponse TranscriptOracle::generate(const GenerationRequest& req) {
  json request{{"op", "generate"},
               {"prompt", req.prompt},
               {"temperature", req.temperature},
               {"max_tokens", req.max_tokens},
               {"role", req.role}};
  json response = run(request, [&] {
    GenerationResponse r = inner_->generate(req);
    return json{{"text", r.text}, {"finish_reason", r.finish_reason}};
  });
  GenerationResponse out;
  out.text = response.value("text", "");
  out.finish_reason = response.value("finish_reason", "stop");
  return out;
}

GateAnswer TranscriptOracle::judge_gate(const std::string& scene, const Gate& gate,
                                        const std::string& group) {
  json request{{"op", "judge_gate"}, {"group", group}, {"scene", scene},
               {"question", gate.question}};
  json response = run(request, [&] {
    return json{{"answer", to_string(inner_->judge_gate(scene, gate, group))}};
  });
  const std::string answer = response.value("answer", "");
  if (answer == "yes") return GateAnswer::yes;
  if (answer == "no") return GateAnswer::no;
  if (answer == "unknown") return GateAnswer::unknown;
  fail(ErrorKind::io, "corrupt transcript gate answer: " + answer);
}

std::vector<EvidenceLabel> TranscriptOracle::relate_batch(
    const std::string& group, const std::string& decision,
    const std::vector<Statement>& statements) {
  json texts = json::array();
  for (const auto& s : statements) texts.push_back(s.text);
  json request{{"op", "relate_batch"}, {"group", group}, {"decision", decision},
               {"statements", texts}};
  json response = run(request, [&] {
    json labels = json::array();
    for (EvidenceLabel l : inner_->relate_batch(group, decision, statements)) {
      labels.push_back(to_string(l));
    }
    return json{{"labels", labels}};
  });
  std::vector<EvidenceLabel> out;
  for (const auto& l : response.at("labels")) {
    auto parsed = evidence_label_from_string(l.get<std::string>());
    if (!parsed) fail(ErrorKind::io, "corrupt transcript relation label: " + l.dump());
    out.push_back(*parsed);
  }
  if (out.size() != statements.size()) {
    fail(ErrorKind::io, "transcript relation label count mismatch");
  }
  return out;
}

std::vector<EmbeddingVector> TranscriptOracle::embed(const std::vector<std::string>& texts,
                                                     EmbedLens lens) {
  json request{{"op", "embed"}, {"lens", to_string(lens)}, {"texts", texts}};
  json response = run(request, [&] {
    std::vector<EmbeddingVector> vecs = inner_->embed(texts, lens);
    json rows = json::array();
    std::string provider;
    for (const auto& v : vecs) {
      rows.push_back(v.values);
      provider = v.provider;
    }
    return json{{"vectors", rows}, {"provider", provider}};
  });
  std::vector<EmbeddingVector> out;
  const std::string provider = response.value("provider", "");
  for (const auto& row : response.at("vectors")) {
    EmbeddingVector v;
    v.values = row.get<std::vector<double>>();
    v.provider = provider;
    out.push_back(std::move(v));
  }
  if (out.size() != texts.size()) fail(ErrorKind::io, "transcript embedding count mismatch");
  return out;
}

// ---------------------------------------------------------------------------
// Parsing helpers

namespace {

std::vector<std::string> lower_words(const std::string& text) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      words.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(cur);
  return words;
}

}  // namespace

std::optional<bool> parse_yes_no(const std::string& text) {
  const std::vector<std::string> words = lower_words(text);
  if (words.empty()) return std::nullopt;
  if (words.front() == "yes") return true;
  if (words.front() == "no") return false;
  // Fall back to a unique occurrence anywhere in the reply.
  const bool has_yes = std::find(words.begin(), words.end(), "yes") != words.end();
  const bool has_no = std::find(words.begin(), words.end(), "no") != words.end();
  if (has_yes && !has_no) return true;
  if (has_no && !has_yes) return false;
  return std::nullopt;
}

std::optional<GateAnswer> parse_gate_answer(const std::string& text) {
  const std::vector<std::string> words = lower_words(text);
  if (words.empty()) return std::nullopt;
  if (words.front() == "yes") return GateAnswer::yes;
  if (words.front() == "no") return GateAnswer::no;
  if (words.front() == "unknown") return GateAnswer::unknown;
  const bool has_yes = std::find(words.begin(), words.end(), "yes") != words.end();
  const bool has_no = std::find(words.begin(), words.end(), "no") != words.end();
  const bool has_unknown = std::find(words.begin(), words.end(), "unknown") != words.end();
  if (has_yes + has_no + has_unknown == 1) {
    if (has_yes) return GateAnswer::yes;
    if (has_no) return GateAnswer::no;
    return GateAnswer::unknown;
  }
  return std::nullopt;
}

std::optional<json> extract_json(const std::string& text) {
  for (std::size_t start = 0; start < text.size(); ++start) {
    const char open = text[start];
    if (open != '{' && open != '[') continue;
    const char close = (open == '{') ? '}' : ']';
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == open) {
        ++depth;
      } else if (c == close) {
        --depth;
        if (depth == 0) {
          json parsed = json::parse(text.substr(start, i - start + 1), nullptr, false);
          if (!parsed.is_discarded()) return parsed;
          break;  // malformed; resume scanning after this opener
        }
      }
    }
  }
  return std::nullopt;
}

namespace {

std::optional<EvidenceLabel> normalize_label(const std::string& raw) {
  std::string s;
  for (char c : raw) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (s.rfind("sup", 0) == 0) return EvidenceLabel::sup;
  if (s.rfind("con", 0) == 0) return EvidenceLabel::con;
  if (s.rfind("irr", 0) == 0) return EvidenceLabel::irr;
  return std::nullopt;
}

}  // namespace

std::optional<std::vector<EvidenceLabel>> parse_relation_labels(const std::string& text,
                                                                std::size_t expected) {
  std::vector<std::string> raw;
  if (auto doc = extract_json(text); doc && doc->is_array()) {
    for (const auto& item : *doc) {
      if (item.is_string()) raw.push_back(item.get<std::string>());
    }
  }
  if (raw.empty()) {
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      raw.push_back(line);
    }
  }
  std::vector<EvidenceLabel> labels;
  for (const auto& r : raw) {
    if (auto l = normalize_label(r)) labels.push_back(*l);
  }
  if (labels.size() != expected) return std::nullopt;
  return labels;
}

// ---------------------------------------------------------------------------
// ChatBackedOracle

GenerationResponse ChatBackedOracle::generate(const GenerationRequest& req) {
  return backend_->complete(req);
}

GateAnswer ChatBackedOracle::judge_gate(const std::string& scene, const Gate& gate,
                                        const std::string& group) {
  (void)group;
  GenerationRequest req;
  req.prompt = prompts::gate_check(scene, gate.question);
  req.role = "judge";
  req.max_tokens = 16;
  GenerationResponse first = backend_->complete(req);
  if (auto a = parse_gate_answer(first.text)) return *a;
  GenerationRequest retry = req;
  retry.prompt += prompts::strict_retry_suffix();
  GenerationResponse second = backend_->complete(retry);
  if (auto a = parse_gate_answer(second.text)) return *a;
  fail(ErrorKind::oracle_protocol,
       "gate judgment unparseable after reprompt: \"" + second.text + "\"");
}

std::vector<EvidenceLabel> ChatBackedOracle::relate_batch(
    const std::string& group, const std::string& decision,
    const std::vector<Statement>& statements) {
  if (statements.empty()) {
    fail(ErrorKind::invalid_argument, "relate_batch requires at least one statement");
  }
  std::vector<std::string> texts;
  texts.reserve(statements.size());
  for (const auto& s : statements) texts.push_back(s.text);
  GenerationRequest req;
  req.prompt = prompts::relation_batch(group, decision, texts);
  req.role = "relate";
  GenerationResponse first = backend_->complete(req);
  if (auto l = parse_relation_labels(first.text, statements.size())) return *l;
  GenerationRequest retry = req;
  retry.prompt += prompts::strict_retry_suffix();
  GenerationResponse second = backend_->complete(retry);
  if (auto l = parse_relation_labels(second.text, statements.size())) return *l;
  fail(ErrorKind::oracle_protocol,
       "relation labels unparseable or miscounted after reprompt (expected " +
           std::to_string(statements.size()) + ")");
}

std::vector<EmbeddingVector> ChatBackedOracle::embed(const std::vector<std::string>& texts,
                                                     EmbedLens lens) {
  return backend_->embed(texts, lens);
}

// ---------------------------------------------------------------------------
// Factory

std::shared_ptr<Oracle> make_oracle(const json& config) {
  if (!config.is_object()) fail(ErrorKind::config, "oracle config must be a JSON object");

  std::shared_ptr<Oracle> provider;
  if (config.contains("provider") && !config.at("provider").is_null()) {
    const json& p = config.at("provider");
    const std::string kind = p.value("kind", "");
    if (kind == "hash") {
      provider = std::make_shared<HashOracle>(HashOracleConfig::from_json(p));
    } else if (kind == "planted") {
      provider = std::make_shared<PlantedRuleOracle>(PlantedWorld::from_json(p));
    } else if (kind == "http") {
      provider = std::make_shared<ChatBackedOracle>(std::make_shared<HttpBackend>(
          HttpBackendConfig::from_json(p)));
    } else {
      fail(ErrorKind::config, "unknown oracle provider kind: \"" + kind + "\"");
    }
  }

  if (config.contains("transcript") && !config.at("transcript").is_null()) {
    const json& t = config.at("transcript");
    const std::string mode_text = t.value("mode", "");
    auto mode = transcript_mode_from_string(mode_text);
    if (!mode) fail(ErrorKind::config, "unknown transcript mode: \"" + mode_text + "\"");
    const std::string dir = t.value("dir", "");
    if (dir.empty()) fail(ErrorKind::config, "transcript config requires a dir");
    if (*mode == TranscriptMode::passthrough) {
      if (provider == nullptr) {
        fail(ErrorKind::config, "passthrough transcript mode needs a provider");
      }
      return provider;
    }
    return std::make_shared<TranscriptOracle>(*mode, dir, provider);
  }

  if (provider == nullptr) {
    fail(ErrorKind::config, "oracle config needs a provider or a replay transcript");
  }
  return provider;
}

}  // namespace cdt
