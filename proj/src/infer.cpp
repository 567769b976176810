#include "cdt/infer.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "cdt/analyze.hpp"
#include "cdt/error.hpp"
#include "cdt/log.hpp"
#include "cdt/prompts.hpp"

namespace cdt {

using nlohmann::json;

namespace {

std::string trimmed(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string default_question(const std::string& group) {
  return "What will " + group + " do next?";
}

void walk(const CdtNode& node, const Cdt& tree, const std::string& context, Oracle& oracle,
          TraversalTrace& trace, std::set<std::string>& seen) {
  trace.reached_node_ids.push_back(node.id);
  for (const auto& s : node.statements) {
    if (seen.insert(s.id).second) trace.statements.push_back({s.id, s.text});
  }
  for (const auto& [gate, child] : node.children) {
    GateAnswer a = oracle.judge_gate(context, gate, tree.group);
    trace.gates.push_back({gate.id, gate.question, a});
    if (a == GateAnswer::yes) walk(child, tree, context, oracle, trace, seen);
  }
}

std::string generate_prediction(Oracle& oracle, const std::string& prompt) {
  GenerationRequest req;
  req.prompt = prompt;
  req.role = "predict";
  req.max_tokens = 256;
  return trimmed(oracle.generate(req).text);
}

// Strips the leading profile marker the extraction prompt asks for.
std::string strip_profile_marker(const std::string& text) {
  const std::string marker = "===Profile===";
  auto pos = text.find(marker);
  if (pos == std::string::npos) return trimmed(text);
  return trimmed(text.substr(pos + marker.size()));
}

std::string build_group_profile(const std::vector<Observation>& corpus, const std::string& group,
                                int block_size, Oracle& oracle) {
  std::vector<Observation> ordered = sort_chronologically(corpus);
  std::string profile;
  for (std::size_t start = 0; start < ordered.size();
       start += static_cast<std::size_t>(block_size)) {
    std::size_t stop = std::min(ordered.size(), start + static_cast<std::size_t>(block_size));
    std::vector<Observation> block(ordered.begin() + static_cast<std::ptrdiff_t>(start),
                                   ordered.begin() + static_cast<std::ptrdiff_t>(stop));
    GenerationRequest req;
    req.prompt = prompts::profile_extract(group, prompts::render_pairs(block));
    req.role = "profile";
    std::string fresh = strip_profile_marker(oracle.generate(req).text);
    if (profile.empty()) {
      profile = fresh;
    } else {
      GenerationRequest agg;
      agg.prompt = prompts::profile_aggregate(profile, fresh);
      agg.role = "profile";
      profile = trimmed(oracle.generate(agg).text);
    }
  }
  return profile;
}

}  // namespace

std::string assemble_background(const TraversalTrace& trace, std::size_t cap) {
  std::ostringstream os;
  for (const auto& g : trace.gates) {
    if (g.answer == GateAnswer::yes) os << "- Scene condition holds: " << g.question << "\n";
  }
  for (const auto& s : trace.statements) os << "- " << s.text << "\n";
  std::string out = os.str();
  if (out.size() > cap) {
    log_warn("background truncated from " + std::to_string(out.size()) + " to " +
             std::to_string(cap) + " characters");
    out.resize(cap);
  }
  return out;
}

TraversalTrace traverse(const Cdt& tree, const std::string& context, Oracle& oracle,
                        std::size_t background_cap) {
  TraversalTrace trace;
  std::set<std::string> seen;
  walk(tree.root, tree, context, oracle, trace, seen);
  trace.background = assemble_background(trace, background_cap);
  return trace;
}

json trace_to_json(const TraversalTrace& trace) {
  json gates = json::array();
  for (const auto& g : trace.gates)
    gates.push_back(json{{"gate_id", g.gate_id}, {"question", g.question},
                         {"answer", to_string(g.answer)}});
  json stmts = json::array();
  for (const auto& s : trace.statements)
    stmts.push_back(json{{"statement_id", s.id}, {"text", s.text}});
  return json{{"gates", std::move(gates)},
              {"reached_node_ids", trace.reached_node_ids},
              {"statements", std::move(stmts)},
              {"background", trace.background}};
}

std::string predict(const Cdt& tree, const std::string& context, const std::string& question,
                    Oracle& oracle, TraversalTrace* trace_out) {
  TraversalTrace trace = traverse(tree, context, oracle);
  if (trace_out != nullptr) *trace_out = trace;
  std::string q = question.empty() ? default_question(tree.group) : question;
  std::string prompt;
  if (count_statements(tree) == 0) {
    log_warn("tree for '" + tree.group + "' holds no statements; using the plain prompt");
    prompt = prompts::infer_vanilla(tree.group, context, q);
  } else {
    prompt = prompts::infer_with_background(tree.group, trace.background, context, q);
  }
  return generate_prediction(oracle, prompt);
}

const char* to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::vanilla:
      return "vanilla";
    case BaselineKind::human_profile:
      return "human_profile";
    case BaselineKind::summarization:
      return "summarization";
    case BaselineKind::rag:
      return "rag";
  }
  return "?";
}

std::optional<BaselineKind> baseline_kind_from_string(const std::string& s) {
  if (s == "vanilla") return BaselineKind::vanilla;
  if (s == "human_profile") return BaselineKind::human_profile;
  if (s == "summarization") return BaselineKind::summarization;
  if (s == "rag") return BaselineKind::rag;
  return std::nullopt;
}

std::string baseline_predict(BaselineKind kind, const std::vector<Observation>& corpus,
                             const std::string& group, const std::string& context,
                             const std::string& question, Oracle& oracle,
                             const BaselineConfig& config) {
  std::string q = question.empty() ? default_question(group) : question;

  switch (kind) {
    case BaselineKind::vanilla:
      return generate_prediction(oracle, prompts::infer_vanilla(group, context, q));

    case BaselineKind::human_profile: {
      if (config.profile_text.empty())
        fail(ErrorKind::invalid_argument, "human profile baseline needs a profile text");
      return generate_prediction(oracle,
                                 prompts::infer_with_profile(config.profile_text, context, q));
    }

    case BaselineKind::summarization: {
      if (corpus.empty())
        fail(ErrorKind::invalid_argument, "summarization baseline needs a non-empty corpus");
      if (config.summary_block < 1)
        fail(ErrorKind::config, "summary block size must be at least 1");
      std::string profile;
      if (config.profile_cache != nullptr) {
        auto it = config.profile_cache->find(group);
        if (it != config.profile_cache->end()) profile = it->second;
      }
      if (profile.empty()) {
        profile = build_group_profile(corpus, group, config.summary_block, oracle);
        if (config.profile_cache != nullptr) (*config.profile_cache)[group] = profile;
      }
      return generate_prediction(oracle, prompts::infer_with_profile(profile, context, q));
    }

    case BaselineKind::rag: {
      if (corpus.empty())
        fail(ErrorKind::invalid_argument, "retrieval baseline needs a non-empty corpus");
      if (config.rag_k < 1) fail(ErrorKind::config, "retrieval depth must be at least 1");
      std::vector<std::string> texts;
      texts.reserve(corpus.size());
      for (const auto& o : corpus) texts.push_back(o.context);
      auto vecs = oracle.embed(texts, EmbedLens::plain);
      auto qvec = oracle.embed({context}, EmbedLens::plain);
      if (vecs.size() != corpus.size() || qvec.size() != 1)
        fail(ErrorKind::oracle_protocol, "embedding batch came back with the wrong size");

      std::vector<std::pair<double, std::size_t>> ranked;
      ranked.reserve(corpus.size());
      for (std::size_t i = 0; i < corpus.size(); ++i)
        ranked.emplace_back(cosine(qvec[0].values, vecs[i].values), i);
      std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return corpus[a.second].id < corpus[b.second].id;
      });
      std::size_t take = std::min(ranked.size(), static_cast<std::size_t>(config.rag_k));
      std::vector<Observation> picked;
      picked.reserve(take);
      for (std::size_t i = 0; i < take; ++i) picked.push_back(corpus[ranked[i].second]);
      return generate_prediction(
          oracle, prompts::infer_with_examples(group, prompts::render_pairs(picked), context, q));
    }
  }
  fail(ErrorKind::internal, "unhandled baseline kind");
}

}  // namespace cdt
