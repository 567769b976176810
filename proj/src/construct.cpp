#include "cdt/construct.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "cdt/cluster.hpp"
#include "cdt/error.hpp"
#include "cdt/ground.hpp"
#include "cdt/log.hpp"
#include "cdt/prompts.hpp"
#include "cdt/rng.hpp"

namespace cdt {

using nlohmann::json;

namespace {

std::string run_generate(Oracle& oracle, const std::string& prompt, const std::string& role,
                         int max_tokens = 2048) {
  GenerationRequest req;
  req.prompt = prompt;
  req.role = role;
  req.max_tokens = max_tokens;
  return oracle.generate(req).text;
}

std::optional<std::vector<std::string>> string_array(const json& j) {
  if (!j.is_array()) return std::nullopt;
  std::vector<std::string> out;
  for (const auto& item : j) {
    if (!item.is_string()) return std::nullopt;
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::vector<HypothesisPair> zip_pairs(const std::vector<std::string>& actions,
                                      const std::vector<std::string>& gates) {
  if (actions.size() != gates.size()) {
    log_warn("hypothesis lists differ in length (" + std::to_string(actions.size()) + " vs " +
             std::to_string(gates.size()) + "); pairing the overlap");
  }
  std::vector<HypothesisPair> out;
  const std::size_t n = std::min(actions.size(), gates.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (actions[i].empty() || gates[i].empty()) continue;
    HypothesisPair p;
    p.statement_hypothesis = actions[i];
    p.gate_hypothesis = gates[i];
    out.push_back(std::move(p));
  }
  return out;
}

std::optional<std::vector<HypothesisPair>> parse_hypotheses(const std::string& text) {
  if (auto j = extract_json(text)) {
    if (j->is_object() && j->contains("action_hypotheses") &&
        j->contains("scene_check_hypotheses")) {
      auto actions = string_array((*j)["action_hypotheses"]);
      auto gates = string_array((*j)["scene_check_hypotheses"]);
      if (actions && gates) return zip_pairs(*actions, *gates);
    }
  }
  // Fallback for the assignment-style layout the prompt literally shows:
  // each name followed by a bracketed list.
  auto list_after = [&](const char* key) -> std::optional<std::vector<std::string>> {
    std::size_t pos = text.find(key);
    if (pos == std::string::npos) return std::nullopt;
    auto j = extract_json(text.substr(pos + std::string(key).size()));
    if (!j) return std::nullopt;
    return string_array(*j);
  };
  auto actions = list_after("action_hypotheses");
  auto gates = list_after("scene_check_hypotheses");
  if (actions && gates) return zip_pairs(*actions, *gates);
  return std::nullopt;
}

}  // namespace

std::vector<HypothesisPair> generate_hypotheses(const std::vector<Observation>& cluster_events,
                                                const std::vector<std::string>& established,
                                                const std::vector<std::string>& proposed_gates,
                                                const std::string& group, const std::string& topic,
                                                int k, Oracle& oracle) {
  if (cluster_events.empty()) {
    fail(ErrorKind::invalid_argument, "hypothesis generation needs a non-empty cluster");
  }
  if (k < 1) fail(ErrorKind::invalid_argument, "hypothesis count must be positive");
  const std::string prompt =
      prompts::hypothesize(group, topic, prompts::render_pairs(cluster_events),
                           prompts::render_bullet_list(established),
                           prompts::render_bullet_list(proposed_gates), k);

  auto attempt = [&](const std::string& p) { return parse_hypotheses(run_generate(oracle, p, "generate")); };
  auto clip = [&](std::vector<HypothesisPair> pairs) {
    if (pairs.size() > static_cast<std::size_t>(k)) pairs.resize(static_cast<std::size_t>(k));
    return pairs;
  };

  auto first = attempt(prompt);
  if (first && first->size() >= static_cast<std::size_t>(k)) return clip(*first);
  auto second = attempt(prompt + prompts::strict_retry_suffix());
  const auto* best = second ? &*second : (first ? &*first : nullptr);
  if (second && first && first->size() > second->size()) best = &*first;
  if (!best) {
    fail(ErrorKind::oracle_protocol, "hypothesis response unparseable after retry");
  }
  if (best->size() < static_cast<std::size_t>(k)) {
    log_warn("provider delivered " + std::to_string(best->size()) + " of " + std::to_string(k) +
             " hypothesis pairs after retry");
  }
  return clip(*best);
}

namespace {

std::optional<std::vector<HypothesisPair>> parse_summary(const std::string& text) {
  auto j = extract_json(text);
  if (!j) return std::nullopt;
  json arr;
  if (j->is_object() && j->contains("pairs") && (*j)["pairs"].is_array()) {
    arr = (*j)["pairs"];
  } else if (j->is_array()) {
    arr = *j;
  } else {
    return std::nullopt;
  }
  std::vector<HypothesisPair> out;
  for (const auto& item : arr) {
    if (!item.is_object()) return std::nullopt;
    if (!item.contains("scene_check_hypothesis") || !item.contains("action_hypothesis")) {
      return std::nullopt;
    }
    if (!item["scene_check_hypothesis"].is_string() || !item["action_hypothesis"].is_string()) {
      return std::nullopt;
    }
    HypothesisPair p;
    p.gate_hypothesis = item["scene_check_hypothesis"].get<std::string>();
    p.statement_hypothesis = item["action_hypothesis"].get<std::string>();
    p.source_cluster = "summary";
    if (p.gate_hypothesis.empty() || p.statement_hypothesis.empty()) return std::nullopt;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

std::vector<HypothesisPair> summarize_hypotheses(const std::vector<HypothesisPair>& pairs,
                                                 const std::string& group, int n_target,
                                                 int n_upper, Oracle& oracle) {
  if (pairs.empty()) {
    fail(ErrorKind::invalid_argument, "summarization needs at least one hypothesis pair");
  }
  json rendered = json::array();
  for (const auto& p : pairs) {
    rendered.push_back(json{{"scene_check_hypothesis", p.gate_hypothesis},
                            {"action_hypothesis", p.statement_hypothesis}});
  }
  const int lower = std::min<int>(n_target, static_cast<int>(pairs.size()));
  const std::string prompt =
      prompts::summarize(group, static_cast<int>(pairs.size()), rendered.dump(2), lower, n_upper);

  // The upper bound is hard; the lower bound is the request, not a protocol
  // requirement, because legitimate deduplication can shrink below it.
  auto attempt = [&](const std::string& p) -> std::optional<std::vector<HypothesisPair>> {
    auto parsed = parse_summary(run_generate(oracle, p, "generate"));
    if (!parsed || parsed->empty() || parsed->size() > static_cast<std::size_t>(n_upper)) {
      return std::nullopt;
    }
    return parsed;
  };
  auto first = attempt(prompt);
  if (first) return *first;
  auto second = attempt(prompt + prompts::strict_retry_suffix());
  if (second) return *second;
  fail(ErrorKind::oracle_protocol,
       "summarization response unparseable or out of range after retry");
}

UngatedVerdicts validate_ungated(const std::string& statement,
                                 const std::vector<Observation>& events,
                                 const std::string& group, Oracle& oracle) {
  if (events.empty()) {
    fail(ErrorKind::invalid_argument, "statement validation needs at least one event");
  }
  UngatedVerdicts result;
  std::size_t yes = 0;
  for (const auto& e : events) {
    const std::string prompt = prompts::statement_consistency(group, e.decision, statement);
    auto verdict = parse_yes_no(run_generate(oracle, prompt, "judge", 16));
    if (!verdict) {
      verdict = parse_yes_no(
          run_generate(oracle, prompt + prompts::strict_retry_suffix(), "judge", 16));
    }
    if (!verdict) {
      fail(ErrorKind::oracle_protocol,
           "consistency verdict unparseable after retry for event " + e.id);
    }
    result.by_event[e.id] = *verdict;
    if (*verdict) ++yes;
  }
  result.p_global = static_cast<double>(yes) / static_cast<double>(events.size());
  return result;
}

GatedResult validate_gated(const HypothesisPair& pair, const std::vector<Observation>& events,
                           const UngatedVerdicts& stage1, const std::string& group,
                           const HyperParams& hp, Oracle& oracle) {
  if (events.empty()) {
    fail(ErrorKind::invalid_argument, "gated validation needs at least one event");
  }
  GatedResult result;
  Gate probe;
  probe.question = pair.gate_hypothesis;
  for (const auto& e : events) {
    if (oracle.judge_gate(e.context, probe, group) == GateAnswer::yes) {
      result.routed_ids.push_back(e.id);
    }
  }
  result.broadness =
      static_cast<double>(result.routed_ids.size()) / static_cast<double>(events.size());
  if (result.broadness > hp.tau_filter) {
    result.outcome = GatedOutcome::discard;
    result.discard_reason = "gate too broad";
    return result;
  }
  if (result.routed_ids.empty()) {
    result.outcome = GatedOutcome::discard;
    result.discard_reason = "gate routed no events";
    return result;
  }
  std::size_t yes = 0;
  for (const auto& id : result.routed_ids) {
    auto it = stage1.by_event.find(id);
    if (it == stage1.by_event.end()) {
      fail(ErrorKind::internal, "missing stage-1 verdict for routed event " + id);
    }
    if (it->second) ++yes;
  }
  result.p_gated = static_cast<double>(yes) / static_cast<double>(result.routed_ids.size());
  if (result.p_gated >= hp.tau_accept_keep) {
    result.outcome = GatedOutcome::leaf_child;
  } else if (result.p_gated >= hp.tau_reject_delete) {
    if (result.routed_ids.size() >= events.size()) {
      result.outcome = GatedOutcome::discard;
      result.discard_reason = "gate routes every event";
    } else {
      result.outcome = GatedOutcome::recurse_child;
    }
  } else {
    result.outcome = GatedOutcome::discard;
    result.discard_reason = "routed precision below rejection threshold";
  }
  return result;
}

namespace {

struct BuildContext {
  const HyperParams& hp;
  Oracle& oracle;
  const std::string& group;
  std::string topic;
  const BuildOptions& opts;
  IdAllocator ids;
  std::vector<ProvenanceEvent> log;
  int next_seq = 1;
  std::uint64_t cluster_salt = 0;

  void record(const std::string& op, const std::string& node_id, const std::string& statement_id,
              json details) {
    ProvenanceEvent ev;
    ev.seq = next_seq++;
    ev.timestamp = opts.timestamp;
    ev.phase = "build";
    ev.op = op;
    ev.node_id = node_id;
    ev.statement_id = statement_id;
    ev.details = std::move(details);
    log.push_back(std::move(ev));
  }
};

std::size_t count_subtree_statements(const CdtNode& node) {
  std::size_t n = node.statements.size();
  for (const auto& child : node.children) n += count_subtree_statements(child.second);
  return n;
}

std::string dominant_domain(const std::vector<Observation>& events) {
  std::map<std::string, std::size_t> counts;
  for (const auto& e : events) ++counts[e.domain];
  std::string best;
  std::size_t best_count = 0;
  for (const auto& [domain, count] : counts) {
    if (count > best_count) {
      best = domain;
      best_count = count;
    }
  }
  return best;
}

CdtNode build_node(BuildContext& ctx, const std::vector<Observation>& events, int depth,
                   std::vector<std::string> established) {
  CdtNode node;
  node.id = ctx.ids.node_id();
  node.depth = depth;
  for (const auto& e : events) insert_routed_id(node.routed_event_ids, e.id);

  if (static_cast<int>(events.size()) < ctx.hp.min_node_size || depth >= ctx.hp.d_max ||
      events.size() < 2) {
    const char* reason = depth >= ctx.hp.d_max ? "depth limit" : "below minimum size";
    ctx.record("leaf", node.id, "", json{{"events", events.size()}, {"reason", reason}});
    return node;
  }

  log_info("building node " + node.id + " depth " + std::to_string(depth) + " over " +
           std::to_string(events.size()) + " events");

  std::vector<std::string> event_ids;
  for (const auto& e : events) event_ids.push_back(e.id);
  std::map<std::string, const Observation*> by_id;
  for (const auto& e : events) by_id[e.id] = &e;

  const std::size_t k_clusters = std::clamp<std::size_t>(
      events.size() / static_cast<std::size_t>(ctx.hp.per_centroid_m), 2, 8);

  std::vector<std::pair<std::string, ObservationCluster>> clusters;
  for (int r = 1; r <= ctx.hp.rounds_r; ++r) {
    auto vectors = composite_embed(events, ctx.group, r, ctx.oracle);
    auto round_clusters =
        cluster_round(vectors, event_ids, k_clusters, static_cast<std::size_t>(ctx.hp.per_centroid_m),
                      mix_seed(ctx.opts.seed, ++ctx.cluster_salt), r);
    for (std::size_t c = 0; c < round_clusters.size(); ++c) {
      clusters.emplace_back("r" + std::to_string(r) + ".c" + std::to_string(c),
                            std::move(round_clusters[c]));
    }
  }

  std::vector<HypothesisPair> all_pairs;
  std::vector<std::string> proposed_gates;
  for (const auto& [label, cluster] : clusters) {
    std::vector<Observation> cluster_events;
    for (const auto& id : cluster.member_ids) cluster_events.push_back(*by_id.at(id));
    auto pairs = generate_hypotheses(cluster_events, established, proposed_gates, ctx.group,
                                     ctx.topic, ctx.hp.hypotheses_k, ctx.oracle);
    for (auto& p : pairs) {
      p.source_cluster = label;
      proposed_gates.push_back(p.gate_hypothesis);
      all_pairs.push_back(std::move(p));
    }
  }
  if (all_pairs.empty()) {
    log_warn("node " + node.id + ": no hypotheses generated; leaving node bare");
    ctx.record("leaf", node.id, "", json{{"events", events.size()}, {"reason", "no hypotheses"}});
    return node;
  }

  auto candidates =
      summarize_hypotheses(all_pairs, ctx.group, ctx.opts.n_target, ctx.opts.n_upper, ctx.oracle);

  for (const auto& cand : candidates) {
    auto stage1 = validate_ungated(cand.statement_hypothesis, events, ctx.group, ctx.oracle);
    std::size_t yes_total = 0;
    for (const auto& [id, v] : stage1.by_event) {
      if (v) ++yes_total;
    }
    if (stage1.p_global >= ctx.hp.tau_accept_keep) {
      Statement st;
      st.id = ctx.ids.statement_id();
      st.text = cand.statement_hypothesis;
      st.origin = StatementOrigin::constructed;
      st.created_at_phase = "build";
      ctx.record("install_statement", node.id, st.id,
                 json{{"mode", "unconditional"},
                      {"yes", yes_total},
                      {"total", events.size()},
                      {"p", stage1.p_global},
                      {"text", st.text}});
      node.statements.push_back(std::move(st));
      established.push_back(cand.statement_hypothesis);
      continue;
    }

    auto gated = validate_gated(cand, events, stage1, ctx.group, ctx.hp, ctx.oracle);
    if (gated.outcome == GatedOutcome::discard) {
      ctx.record("discard_hypothesis", node.id, "",
                 json{{"reason", gated.discard_reason.empty() ? "failed both stages"
                                                              : gated.discard_reason},
                      {"statement", cand.statement_hypothesis},
                      {"gate", cand.gate_hypothesis},
                      {"p_global", stage1.p_global},
                      {"routed", gated.routed_ids.size()},
                      {"total", events.size()}});
      continue;
    }

    std::vector<Observation> routed_events;
    {
      std::set<std::string> routed_set(gated.routed_ids.begin(), gated.routed_ids.end());
      for (const auto& e : events) {
        if (routed_set.count(e.id)) routed_events.push_back(e);
      }
    }
    Gate gate;
    gate.id = ctx.ids.gate_id();
    gate.question = cand.gate_hypothesis;

    if (gated.outcome == GatedOutcome::leaf_child) {
      CdtNode child;
      child.id = ctx.ids.node_id();
      child.depth = depth + 1;
      for (const auto& e : routed_events) insert_routed_id(child.routed_event_ids, e.id);
      Statement st;
      st.id = ctx.ids.statement_id();
      st.text = cand.statement_hypothesis;
      st.origin = StatementOrigin::constructed;
      st.created_at_phase = "build";
      std::size_t yes_routed = 0;
      for (const auto& id : gated.routed_ids) {
        if (stage1.by_event.at(id)) ++yes_routed;
      }
      ctx.record("accept_gate", node.id, "",
                 json{{"gate_id", gate.id},
                      {"question", gate.question},
                      {"routed", gated.routed_ids.size()},
                      {"total", events.size()},
                      {"broadness", gated.broadness},
                      {"child", child.id}});
      ctx.record("install_statement", child.id, st.id,
                 json{{"mode", "gated"},
                      {"yes", yes_routed},
                      {"total", gated.routed_ids.size()},
                      {"p", gated.p_gated},
                      {"text", st.text}});
      child.statements.push_back(st);
      child.grounding = compute_matrix(child.id, ctx.group, routed_events, child.statements,
                                       ctx.oracle);
      node.children.emplace_back(std::move(gate), std::move(child));
      continue;
    }

    // Ambiguous precision: hand the routed subset to a fresh subtree. The
    // statement itself is dropped; only its gate survives, and only if the
    // subtree finds something.
    ctx.record("recurse_gate", node.id, "",
               json{{"gate_id", gate.id},
                    {"question", gate.question},
                    {"routed", gated.routed_ids.size()},
                    {"total", events.size()},
                    {"broadness", gated.broadness},
                    {"p_gated", gated.p_gated}});
    CdtNode child = build_node(ctx, routed_events, depth + 1, established);
    if (count_subtree_statements(child) == 0) {
      ctx.record("prune_gate", node.id, "",
                 json{{"gate_id", gate.id}, {"child", child.id}, {"reason", "empty subtree"}});
    } else {
      node.children.emplace_back(std::move(gate), std::move(child));
    }
  }

  if (!node.statements.empty()) {
    node.grounding = compute_matrix(node.id, ctx.group, events, node.statements, ctx.oracle);
  }
  return node;
}

}  // namespace

Cdt build_tree(const std::vector<Observation>& corpus, const std::string& group,
               const HyperParams& hp, Oracle& oracle, const BuildOptions& opts) {
  hp.validate();
  if (corpus.empty()) {
    fail(ErrorKind::invalid_argument, "tree construction needs a non-empty corpus");
  }
  {
    std::set<std::string> seen;
    for (const auto& e : corpus) {
      if (!seen.insert(e.id).second) {
        fail(ErrorKind::invalid_argument, "duplicate event id in corpus: " + e.id);
      }
    }
  }
  std::vector<Observation> ordered = sort_chronologically(corpus);
  BuildContext ctx{hp, oracle, group, dominant_domain(ordered), opts, {}, {}, 1, 0};
  Cdt tree;
  tree.group = group;
  tree.hyperparams = hp;
  tree.root = build_node(ctx, ordered, 0, {});
  tree.provenance_log = std::move(ctx.log);
  return tree;
}

namespace {

void outline_node(const CdtNode& node, const std::string& indent, std::ostringstream& os) {
  if (node.statements.empty() && node.children.empty()) {
    os << indent << "(no statements)\n";
    return;
  }
  for (const auto& s : node.statements) os << indent << "- " << s.text << "\n";
  for (const auto& [gate, child] : node.children) {
    os << indent << "If: " << gate.question << "\n";
    outline_node(child, indent + "  ", os);
  }
}

}  // namespace

std::string render_tree_outline(const Cdt& tree) {
  std::ostringstream os;
  outline_node(tree.root, "", os);
  return os.str();
}

Cdt build_tree_with_selection(const std::vector<Observation>& corpus, const std::string& group,
                              const HyperParams& hp, Oracle& oracle, const BuildOptions& opts) {
  if (hp.candidates_c < 1) {
    fail(ErrorKind::invalid_argument, "candidate count must be at least 1");
  }
  if (hp.candidates_c == 1) return build_tree(corpus, group, hp, oracle, opts);

  std::vector<Cdt> candidates;
  std::vector<std::size_t> original_index;
  std::vector<std::string> build_errors;
  for (int i = 0; i < hp.candidates_c; ++i) {
    BuildOptions candidate_opts = opts;
    candidate_opts.seed = mix_seed(opts.seed, static_cast<std::uint64_t>(i) + 1);
    try {
      candidates.push_back(build_tree(corpus, group, hp, oracle, candidate_opts));
      original_index.push_back(static_cast<std::size_t>(i));
    } catch (const Error& e) {
      build_errors.push_back("candidate " + std::to_string(i) + ": " + e.what());
      log_warn("candidate build failed: " + build_errors.back());
    }
  }
  if (candidates.empty()) {
    std::string joined;
    for (const auto& e : build_errors) joined += (joined.empty() ? "" : "; ") + e;
    fail(ErrorKind::data, "all candidate builds failed: " + joined);
  }
  if (candidates.size() == 1) return std::move(candidates.front());

  std::vector<int> votes(candidates.size(), 0);
  for (int round = 0; round < hp.voting_rounds; ++round) {
    SplitMix64 rng(mix_seed(opts.seed, 1000 + static_cast<std::uint64_t>(round)));
    std::vector<std::size_t> order(candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    std::ostringstream blocks;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      blocks << "Candidate " << (pos + 1) << ":\n"
             << render_tree_outline(candidates[order[pos]]) << "\n";
    }
    const std::string prompt =
        prompts::select_candidate(group, static_cast<int>(candidates.size()), blocks.str());
    auto pick = [&](const std::string& p) -> std::optional<int> {
      auto j = extract_json(run_generate(oracle, p, "generate"));
      if (!j || !j->is_object() || !j->contains("best_candidate_index")) return std::nullopt;
      const auto& idx = (*j)["best_candidate_index"];
      if (!idx.is_number_integer()) return std::nullopt;
      int v = idx.get<int>();
      if (v < 1 || v > static_cast<int>(candidates.size())) return std::nullopt;
      return v;
    };
    auto choice = pick(prompt);
    if (!choice) choice = pick(prompt + prompts::strict_retry_suffix());
    if (!choice) {
      fail(ErrorKind::oracle_protocol, "candidate selection response unparseable after retry");
    }
    ++votes[order[static_cast<std::size_t>(*choice - 1)]];
  }

  std::size_t winner = 0;
  for (std::size_t i = 1; i < votes.size(); ++i) {
    if (votes[i] > votes[winner]) winner = i;
  }
  Cdt chosen = std::move(candidates[winner]);
  ProvenanceEvent ev;
  ev.seq = chosen.provenance_log.empty() ? 1 : chosen.provenance_log.back().seq + 1;
  ev.timestamp = opts.timestamp;
  ev.phase = "build";
  ev.op = "select_candidate";
  ev.node_id = chosen.root.id;
  json tally = json::array();
  for (std::size_t i = 0; i < votes.size(); ++i) {
    tally.push_back(json{{"candidate", original_index[i]}, {"votes", votes[i]}});
  }
  ev.details = json{{"winner", original_index[winner]},
                    {"rounds", hp.voting_rounds},
                    {"tally", tally}};
  chosen.provenance_log.push_back(std::move(ev));
  return chosen;
}

}  // namespace cdt
