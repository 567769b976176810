#include "cdt/adapt.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "cdt/error.hpp"
#include "cdt/ground.hpp"
#include "cdt/log.hpp"
#include "cdt/prompts.hpp"

namespace cdt {

using nlohmann::json;

const char* to_string(StatementFate f) {
  switch (f) {
    case StatementFate::keep:
      return "Keep";
    case StatementFate::keep_insufficient:
      return "KeepInsufficient";
    case StatementFate::remove:
      return "Delete";
    case StatementFate::demote:
      return "Demote";
  }
  return "?";
}

StatementFate classify_statement(const StatementStats& stats, const HyperParams& hp) {
  if (stats.effective_n() < hp.tau_min) return StatementFate::keep_insufficient;
  auto p = stats.precision();
  if (!p) return StatementFate::keep_insufficient;
  if (*p >= hp.tau_accept_keep) return StatementFate::keep;
  if (*p < hp.tau_reject_delete) return StatementFate::remove;
  return StatementFate::demote;
}

namespace {

std::string trimmed(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

json precision_json(const StatementStats& st) {
  auto p = st.precision();
  return p ? json(*p) : json(nullptr);
}

StatementOutcome make_outcome(const Statement& stmt, const StatementStats& st,
                              std::string detail = "") {
  StatementOutcome out;
  out.statement_id = stmt.id;
  out.text = stmt.text;
  out.p = st.precision();
  out.n = st.effective_n();
  out.detail = std::move(detail);
  return out;
}

// Forwards every call and keeps per-operation tallies for the run report.
class TallyOracle final : public Oracle {
 public:
  explicit TallyOracle(Oracle& inner) : inner_(inner) {}

  GenerationResponse generate(const GenerationRequest& req) override {
    ++counts.generate;
    return inner_.generate(req);
  }
  GateAnswer judge_gate(const std::string& scene, const Gate& gate,
                        const std::string& group) override {
    ++counts.judge_gate;
    return inner_.judge_gate(scene, gate, group);
  }
  std::vector<EvidenceLabel> relate_batch(const std::string& group, const std::string& decision,
                                          const std::vector<Statement>& statements) override {
    ++counts.relate_batch;
    return inner_.relate_batch(group, decision, statements);
  }
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                     EmbedLens lens) override {
    ++counts.embed;
    return inner_.embed(texts, lens);
  }

  OracleCallCounts counts;

 private:
  Oracle& inner_;
};

struct AdaptContext {
  const HyperParams& hp;
  Oracle& oracle;
  std::string group;
  const AdaptOptions& opts;
  std::map<std::string, const Observation*> by_id;
  IdAllocator ids;
  std::vector<ProvenanceEvent>* log = nullptr;
  int next_seq = 1;
  AdaptReport* report = nullptr;

  void record(const std::string& op, const std::string& node_id, const std::string& statement_id,
              json details) {
    ProvenanceEvent ev;
    ev.seq = next_seq++;
    ev.timestamp = opts.timestamp;
    ev.phase = opts.phase;
    ev.op = op;
    ev.node_id = node_id;
    ev.statement_id = statement_id;
    ev.details = std::move(details);
    log->push_back(std::move(ev));
  }

  const Observation& obs(const std::string& id) const {
    auto it = by_id.find(id);
    if (it == by_id.end())
      fail(ErrorKind::data, "no observation text available for event '" + id +
                                "'; the historical corpus must cover every event in the tree");
    return *it->second;
  }

  std::vector<Observation> obs_list(const std::vector<std::string>& event_ids) const {
    std::vector<Observation> out;
    out.reserve(event_ids.size());
    for (const auto& id : event_ids) out.push_back(obs(id));
    return out;
  }
};

bool ask_yes_no(AdaptContext& ctx, const std::string& prompt, const std::string& what) {
  GenerationRequest req;
  req.prompt = prompt;
  req.role = "judge";
  req.max_tokens = 16;
  if (auto v = parse_yes_no(ctx.oracle.generate(req).text)) return *v;
  GenerationRequest retry = req;
  retry.prompt = prompt + "\n\n" + prompts::strict_retry_suffix();
  if (auto v = parse_yes_no(ctx.oracle.generate(retry).text)) return *v;
  fail(ErrorKind::oracle_protocol, what + " response unparseable after retry");
}

// Pulls a list of non-empty strings out of a model response: either a bare
// JSON array or an object holding one under `key`.
std::optional<std::vector<std::string>> parse_string_list(const std::string& text,
                                                          const std::string& key) {
  auto j = extract_json(text);
  if (!j) return std::nullopt;
  const json* arr = nullptr;
  if (j->is_array()) {
    arr = &*j;
  } else if (j->is_object() && j->contains(key) && (*j)[key].is_array()) {
    arr = &(*j)[key];
  } else {
    return std::nullopt;
  }
  std::vector<std::string> out;
  for (const auto& item : *arr) {
    if (!item.is_string()) return std::nullopt;
    std::string s = trimmed(item.get<std::string>());
    if (!s.empty()) out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> generate_string_list(AdaptContext& ctx, const std::string& prompt,
                                              const std::string& key, const std::string& what) {
  GenerationRequest req;
  req.prompt = prompt;
  if (auto v = parse_string_list(ctx.oracle.generate(req).text, key); v && !v->empty()) return *v;
  GenerationRequest retry = req;
  retry.prompt = prompt + "\n\n" + prompts::strict_retry_suffix();
  if (auto v = parse_string_list(ctx.oracle.generate(retry).text, key)) return *v;
  fail(ErrorKind::oracle_protocol, what + " response unparseable after retry");
}

// Column tally restricted to a subset of rows.
StatementStats stats_over(const GroundingMatrix& m, const std::string& statement_id,
                          const std::vector<std::string>& event_subset) {
  auto col = m.statement_col(statement_id);
  if (!col) fail(ErrorKind::internal, "statement '" + statement_id + "' has no evidence column");
  std::set<std::string> want(event_subset.begin(), event_subset.end());
  StatementStats st;
  for (std::size_t r = 0; r < m.event_ids.size(); ++r) {
    if (!want.count(m.event_ids[r])) continue;
    switch (m.labels[r][*col]) {
      case EvidenceLabel::sup:
        ++st.n_sup;
        break;
      case EvidenceLabel::con:
        ++st.n_con;
        break;
      case EvidenceLabel::irr:
        ++st.n_irr;
        break;
    }
  }
  return st;
}

void remove_statement_column(GroundingMatrix& m, const std::string& statement_id) {
  auto col = m.statement_col(statement_id);
  if (!col) return;
  m.statement_ids.erase(m.statement_ids.begin() + static_cast<std::ptrdiff_t>(*col));
  for (auto& row : m.labels) row.erase(row.begin() + static_cast<std::ptrdiff_t>(*col));
  if (m.statement_ids.empty()) m = GroundingMatrix{};
}

void remove_statement(CdtNode& node, const std::string& statement_id) {
  node.statements.erase(std::remove_if(node.statements.begin(), node.statements.end(),
                                       [&](const Statement& s) { return s.id == statement_id; }),
                        node.statements.end());
  remove_statement_column(node.grounding, statement_id);
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.count(x);
  std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::string format_ratio(const StatementStats& st) {
  std::ostringstream os;
  auto p = st.precision();
  if (p) {
    os.setf(std::ios::fixed);
    os.precision(2);
    os << *p;
  } else {
    os << "undefined";
  }
  os << " (" << st.n_sup << " of " << st.effective_n() << " graded events consistent)";
  return os.str();
}

// One statement awaiting push-down, with its evidence snapshot taken before
// any columns move.
struct DemotionCase {
  Statement stmt;
  StatementStats stats;
  std::set<std::string> sup;
  std::set<std::string> con;
  bool resolved = false;
};

struct ChildArrivals {
  std::vector<Observation> events;
  std::set<std::string> event_ids;
  std::set<std::string> statement_ids;  // statements pushed down this run
};

void append_copied_column(GroundingMatrix& child_m, const GroundingMatrix& parent_m,
                          const std::string& statement_id) {
  auto col = parent_m.statement_col(statement_id);
  if (!col) fail(ErrorKind::internal, "statement '" + statement_id + "' has no evidence column");
  child_m.statement_ids.push_back(statement_id);
  for (std::size_t r = 0; r < child_m.event_ids.size(); ++r) {
    auto prow = parent_m.event_row(child_m.event_ids[r]);
    if (!prow)
      fail(ErrorKind::internal,
           "event '" + child_m.event_ids[r] + "' missing from the parent evidence grid");
    child_m.labels[r].push_back(parent_m.labels[*prow][*col]);
  }
}

void process_node(AdaptContext& ctx, CdtNode& node, const std::vector<Observation>& arrivals,
                  const std::set<std::string>& skip_statement_ids,
                  const std::vector<std::string>& gate_path);

// Step through the push-down pipeline for every borderline statement at one
// node. Children created here are fully up to date and are not revisited by
// the surrounding recursion.
void demote_statements(AdaptContext& ctx, CdtNode& node, std::size_t original_children,
                       std::vector<DemotionCase>& cases, std::vector<ChildArrivals>& per_child,
                       NodeReport& nr) {
  const std::vector<std::string> node_rows = node.grounding.event_ids;

  // First try the children that already exist: if one captures most of the
  // supporting evidence and the statement grades well there, move it down.
  for (auto& dc : cases) {
    int best = -1;
    StatementStats best_stats;
    double best_p = -1.0;
    for (std::size_t ci = 0; ci < original_children; ++ci) {
      const CdtNode& child = node.children[ci].second;
      std::size_t captured = 0;
      for (const auto& id : dc.sup)
        if (contains_id(child.routed_event_ids, id)) ++captured;
      if (captured * 2 < dc.sup.size()) continue;
      StatementStats cs = stats_over(node.grounding, dc.stmt.id, child.routed_event_ids);
      double pc = cs.precision().value_or(-1.0);
      if (pc > best_p) {
        best_p = pc;
        best = static_cast<int>(ci);
        best_stats = cs;
      }
    }
    if (best < 0 || best_p < ctx.hp.tau_accept_keep) continue;

    auto& [gate, child] = node.children[static_cast<std::size_t>(best)];
    // The child's grid still holds only its pre-arrival rows; copy the labels
    // it needs, then let the recursion grade the arrivals fresh.
    if (child.grounding.statement_ids.empty()) {
      child.grounding = GroundingMatrix{};
      child.grounding.node_id = child.id;
      for (const auto& id : child.routed_event_ids) {
        if (per_child[static_cast<std::size_t>(best)].event_ids.count(id)) continue;
        child.grounding.event_ids.push_back(id);
        child.grounding.labels.emplace_back();
      }
    }
    append_copied_column(child.grounding, node.grounding, dc.stmt.id);
    Statement moved = dc.stmt;
    moved.origin = StatementOrigin::demoted;
    child.statements.push_back(moved);
    per_child[static_cast<std::size_t>(best)].statement_ids.insert(moved.id);

    ctx.record("demote_statement", node.id, dc.stmt.id,
               json{{"outcome", "moved_to_child"},
                    {"child", child.id},
                    {"p", best_p},
                    {"n", best_stats.effective_n()},
                    {"sup_total", dc.sup.size()}});
    nr.demoted.push_back(make_outcome(dc.stmt, best_stats, "moved to " + child.id));
    remove_statement(node, dc.stmt.id);
    dc.resolved = true;
  }

  // Statements no existing child can take get a shot at a new gate. Skipped
  // at the depth ceiling: a new child would not be allowed to exist there.
  bool depth_ok = node.depth < ctx.hp.d_max;
  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < cases.size(); ++i)
    if (!cases[i].resolved) open.push_back(i);

  if (depth_ok && !open.empty()) {
    // Statements with strongly overlapping support share one generation call
    // and can end up behind the same gate.
    std::vector<std::size_t> uf(open.size());
    for (std::size_t i = 0; i < uf.size(); ++i) uf[i] = i;
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
      while (uf[x] != x) x = uf[x] = uf[uf[x]];
      return x;
    };
    for (std::size_t i = 0; i < open.size(); ++i)
      for (std::size_t j = i + 1; j < open.size(); ++j)
        if (jaccard(cases[open[i]].sup, cases[open[j]].sup) >= 0.5) uf[find(i)] = find(j);

    std::vector<std::vector<std::size_t>> components;
    std::map<std::size_t, std::size_t> comp_of;
    for (std::size_t i = 0; i < open.size(); ++i) {
      std::size_t r = find(i);
      auto it = comp_of.find(r);
      if (it == comp_of.end()) {
        comp_of.emplace(r, components.size());
        components.push_back({open[i]});
      } else {
        components[it->second].push_back(open[i]);
      }
    }

    // Gate routing is judged once per distinct candidate question.
    std::map<std::string, std::vector<std::string>> routed_cache;
    auto routed_for = [&](const std::string& question) -> const std::vector<std::string>& {
      auto it = routed_cache.find(question);
      if (it != routed_cache.end()) return it->second;
      Gate probe;
      probe.question = question;
      std::vector<std::string> routed;
      for (const auto& id : node_rows)
        if (ctx.oracle.judge_gate(ctx.obs(id).context, probe, ctx.group) == GateAnswer::yes)
          routed.push_back(id);
      return routed_cache.emplace(question, std::move(routed)).first->second;
    };

    for (const auto& comp : components) {
      std::set<std::string> sup_union, con_union;
      std::ostringstream text_lines, ratio_lines;
      for (std::size_t k = 0; k < comp.size(); ++k) {
        const DemotionCase& dc = cases[comp[k]];
        if (k) {
          text_lines << "\n";
          ratio_lines << "; ";
        }
        text_lines << dc.stmt.text;
        ratio_lines << format_ratio(dc.stats);
        sup_union.insert(dc.sup.begin(), dc.sup.end());
        con_union.insert(dc.con.begin(), dc.con.end());
      }
      std::vector<Observation> sup_events, con_events;
      for (const auto& id : node_rows) {
        if (sup_union.count(id)) sup_events.push_back(ctx.obs(id));
        if (con_union.count(id)) con_events.push_back(ctx.obs(id));
      }
      std::vector<std::string> candidates = generate_string_list(
          ctx,
          prompts::demotion_gates(ctx.group, text_lines.str(), ratio_lines.str(),
                                  prompts::render_pairs(sup_events),
                                  prompts::render_pairs(con_events)),
          "candidates", "gate candidate");

      // candidate question -> cases that accepted it, with their graded stats
      std::map<std::string, std::vector<std::pair<std::size_t, StatementStats>>> accepted;
      for (std::size_t idx : comp) {
        DemotionCase& dc = cases[idx];
        for (const auto& question : candidates) {
          if (!ask_yes_no(ctx, prompts::gate_semantic(ctx.group, dc.stmt.text, question),
                          "gate fit"))
            continue;
          const auto& routed = routed_for(question);
          std::size_t captured = 0;
          for (const auto& id : dc.sup)
            if (std::find(routed.begin(), routed.end(), id) != routed.end()) ++captured;
          if (captured * 2 < dc.sup.size()) continue;
          StatementStats cs = stats_over(node.grounding, dc.stmt.id, routed);
          auto pc = cs.precision();
          if (!pc || *pc < ctx.hp.tau_accept_keep) continue;
          accepted[question].emplace_back(idx, cs);
          dc.resolved = true;
          break;
        }
      }

      // Children come into being in candidate order so reruns with the same
      // transcript produce byte-identical trees.
      for (const auto& question : candidates) {
        auto it = accepted.find(question);
        if (it == accepted.end()) continue;
        const auto& routed = routed_for(question);

        Gate gate;
        gate.id = ctx.ids.gate_id();
        gate.question = question;
        CdtNode child;
        child.id = ctx.ids.node_id();
        child.depth = node.depth + 1;
        child.routed_event_ids = routed;
        std::sort(child.routed_event_ids.begin(), child.routed_event_ids.end());
        child.grounding.node_id = child.id;
        child.grounding.event_ids = routed;
        child.grounding.labels.assign(routed.size(), {});
        for (auto& [idx, cs] : it->second) {
          Statement moved = cases[idx].stmt;
          moved.origin = StatementOrigin::demoted;
          child.statements.push_back(moved);
          append_copied_column(child.grounding, node.grounding, moved.id);
        }

        ctx.record("create_child", node.id, "",
                   json{{"child", child.id},
                        {"gate_id", gate.id},
                        {"question", question},
                        {"routed", routed.size()},
                        {"total", node_rows.size()},
                        {"source", "demotion"}});
        for (auto& [idx, cs] : it->second) {
          const DemotionCase& dc = cases[idx];
          ctx.record("demote_statement", node.id, dc.stmt.id,
                     json{{"outcome", "new_child"},
                          {"child", child.id},
                          {"p", precision_json(cs)},
                          {"n", cs.effective_n()},
                          {"sup_total", dc.sup.size()}});
          nr.demoted.push_back(make_outcome(dc.stmt, cs, "moved to new child " + child.id));
          remove_statement(node, dc.stmt.id);
        }
        nr.new_children.push_back(child.id);
        node.children.emplace_back(std::move(gate), std::move(child));
      }
    }
  }

  // Whatever survived neither path is gone; the provenance entry is its
  // tombstone.
  for (auto& dc : cases) {
    if (dc.resolved) continue;
    ctx.record("delete_statement", node.id, dc.stmt.id,
               json{{"reason", "demotion failed"},
                    {"p", precision_json(dc.stats)},
                    {"n", dc.stats.effective_n()},
                    {"n_sup", dc.stats.n_sup},
                    {"n_con", dc.stats.n_con},
                    {"n_irr", dc.stats.n_irr},
                    {"text", dc.stmt.text}});
    nr.demoted.push_back(make_outcome(dc.stmt, dc.stats, "no viable gate; deleted"));
    remove_statement(node, dc.stmt.id);
  }
}

void add_statements(AdaptContext& ctx, CdtNode& node, const std::vector<std::string>& gate_path,
                    NodeReport& nr) {
  std::vector<std::string> surviving;
  for (const auto& s : node.statements) surviving.push_back(s.id);
  std::vector<std::string> uncovered;
  if (node.statements.empty())
    uncovered = node.routed_event_ids;
  else
    uncovered = uncovered_events(node.grounding, surviving);
  if (uncovered.empty() || static_cast<int>(uncovered.size()) < ctx.hp.tau_min) return;

  std::ostringstream path_text;
  path_text << "Root";
  for (const auto& q : gate_path) path_text << "\n-> Yes: \"" << q << "\"";
  path_text << "\n";
  std::vector<std::string> existing;
  for (const auto& s : node.statements) existing.push_back(s.text);

  std::vector<std::string> texts = generate_string_list(
      ctx,
      prompts::add_statements(ctx.group, path_text.str(),
                              prompts::render_pairs(ctx.obs_list(uncovered)),
                              prompts::render_bullet_list(existing)),
      "statements", "new statement");
  if (texts.empty()) return;

  std::vector<Statement> candidates;
  for (const auto& t : texts) {
    Statement s;
    s.id = ctx.ids.statement_id();
    s.text = t;
    s.origin = StatementOrigin::adapted_add;
    s.created_at_phase = ctx.opts.phase;
    candidates.push_back(std::move(s));
  }

  // Candidates are graded against every event at the node, not only the
  // uncovered ones, so acceptance uses the same evidence a later run would.
  bool had_matrix = !node.grounding.statement_ids.empty();
  if (had_matrix) {
    extend_matrix(node.grounding, ctx.group, {}, candidates, ctx.obs_list(node.grounding.event_ids),
                  node.statements, ctx.oracle);
  } else {
    node.grounding =
        compute_matrix(node.id, ctx.group, ctx.obs_list(node.routed_event_ids), candidates,
                       ctx.oracle);
  }

  for (const auto& cand : candidates) {
    StatementStats st = stats_for(node.grounding, cand.id);
    auto p = st.precision();
    if (p && *p >= ctx.hp.tau_accept_keep && st.effective_n() >= ctx.hp.tau_min) {
      node.statements.push_back(cand);
      ctx.record("add_statement", node.id, cand.id,
                 json{{"text", cand.text},
                      {"p", *p},
                      {"n", st.effective_n()},
                      {"uncovered", uncovered.size()}});
      nr.added.push_back(make_outcome(cand, st));
    } else {
      remove_statement_column(node.grounding, cand.id);
      ctx.record("discard_candidate", node.id, "",
                 json{{"text", cand.text},
                      {"p", precision_json(st)},
                      {"n", st.effective_n()},
                      {"uncovered", uncovered.size()}});
    }
  }
  if (node.statements.empty()) node.grounding = GroundingMatrix{};
}

void process_node(AdaptContext& ctx, CdtNode& node, const std::vector<Observation>& arrivals,
                  const std::set<std::string>& skip_statement_ids,
                  const std::vector<std::string>& gate_path) {
  NodeReport nr;
  nr.node_id = node.id;

  // New events join the node's evidence base before anything is judged.
  std::size_t prior_routed = node.routed_event_ids.size();
  for (const auto& a : arrivals) insert_routed_id(node.routed_event_ids, a.id);
  if (!node.statements.empty()) {
    if (node.grounding.statement_ids.empty()) {
      if (prior_routed > 0)
        fail(ErrorKind::data, "node '" + node.id +
                                  "' carries statements but no evidence rows for its events");
      if (!arrivals.empty())
        node.grounding =
            compute_matrix(node.id, ctx.group, arrivals, node.statements, ctx.oracle);
    } else if (!arrivals.empty()) {
      extend_matrix(node.grounding, ctx.group, arrivals, {}, {}, node.statements, ctx.oracle);
    }
  }

  // Route the arrivals onward so subtree evidence is current before any
  // push-down decisions look at it.
  std::size_t original_children = node.children.size();
  std::vector<ChildArrivals> per_child(original_children);
  for (const auto& a : arrivals) {
    for (std::size_t ci = 0; ci < original_children; ++ci) {
      auto& [gate, child] = node.children[ci];
      if (ctx.oracle.judge_gate(a.context, gate, ctx.group) == GateAnswer::yes) {
        per_child[ci].events.push_back(a);
        per_child[ci].event_ids.insert(a.id);
        insert_routed_id(child.routed_event_ids, a.id);
      }
    }
  }

  std::vector<DemotionCase> pending;
  const std::vector<Statement> snapshot = node.statements;
  for (const Statement& stmt : snapshot) {
    if (skip_statement_ids.count(stmt.id)) continue;
    StatementStats st = node.grounding.statement_ids.empty()
                            ? StatementStats{}
                            : stats_for(node.grounding, stmt.id);
    switch (classify_statement(st, ctx.hp)) {
      case StatementFate::keep:
        ctx.record("keep_statement", node.id, stmt.id,
                   json{{"p", precision_json(st)}, {"n", st.effective_n()}});
        nr.kept.push_back(make_outcome(stmt, st));
        break;
      case StatementFate::keep_insufficient:
        ctx.record("keep_insufficient", node.id, stmt.id,
                   json{{"p", precision_json(st)}, {"n", st.effective_n()}});
        nr.kept_insufficient.push_back(make_outcome(stmt, st));
        break;
      case StatementFate::remove:
        ctx.record("delete_statement", node.id, stmt.id,
                   json{{"reason", "low precision"},
                        {"p", precision_json(st)},
                        {"n", st.effective_n()},
                        {"n_sup", st.n_sup},
                        {"n_con", st.n_con},
                        {"n_irr", st.n_irr},
                        {"text", stmt.text}});
        nr.deleted.push_back(make_outcome(stmt, st));
        remove_statement(node, stmt.id);
        break;
      case StatementFate::demote: {
        DemotionCase dc;
        dc.stmt = stmt;
        dc.stats = st;
        auto col = node.grounding.statement_col(stmt.id);
        if (!col)
          fail(ErrorKind::internal, "statement '" + stmt.id + "' has no evidence column");
        for (std::size_t r = 0; r < node.grounding.event_ids.size(); ++r) {
          if (node.grounding.labels[r][*col] == EvidenceLabel::sup)
            dc.sup.insert(node.grounding.event_ids[r]);
          else if (node.grounding.labels[r][*col] == EvidenceLabel::con)
            dc.con.insert(node.grounding.event_ids[r]);
        }
        pending.push_back(std::move(dc));
        break;
      }
    }
  }

  if (!pending.empty()) demote_statements(ctx, node, original_children, pending, per_child, nr);

  add_statements(ctx, node, gate_path, nr);

  ctx.report->nodes.push_back(std::move(nr));

  // Only the children that predate this run need a pass of their own; the
  // ones the push-down step just created are already fully graded.
  for (std::size_t ci = 0; ci < original_children; ++ci) {
    auto& [gate, child] = node.children[ci];
    std::vector<std::string> path = gate_path;
    path.push_back(gate.question);
    process_node(ctx, child, per_child[ci].events, per_child[ci].statement_ids, path);
  }
}

void check_tree(const Cdt& tree, const char* when, ErrorKind kind) {
  auto problems = validate_tree(tree);
  if (problems.empty()) return;
  std::ostringstream os;
  os << "tree failed validation " << when << ": " << problems.front();
  if (problems.size() > 1) os << " (+" << problems.size() - 1 << " more)";
  fail(kind, os.str());
}

}  // namespace

std::pair<Cdt, AdaptReport> adapt_tree(const Cdt& tree, const std::vector<Observation>& d_new,
                                       const std::vector<Observation>& history, Oracle& oracle,
                                       const HyperParams& hp, const AdaptOptions& opts) {
  hp.validate();
  if (d_new.empty()) fail(ErrorKind::invalid_argument, "adaptation needs new observations");
  check_tree(tree, "before adaptation", ErrorKind::data);

  std::set<std::string> seen;
  for (const auto& o : d_new) {
    if (o.group != tree.group)
      fail(ErrorKind::data, "observation '" + o.id + "' belongs to group '" + o.group +
                                "', tree is for '" + tree.group + "'");
    if (!seen.insert(o.id).second)
      fail(ErrorKind::data, "duplicate observation id '" + o.id + "' in the new batch");
    if (contains_id(tree.root.routed_event_ids, o.id))
      fail(ErrorKind::data, "observation '" + o.id + "' is already part of the tree");
  }

  Cdt out = tree;
  AdaptReport report;
  TallyOracle tally(oracle);

  AdaptContext ctx{hp, tally, out.group, opts, {}, IdAllocator::scan(out),
                   &out.provenance_log, 1, &report};
  for (const auto& o : history) ctx.by_id.emplace(o.id, &o);
  for (const auto& o : d_new) {
    if (!ctx.by_id.emplace(o.id, &o).second)
      fail(ErrorKind::data, "observation '" + o.id + "' appears in both corpora");
  }
  if (!out.provenance_log.empty()) ctx.next_seq = out.provenance_log.back().seq + 1;

  std::vector<Observation> arrivals = sort_chronologically(d_new);
  process_node(ctx, out.root, arrivals, {}, {});

  report.oracle_calls = tally.counts;
  check_tree(out, "after adaptation", ErrorKind::internal);
  return {std::move(out), std::move(report)};
}

std::pair<Cdt, AdaptReport> transfer_tree(const Cdt& source, const std::string& target_group,
                                          const std::vector<Observation>& target_corpus,
                                          Oracle& oracle, const HyperParams& hp,
                                          const AdaptOptions& opts) {
  if (target_group.empty())
    fail(ErrorKind::invalid_argument, "transfer needs a target group name");
  if (target_corpus.empty())
    fail(ErrorKind::invalid_argument, "transfer needs a non-empty target corpus");

  // Keep the statements as candidate structure but forget every event: the
  // target group's evidence is built from its own corpus alone.
  Cdt clone = source;
  clone.group = target_group;
  for_each_node(clone.root, [](CdtNode& n) {
    for (auto& s : n.statements) s.origin = StatementOrigin::transferred;
    n.routed_event_ids.clear();
    n.grounding.event_ids.clear();
    n.grounding.labels.clear();
  });

  ProvenanceEvent ev;
  ev.seq = clone.provenance_log.empty() ? 1 : clone.provenance_log.back().seq + 1;
  ev.timestamp = opts.timestamp;
  ev.phase = "transfer";
  ev.op = "transfer";
  ev.node_id = clone.root.id;
  ev.details = json{{"source_group", source.group},
                    {"target_group", target_group},
                    {"statements", count_statements(clone)}};
  clone.provenance_log.push_back(std::move(ev));

  AdaptOptions topts = opts;
  topts.phase = "transfer";
  return adapt_tree(clone, target_corpus, {}, oracle, hp, topts);
}

json adapt_report_to_json(const AdaptReport& report) {
  auto outcomes = [](const std::vector<StatementOutcome>& list) {
    json arr = json::array();
    for (const auto& o : list) {
      json j{{"statement_id", o.statement_id},
             {"text", o.text},
             {"p", o.p ? json(*o.p) : json(nullptr)},
             {"n", o.n}};
      if (!o.detail.empty()) j["detail"] = o.detail;
      arr.push_back(std::move(j));
    }
    return arr;
  };
  json nodes = json::array();
  for (const auto& nr : report.nodes) {
    nodes.push_back(json{{"node_id", nr.node_id},
                         {"kept", outcomes(nr.kept)},
                         {"kept_insufficient", outcomes(nr.kept_insufficient)},
                         {"deleted", outcomes(nr.deleted)},
                         {"demoted", outcomes(nr.demoted)},
                         {"added", outcomes(nr.added)},
                         {"new_children", nr.new_children}});
  }
  return json{{"nodes", std::move(nodes)},
              {"oracle_calls",
               json{{"generate", report.oracle_calls.generate},
                    {"judge_gate", report.oracle_calls.judge_gate},
                    {"relate_batch", report.oracle_calls.relate_batch},
                    {"embed", report.oracle_calls.embed}}}};
}

}  // namespace cdt
