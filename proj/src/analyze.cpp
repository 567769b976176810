#include "cdt/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "cdt/error.hpp"
#include "cdt/log.hpp"

namespace cdt {

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) {
    fail(ErrorKind::invalid_argument, "cosine: dimension mismatch or empty vector");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    fail(ErrorKind::data, "degenerate embedding: zero-norm vector");
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

struct Candidate {
  std::size_t ia;
  std::size_t ib;
  double context_cos;
};

}  // namespace

BssResult bss_vectors(const std::vector<BssItem>& a, const std::vector<BssItem>& b,
                      const BssOptions& opt) {
  if (a.empty() || b.empty()) {
    fail(ErrorKind::invalid_argument, "similarity needs a non-empty set on both sides");
  }
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (opt.exclude_same_id && a[i].id == b[j].id) continue;
      double c = cosine(a[i].context, b[j].context);
      if (c > opt.tau) candidates.push_back({i, j, c});
    }
  }
  // The tie rule keys on the unordered id pair so that swapping the argument
  // order reproduces the same ranking, then on the ordered pair purely to pin
  // down duplicates from self-comparison.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](const Candidate& x, const Candidate& y) {
                     if (x.context_cos != y.context_cos) return x.context_cos > y.context_cos;
                     const std::string& xa = a[x.ia].id;
                     const std::string& xb = b[x.ib].id;
                     const std::string& ya = a[y.ia].id;
                     const std::string& yb = b[y.ib].id;
                     auto xkey = std::minmax(xa, xb);
                     auto ykey = std::minmax(ya, yb);
                     if (xkey != ykey) return xkey < ykey;
                     return std::tie(xa, xb) < std::tie(ya, yb);
                   });
  if (candidates.size() > opt.top_n) candidates.resize(opt.top_n);

  BssResult result;
  double sum = 0.0;
  for (const Candidate& c : candidates) {
    double action_cos = cosine(a[c.ia].action, b[c.ib].action);
    result.pairs.push_back({a[c.ia].id, b[c.ib].id, c.context_cos, action_cos});
    sum += action_cos;
  }
  if (!result.pairs.empty()) {
    result.score = sum / static_cast<double>(result.pairs.size());
  }
  return result;
}

namespace {

std::vector<BssItem> embed_events(const std::vector<Observation>& events, Oracle& oracle) {
  std::vector<std::string> contexts, actions;
  for (const auto& e : events) {
    contexts.push_back(e.context);
    actions.push_back(e.decision);
  }
  std::vector<EmbeddingVector> cvecs = oracle.embed(contexts, EmbedLens::plain);
  std::vector<EmbeddingVector> avecs = oracle.embed(actions, EmbedLens::plain);
  std::vector<BssItem> items;
  for (std::size_t i = 0; i < events.size(); ++i) {
    items.push_back({events[i].id, cvecs[i].values, avecs[i].values});
  }
  return items;
}

}  // namespace

BssResult bss_events(const std::vector<Observation>& a, const std::vector<Observation>& b,
                     Oracle& oracle, const BssOptions& opt) {
  if (a.empty() || b.empty()) {
    fail(ErrorKind::invalid_argument, "similarity needs a non-empty set on both sides");
  }
  return bss_vectors(embed_events(a, oracle), embed_events(b, oracle), opt);
}

namespace {

std::vector<std::string> collect_elements(const Cdt& tree, EmdKind kind) {
  std::vector<std::string> out;
  for_each_node(tree.root, [&](const CdtNode& node) {
    if (kind == EmdKind::stmt) {
      for (const auto& s : node.statements) out.push_back(s.text);
    } else {
      for (const auto& child : node.children) out.push_back(child.first.question);
    }
  });
  return out;
}

}  // namespace

EmdResult tree_emd(const Cdt& a, const Cdt& b, EmdKind kind, Oracle& oracle) {
  const char* what = kind == EmdKind::gate ? "gate questions" : "statements";
  std::vector<std::string> ea = collect_elements(a, kind);
  std::vector<std::string> eb = collect_elements(b, kind);
  if (ea.empty() || eb.empty()) {
    fail(ErrorKind::data, std::string("transport distance needs at least one ") + what +
                              " in each tree");
  }
  std::vector<EmbeddingVector> va = oracle.embed(ea, EmbedLens::plain);
  std::vector<EmbeddingVector> vb = oracle.embed(eb, EmbedLens::plain);
  std::vector<std::vector<double>> cost(va.size(), std::vector<double>(vb.size()));
  for (std::size_t i = 0; i < va.size(); ++i) {
    for (std::size_t j = 0; j < vb.size(); ++j) {
      cost[i][j] = std::max(0.0, 1.0 - cosine(va[i].values, vb[j].values));
    }
  }
  return emd_uniform(cost);
}

DriftResult drift_test(const std::string& group, const std::vector<Observation>& events,
                       Oracle& oracle, const BssOptions& opt) {
  std::vector<Observation> ordered = sort_chronologically(events);
  const std::size_t n = ordered.size();
  const std::size_t q = n / 3;
  const std::size_t r = n % 3;
  const std::size_t sizes[3] = {q + (r > 0 ? 1 : 0), q + (r > 1 ? 1 : 0), q};
  for (std::size_t s : sizes) {
    if (s < 2) {
      fail(ErrorKind::data, "drift test needs at least 2 events per phase (6 total), got " +
                                std::to_string(n));
    }
  }
  std::vector<std::vector<Observation>> phases(3);
  std::size_t cursor = 0;
  for (int p = 0; p < 3; ++p) {
    for (std::size_t i = 0; i < sizes[p]; ++i) phases[p].push_back(ordered[cursor++]);
  }

  DriftResult result;
  result.group = group;
  BssOptions within_opt = opt;
  within_opt.exclude_same_id = true;
  for (int p = 0; p < 3; ++p) {
    BssResult r_p = bss_events(phases[p], phases[p], oracle, within_opt);
    for (const auto& pair : r_p.pairs) result.within.push_back(pair.action_cosine);
  }
  BssOptions cross_opt = opt;
  cross_opt.exclude_same_id = false;
  const std::pair<int, int> combos[3] = {{0, 1}, {0, 2}, {1, 2}};
  for (auto [p1, p2] : combos) {
    BssResult r_c = bss_events(phases[p1], phases[p2], oracle, cross_opt);
    for (const auto& pair : r_c.pairs) result.cross.push_back(pair.action_cosine);
  }
  if (result.within.empty() || result.cross.empty()) {
    fail(ErrorKind::data,
         "drift test found no qualifying event pairs at the current context threshold");
  }
  MwuResult test = mann_whitney_u(result.within, result.cross);
  result.u = test.u;
  result.p_value = test.p_value;
  result.significant = test.p_value < 0.05;
  return result;
}

SimilarityMode similarity_mode_from_string(const std::string& s) {
  if (s == "bss") return SimilarityMode::bss;
  if (s == "emd_gate") return SimilarityMode::emd_gate;
  if (s == "emd_stmt") return SimilarityMode::emd_stmt;
  fail(ErrorKind::invalid_argument, "unknown similarity mode: " + s);
}

const char* to_string(SimilarityMode mode) {
  switch (mode) {
    case SimilarityMode::bss: return "bss";
    case SimilarityMode::emd_gate: return "emd_gate";
    case SimilarityMode::emd_stmt: return "emd_stmt";
  }
  return "?";
}

SimilarityMatrix similarity_matrix(const std::vector<SimilarityInput>& groups,
                                   SimilarityMode mode, Oracle& oracle, const BssOptions& opt) {
  if (groups.size() < 2) {
    fail(ErrorKind::invalid_argument, "similarity matrix needs at least 2 groups");
  }
  {
    std::set<std::string> seen;
    for (const auto& g : groups) {
      if (!seen.insert(g.name).second) {
        fail(ErrorKind::invalid_argument, "duplicate group name: " + g.name);
      }
    }
  }
  SimilarityMatrix m;
  for (const auto& g : groups) m.names.push_back(g.name);
  m.cells.assign(groups.size(), std::vector<std::optional<double>>(groups.size()));

  for (std::size_t i = 0; i < groups.size(); ++i) {
    for (std::size_t j = i; j < groups.size(); ++j) {
      try {
        std::optional<double> score;
        if (mode == SimilarityMode::bss) {
          BssResult r = bss_events(groups[i].events, groups[j].events, oracle, opt);
          if (!r.score) {
            fail(ErrorKind::data, "no event pair cleared the context threshold");
          }
          score = r.score;
          m.evidence.push_back({groups[i].name, groups[j].name, r.pairs});
        } else {
          if (!groups[i].tree || !groups[j].tree) {
            fail(ErrorKind::invalid_argument, "transport mode needs a tree per group");
          }
          EmdKind kind = mode == SimilarityMode::emd_gate ? EmdKind::gate : EmdKind::stmt;
          score = tree_emd(*groups[i].tree, *groups[j].tree, kind, oracle).distance;
        }
        m.cells[i][j] = score;
        m.cells[j][i] = score;
      } catch (const Error& e) {
        m.errors.push_back(groups[i].name + "/" + groups[j].name + ": " + e.what());
        log_warn(std::string("similarity cell skipped: ") + m.errors.back());
      }
    }
  }
  return m;
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

}  // namespace

std::string similarity_to_csv(const SimilarityMatrix& m) {
  std::ostringstream out;
  out << "group";
  for (const auto& name : m.names) out << ',' << csv_escape(name);
  out << '\n';
  for (std::size_t i = 0; i < m.names.size(); ++i) {
    out << csv_escape(m.names[i]);
    for (std::size_t j = 0; j < m.names.size(); ++j) {
      out << ',';
      if (m.cells[i][j]) {
        std::ostringstream cell;
        cell.precision(10);
        cell << *m.cells[i][j];
        out << cell.str();
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace cdt
