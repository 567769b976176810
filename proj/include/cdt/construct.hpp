#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cdt/model.hpp"
#include "cdt/oracle.hpp"

namespace cdt {

struct HypothesisPair {
  std::string gate_hypothesis;       // yes/no question about the scene
  std::string statement_hypothesis;  // general behavioral statement
  std::string source_cluster;        // label like "r2.c0"
};

struct UngatedVerdicts {
  double p_global = 0.0;
  std::map<std::string, bool> by_event;  // event id -> consistency verdict
};

enum class GatedOutcome { leaf_child, recurse_child, discard };

struct GatedResult {
  GatedOutcome outcome = GatedOutcome::discard;
  std::vector<std::string> routed_ids;  // yes-routed events, input order
  double broadness = 0.0;
  double p_gated = 0.0;
  std::string discard_reason;
};

struct BuildOptions {
  std::uint64_t seed = 0;
  // Stamped onto provenance records; leave empty for reproducible output.
  std::string timestamp;
  int n_target = 4;
  int n_upper = 8;
};

// Asks the generator for k gate/statement hypothesis pairs over one cluster.
// Accepts fewer than k after one strict retry (with a warning); a response
// that cannot be parsed at all on the retry is a protocol error.
std::vector<HypothesisPair> generate_hypotheses(const std::vector<Observation>& cluster_events,
                                                const std::vector<std::string>& established,
                                                const std::vector<std::string>& proposed_gates,
                                                const std::string& group, const std::string& topic,
                                                int k, Oracle& oracle);

// Deduplicates and rewrites the accumulated pairs down to a bounded set.
std::vector<HypothesisPair> summarize_hypotheses(const std::vector<HypothesisPair>& pairs,
                                                 const std::string& group, int n_target,
                                                 int n_upper, Oracle& oracle);

// Stage 1: per-event yes/no consistency of the statement against every
// event's action. The verdicts are kept for reuse by the gated stage.
UngatedVerdicts validate_ungated(const std::string& statement,
                                 const std::vector<Observation>& events,
                                 const std::string& group, Oracle& oracle);

// Stage 2: routes events through the gate and decides the hypothesis fate
// from routed fraction and routed precision. Stage-1 verdicts are reused;
// no consistency call is repeated.
GatedResult validate_gated(const HypothesisPair& pair, const std::vector<Observation>& events,
                           const UngatedVerdicts& stage1, const std::string& group,
                           const HyperParams& hp, Oracle& oracle);

// Builds a single tree from the corpus.
Cdt build_tree(const std::vector<Observation>& corpus, const std::string& group,
               const HyperParams& hp, Oracle& oracle, const BuildOptions& opts);

// Builds candidates_c trees on derived seeds and keeps the one preferred by
// a majority over voting_rounds seeded-order votes.
Cdt build_tree_with_selection(const std::vector<Observation>& corpus, const std::string& group,
                              const HyperParams& hp, Oracle& oracle, const BuildOptions& opts);

// Readable outline used when presenting candidate trees for selection.
std::string render_tree_outline(const Cdt& tree);

}  // namespace cdt
