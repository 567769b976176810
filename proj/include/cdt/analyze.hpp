#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cdt/emd.hpp"
#include "cdt/mann_whitney.hpp"
#include "cdt/model.hpp"
#include "cdt/oracle.hpp"

namespace cdt {

// Cosine similarity. Rejects mismatched dimensions and zero-norm vectors.
double cosine(const std::vector<double>& a, const std::vector<double>& b);

struct BssItem {
  std::string id;
  std::vector<double> context;
  std::vector<double> action;
};

struct MatchedPair {
  std::string event_a;
  std::string event_b;
  double context_cosine = 0.0;
  double action_cosine = 0.0;
};

struct BssOptions {
  double tau = 0.7;
  std::size_t top_n = 20;
  // Drops pairs whose two event ids coincide; used when a set is compared
  // against itself.
  bool exclude_same_id = false;
};

struct BssResult {
  // Unset when no pair clears the context threshold.
  std::optional<double> score;
  std::vector<MatchedPair> pairs;
};

// Behavioral-set similarity over pre-computed embeddings: filter the cross
// product by context cosine > tau, keep the top_n pairs by context cosine
// (ties broken by the unordered id pair), average their action cosines.
BssResult bss_vectors(const std::vector<BssItem>& a, const std::vector<BssItem>& b,
                      const BssOptions& opt);

// Same, embedding each event's context and decision text first.
BssResult bss_events(const std::vector<Observation>& a, const std::vector<Observation>& b,
                     Oracle& oracle, const BssOptions& opt);

enum class EmdKind { gate, stmt };

// Transport distance between the two trees' gate questions or statement
// texts, embedded and compared at cost 1 - cosine, uniform weight per element.
EmdResult tree_emd(const Cdt& a, const Cdt& b, EmdKind kind, Oracle& oracle);

struct DriftResult {
  std::string group;
  std::vector<double> within;
  std::vector<double> cross;
  double u = 0.0;
  double p_value = 1.0;
  bool significant = false;
};

// Splits the group's events into three chronological phases and compares
// within-phase action similarity against cross-phase action similarity.
DriftResult drift_test(const std::string& group, const std::vector<Observation>& events,
                       Oracle& oracle, const BssOptions& opt);

enum class SimilarityMode { bss, emd_gate, emd_stmt };
SimilarityMode similarity_mode_from_string(const std::string& s);
const char* to_string(SimilarityMode mode);

struct SimilarityInput {
  std::string name;
  std::vector<Observation> events;  // bss mode
  const Cdt* tree = nullptr;        // emd modes
};

struct PairEvidence {
  std::string name_a;
  std::string name_b;
  std::vector<MatchedPair> pairs;
};

struct SimilarityMatrix {
  std::vector<std::string> names;
  // cells[i][j]; unset cells correspond to entries in `errors`.
  std::vector<std::vector<std::optional<double>>> cells;
  std::vector<std::string> errors;
  // Matched pairs per computed cell (bss mode only), for audit output.
  std::vector<PairEvidence> evidence;
};

// Pairwise scores including the diagonal; a failing pair leaves its two
// mirrored cells unset and records the reason instead of aborting the matrix.
SimilarityMatrix similarity_matrix(const std::vector<SimilarityInput>& groups,
                                   SimilarityMode mode, Oracle& oracle, const BssOptions& opt);

std::string similarity_to_csv(const SimilarityMatrix& m);

}  // namespace cdt
