#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cdt/analyze.hpp"
#include "cdt/mock_oracle.hpp"
#include "cdt/model.hpp"
#include "cdt/rng.hpp"

namespace testsupport {

// Rule whose marker strings are all derived from one short tag, so a test
// can recognize them in any generated text.
cdt::PlantedRule make_rule(const std::string& tag);

// World with n disjoint rules tagged rule-0 .. rule-(n-1) and no cross-talk.
cdt::PlantedWorld disjoint_world(std::size_t n_rules, std::uint64_t seed);

struct CorpusSpec {
  std::string group = "harbor-watch-cooperative";
  std::size_t per_rule = 30;
  std::int64_t order_base = 0;
  std::string id_prefix = "ev";
  std::string domain = "synthetic";
};

// One observation per rule per step, interleaved chronologically. Contexts
// carry the rule's context marker, decisions its decision marker.
std::vector<cdt::Observation> planted_corpus(const cdt::PlantedWorld& world,
                                             const CorpusSpec& spec);

cdt::Observation planted_event(const cdt::PlantedRule& rule, const std::string& group,
                               const std::string& id, std::int64_t order_key,
                               const std::string& domain = "synthetic");

// Writes observations as JSONL and returns the path.
std::string write_corpus_file(const std::string& path, const std::vector<cdt::Observation>& obs);

// Empty scratch directory under the current working directory.
std::string fresh_dir(const std::string& name);

// Uniform double in [lo, hi).
double uniform(cdt::SplitMix64& g, double lo, double hi);

std::vector<double> random_vector(cdt::SplitMix64& g, std::size_t dim);

// Minimum-cost perfect assignment over a square cost matrix, averaged by the
// side length. Exhaustive over all permutations; sides up to about 8.
double assignment_emd(const std::vector<std::vector<double>>& cost);

// Filter-sort-average reference for the behavioral similarity score,
// written straight from its definition.
std::optional<double> reference_bss(const std::vector<cdt::BssItem>& a,
                                    const std::vector<cdt::BssItem>& b,
                                    const cdt::BssOptions& opt);

// Rank-test reference: enumerates every label assignment of the pooled
// sample and counts those whose min(U) does not exceed the observed one.
double reference_mwu_p(const std::vector<double>& x, const std::vector<double>& y,
                       double* u_out = nullptr);

}  // namespace testsupport
