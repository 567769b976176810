#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cdt/model.hpp"
#include "cdt/oracle.hpp"

namespace cdt {

// One guide suffix per clustering round; "{O}" stands for the group name.
const std::array<std::string, 4>& guide_suffixes();

// Context with the round's suffix appended (round is 1-based).
std::string suffixed_context(const std::string& context, const std::string& group, int round);

struct ObservationCluster {
  std::vector<std::string> member_ids;
  int round = 1;
  std::vector<double> centroid;
};

// Per-observation vectors for one round: the suffixed context and the raw
// decision are embedded separately, each half unit-normalized, then stacked.
std::vector<std::vector<double>> composite_embed(const std::vector<Observation>& obs,
                                                 const std::string& group, int round,
                                                 Oracle& oracle);

// Seeded Lloyd iterations; each centroid then claims the m nearest
// observations (ties by id), so clusters may overlap.
std::vector<ObservationCluster> cluster_round(const std::vector<std::vector<double>>& vectors,
                                              const std::vector<std::string>& ids,
                                              std::size_t k_clusters, std::size_t m,
                                              std::uint64_t seed, int round);

}  // namespace cdt
