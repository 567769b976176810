#include "cdt/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cdt/error.hpp"
#include "cdt/rng.hpp"

namespace cdt {

const std::array<std::string, 4>& guide_suffixes() {
  static const std::array<std::string, 4> suffixes = {
      "Thus, {O} will",
      "Thus, {O} prioritizes",
      "As a result, {O} faces",
      "This changes {O}'s",
  };
  return suffixes;
}

namespace {

std::string fill_group(const std::string& tpl, const std::string& group) {
  std::string out = tpl;
  std::size_t pos = 0;
  while ((pos = out.find("{O}", pos)) != std::string::npos) {
    out.replace(pos, 3, group);
    pos += group.size();
  }
  return out;
}

void normalize_half(std::vector<double>& v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    fail(ErrorKind::data, "degenerate embedding: cannot normalize a zero vector");
  }
  for (double& x : v) x /= norm;
}

}  // namespace

std::string suffixed_context(const std::string& context, const std::string& group, int round) {
  const auto& suffixes = guide_suffixes();
  if (round < 1 || static_cast<std::size_t>(round) > suffixes.size()) {
    fail(ErrorKind::invalid_argument,
         "clustering round out of range: " + std::to_string(round));
  }
  return context + " " + fill_group(suffixes[static_cast<std::size_t>(round - 1)], group);
}

std::vector<std::vector<double>> composite_embed(const std::vector<Observation>& obs,
                                                 const std::string& group, int round,
                                                 Oracle& oracle) {
  std::vector<std::string> contexts, decisions;
  for (const auto& o : obs) {
    contexts.push_back(suffixed_context(o.context, group, round));
    decisions.push_back(o.decision);
  }
  std::vector<EmbeddingVector> ctx_vecs = oracle.embed(contexts, EmbedLens::general_context);
  std::vector<EmbeddingVector> dec_vecs = oracle.embed(decisions, EmbedLens::surface_decision);
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    std::vector<double> left = ctx_vecs[i].values;
    std::vector<double> right = dec_vecs[i].values;
    normalize_half(left);
    normalize_half(right);
    left.insert(left.end(), right.begin(), right.end());
    out.push_back(std::move(left));
  }
  return out;
}

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double diff = a[i] - b[i];
    d += diff * diff;
  }
  return d;
}

}  // namespace

std::vector<ObservationCluster> cluster_round(const std::vector<std::vector<double>>& vectors,
                                              const std::vector<std::string>& ids,
                                              std::size_t k_clusters, std::size_t m,
                                              std::uint64_t seed, int round) {
  if (k_clusters < 1 || m < 1) {
    fail(ErrorKind::invalid_argument, "cluster_round needs k_clusters >= 1 and m >= 1");
  }
  if (vectors.size() != ids.size()) {
    fail(ErrorKind::invalid_argument, "cluster_round: ids and vectors differ in length");
  }
  if (vectors.size() < k_clusters) {
    fail(ErrorKind::invalid_argument, "cluster_round: fewer observations than clusters");
  }
  const std::size_t n = vectors.size();
  const std::size_t dim = vectors.front().size();
  for (const auto& v : vectors) {
    if (v.size() != dim) {
      fail(ErrorKind::invalid_argument, "cluster_round: inconsistent vector dimensions");
    }
  }

  SplitMix64 rng(seed);
  std::vector<std::size_t> init(n);
  for (std::size_t i = 0; i < n; ++i) init[i] = i;
  rng.shuffle(init);
  std::vector<std::vector<double>> centroids;
  for (std::size_t c = 0; c < k_clusters; ++c) centroids.push_back(vectors[init[c]]);

  std::vector<std::size_t> assignment(n, 0);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < centroids.size(); ++c) {
        double d = squared_distance(vectors[i], centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assignment[i] != best) {
        assignment[i] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      std::vector<double> mean(dim, 0.0);
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (assignment[i] != c) continue;
        for (std::size_t d = 0; d < dim; ++d) mean[d] += vectors[i][d];
        ++count;
      }
      // An orphaned centroid keeps its position rather than being reseeded,
      // which keeps the iteration deterministic.
      if (count == 0) continue;
      for (std::size_t d = 0; d < dim; ++d) mean[d] /= static_cast<double>(count);
      centroids[c] = mean;
    }
  }

  std::vector<ObservationCluster> clusters;
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      double da = squared_distance(vectors[a], centroids[c]);
      double db = squared_distance(vectors[b], centroids[c]);
      if (da != db) return da < db;
      return ids[a] < ids[b];
    });
    ObservationCluster cluster;
    cluster.round = round;
    cluster.centroid = centroids[c];
    for (std::size_t i = 0; i < std::min(m, n); ++i) {
      cluster.member_ids.push_back(ids[order[i]]);
    }
    clusters.push_back(std::move(cluster));
  }
  return clusters;
}

}  // namespace cdt
