#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "cdt/cluster.hpp"
#include "cdt/error.hpp"
#include "cdt/mock_oracle.hpp"
#include "support.hpp"

using namespace cdt;

TEST_CASE("guide suffixes fill in the group name") {
  CHECK(guide_suffixes().size() == 4);
  std::string s = suffixed_context("Storm incoming.", "dock crew", 2);
  CHECK(s == "Storm incoming. Thus, dock crew prioritizes");
  CHECK(suffixed_context("x", "g", 4).find("This changes g's") != std::string::npos);
  CHECK_THROWS_AS((void)suffixed_context("x", "g", 0), Error);
  CHECK_THROWS_AS((void)suffixed_context("x", "g", 5), Error);
}

TEST_CASE("composite embeddings stack two unit-normalized halves") {
  auto world = testsupport::disjoint_world(2, 5);
  PlantedRuleOracle oracle(world);
  std::vector<Observation> obs = {
      testsupport::planted_event(world.rules[0], "g", "e1", 1),
      testsupport::planted_event(world.rules[1], "g", "e2", 2),
  };
  auto vectors = composite_embed(obs, "g", 1, oracle);
  REQUIRE(vectors.size() == 2);
  REQUIRE(vectors[0].size() == 2 * world.dim);
  for (const auto& v : vectors) {
    double left = 0.0, right = 0.0;
    for (std::size_t i = 0; i < world.dim; ++i) left += v[i] * v[i];
    for (std::size_t i = world.dim; i < v.size(); ++i) right += v[i] * v[i];
    CHECK(std::sqrt(left) == doctest::Approx(1.0));
    CHECK(std::sqrt(right) == doctest::Approx(1.0));
  }
  // Different rounds append different suffixes, so the context half shifts.
  auto round2 = composite_embed(obs, "g", 2, oracle);
  CHECK(vectors[0] != round2[0]);
}

TEST_CASE("cluster_round separates well-spread blobs") {
  // Two tight blobs on perpendicular axes.
  std::vector<std::vector<double>> vectors;
  std::vector<std::string> ids;
  for (int i = 0; i < 4; ++i) {
    vectors.push_back({10.0 + 0.01 * i, 0.0});
    ids.push_back("a" + std::to_string(i));
  }
  for (int i = 0; i < 4; ++i) {
    vectors.push_back({0.0, 10.0 + 0.01 * i});
    ids.push_back("b" + std::to_string(i));
  }

  auto clusters = cluster_round(vectors, ids, 2, 4, 99, 1);
  REQUIRE(clusters.size() == 2);
  for (const auto& c : clusters) {
    CHECK(c.round == 1);
    CHECK(c.member_ids.size() == 4);
    // All members share a blob prefix.
    char prefix = c.member_ids.front()[0];
    for (const auto& id : c.member_ids) CHECK(id[0] == prefix);
  }
  std::set<char> prefixes = {clusters[0].member_ids.front()[0],
                             clusters[1].member_ids.front()[0]};
  CHECK(prefixes == std::set<char>{'a', 'b'});
}

TEST_CASE("cluster_round caps membership at m and is deterministic") {
  std::vector<std::vector<double>> vectors;
  std::vector<std::string> ids;
  cdt::SplitMix64 g(7);
  for (int i = 0; i < 20; ++i) {
    vectors.push_back(testsupport::random_vector(g, 3));
    ids.push_back("e" + std::to_string(i));
  }

  auto first = cluster_round(vectors, ids, 4, 5, 3, 2);
  auto second = cluster_round(vectors, ids, 4, 5, 3, 2);
  REQUIRE(first.size() == second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].member_ids == second[i].member_ids);
    CHECK(first[i].member_ids.size() <= 5);
    CHECK(first[i].centroid == second[i].centroid);
  }
}

TEST_CASE("equidistant members tie-break by id") {
  // Four identical points: every distance ties, so the nearest-m pick must
  // fall back to id order.
  std::vector<std::vector<double>> vectors(4, std::vector<double>{1.0, 1.0});
  std::vector<std::string> ids = {"d", "b", "a", "c"};
  auto clusters = cluster_round(vectors, ids, 2, 2, 1, 1);
  for (const auto& c : clusters) {
    REQUIRE(c.member_ids.size() == 2);
    CHECK(c.member_ids == std::vector<std::string>{"a", "b"});
  }
}

TEST_CASE("cluster_round validates its inputs") {
  std::vector<std::vector<double>> vectors = {{1.0}, {2.0}};
  std::vector<std::string> ids = {"a"};
  CHECK_THROWS_AS((void)cluster_round(vectors, ids, 2, 2, 0, 1), Error);
  CHECK_THROWS_AS((void)cluster_round({}, {}, 2, 2, 0, 1), Error);
}
