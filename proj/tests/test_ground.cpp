#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>
#include <string>
#include <vector>

#include "cdt/error.hpp"
#include "cdt/ground.hpp"
#include "cdt/mock_oracle.hpp"
#include "support.hpp"

using namespace cdt;

namespace {

Statement stmt(const std::string& id, const std::string& text) {
  Statement s;
  s.id = id;
  s.text = text;
  return s;
}

struct Fixture {
  PlantedWorld world = testsupport::disjoint_world(2, 21);
  PlantedRuleOracle oracle{world};
  std::string group = "harbor-watch-cooperative";

  Observation event_of(std::size_t rule, const std::string& id, std::int64_t key) const {
    return testsupport::planted_event(world.rules[rule], group, id, key);
  }
};

}  // namespace

TEST_CASE("compute_matrix labels every cell through one batch per event") {
  Fixture f;
  std::vector<Observation> events = {f.event_of(0, "e1", 1), f.event_of(1, "e2", 2),
                                     f.event_of(0, "e3", 3)};
  std::vector<Statement> statements = {stmt("s0", f.world.rules[0].statement),
                                       stmt("s1", f.world.rules[1].statement)};
  CountingOracle counting(std::make_shared<PlantedRuleOracle>(f.world));
  GroundingMatrix m = compute_matrix("n0", f.group, events, statements, counting);

  CHECK(m.node_id == "n0");
  CHECK(m.event_ids == std::vector<std::string>{"e1", "e2", "e3"});
  CHECK(m.statement_ids == std::vector<std::string>{"s0", "s1"});
  CHECK(m.labels[0][0] == EvidenceLabel::sup);
  CHECK(m.labels[0][1] == EvidenceLabel::irr);
  CHECK(m.labels[1][0] == EvidenceLabel::irr);
  CHECK(m.labels[1][1] == EvidenceLabel::sup);
  CHECK(m.labels[2][0] == EvidenceLabel::sup);
  CHECK(counting.counts().relate_batch == 3);
}

TEST_CASE("compute_matrix rejects empty inputs") {
  Fixture f;
  std::vector<Observation> events = {f.event_of(0, "e1", 1)};
  CHECK_THROWS_AS((void)compute_matrix("n0", f.group, events, {}, f.oracle), Error);
}

TEST_CASE("extend_matrix adds rows and columns without touching old cells") {
  Fixture f;
  std::vector<Observation> old_events = {f.event_of(0, "e1", 1), f.event_of(1, "e2", 2)};
  std::vector<Statement> old_statements = {stmt("s0", f.world.rules[0].statement)};
  GroundingMatrix m = compute_matrix("n0", f.group, old_events, old_statements, f.oracle);
  auto relabel_guard = m.labels;

  SUBCASE("new column over existing rows") {
    std::vector<Statement> fresh = {stmt("s1", f.world.rules[1].statement)};
    CountingOracle counting(std::make_shared<PlantedRuleOracle>(f.world));
    extend_matrix(m, f.group, {}, fresh, old_events, old_statements, counting);
    CHECK(m.statement_ids == std::vector<std::string>{"s0", "s1"});
    CHECK(m.labels[0][0] == relabel_guard[0][0]);
    CHECK(m.labels[1][1] == EvidenceLabel::sup);
    CHECK(counting.counts().relate_batch == 2);  // one per existing row
  }

  SUBCASE("new row over the full statement set") {
    std::vector<Observation> fresh = {f.event_of(0, "e3", 3)};
    CountingOracle counting(std::make_shared<PlantedRuleOracle>(f.world));
    extend_matrix(m, f.group, fresh, {}, old_events, old_statements, counting);
    CHECK(m.event_ids == std::vector<std::string>{"e1", "e2", "e3"});
    CHECK(m.labels[2][0] == EvidenceLabel::sup);
    CHECK(counting.counts().relate_batch == 1);
  }

  SUBCASE("rows and columns together fill the corner once") {
    std::vector<Observation> fresh_events = {f.event_of(1, "e3", 3)};
    std::vector<Statement> fresh_statements = {stmt("s1", f.world.rules[1].statement)};
    CountingOracle counting(std::make_shared<PlantedRuleOracle>(f.world));
    extend_matrix(m, f.group, fresh_events, fresh_statements, old_events, old_statements,
                  counting);
    CHECK(m.event_ids.size() == 3);
    CHECK(m.statement_ids.size() == 2);
    CHECK(m.labels[2][0] == EvidenceLabel::irr);  // bravo action vs alfa statement
    CHECK(m.labels[2][1] == EvidenceLabel::sup);  // corner cell
    // Two old rows against the new column, one new row against both columns.
    CHECK(counting.counts().relate_batch == 3);
  }
}

TEST_CASE("extend_matrix needs text for every existing row") {
  Fixture f;
  std::vector<Observation> old_events = {f.event_of(0, "e1", 1)};
  std::vector<Statement> old_statements = {stmt("s0", f.world.rules[0].statement)};
  GroundingMatrix m = compute_matrix("n0", f.group, old_events, old_statements, f.oracle);

  std::vector<Statement> fresh = {stmt("s1", f.world.rules[1].statement)};
  try {
    extend_matrix(m, f.group, {}, fresh, {}, old_statements, f.oracle);
    FAIL("expected an error about the missing row text");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_argument);
  }
}

TEST_CASE("column tallies and undefined precision") {
  Fixture f;
  std::vector<Observation> events = {f.event_of(0, "e1", 1), f.event_of(0, "e2", 2),
                                     f.event_of(1, "e3", 3)};
  std::vector<Statement> statements = {stmt("s0", f.world.rules[0].statement)};
  GroundingMatrix m = compute_matrix("n0", f.group, events, statements, f.oracle);

  StatementStats st = stats_for(m, "s0");
  CHECK(st.n_sup == 2);
  CHECK(st.n_con == 0);
  CHECK(st.n_irr == 1);
  CHECK(st.precision().value() == doctest::Approx(1.0));

  CHECK_THROWS_AS((void)stats_for(m, "missing"), Error);
}

TEST_CASE("uncovered events respect the surviving column set") {
  Fixture f;
  std::vector<Observation> events = {f.event_of(0, "e1", 1), f.event_of(1, "e2", 2),
                                     f.event_of(0, "e3", 3)};
  std::vector<Statement> statements = {stmt("s0", f.world.rules[0].statement),
                                       stmt("s1", f.world.rules[1].statement)};
  GroundingMatrix m = compute_matrix("n0", f.group, events, statements, f.oracle);

  CHECK(uncovered_events(m, {"s0", "s1"}).empty());
  CHECK(uncovered_events(m, {"s0"}) == std::vector<std::string>{"e2"});
  CHECK(uncovered_events(m, {"s1"}) == std::vector<std::string>{"e1", "e3"});
  CHECK(uncovered_events(m, {}) == std::vector<std::string>{"e1", "e2", "e3"});
}
