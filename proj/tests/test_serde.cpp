#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <string>

#include <json.hpp>

#include "cdt/error.hpp"
#include "cdt/model.hpp"
#include "cdt/serde.hpp"
#include "support.hpp"

using namespace cdt;
using nlohmann::json;

namespace {

Cdt rich_tree() {
  Cdt tree;
  tree.group = "lighthouse-keepers-union";
  tree.hyperparams.d_max = 2;
  tree.hyperparams.tau_min = 4;
  tree.root.id = "n0";
  tree.root.routed_event_ids = {"e1", "e2"};
  Statement s;
  s.id = "s0";
  s.text = "The group rotates night shifts weekly.";
  s.origin = StatementOrigin::adapted_add;
  s.created_at_phase = "adapt";
  tree.root.statements.push_back(s);
  tree.root.grounding.node_id = "n0";
  tree.root.grounding.event_ids = {"e1", "e2"};
  tree.root.grounding.statement_ids = {"s0"};
  tree.root.grounding.labels = {{EvidenceLabel::sup}, {EvidenceLabel::irr}};

  CdtNode child;
  child.id = "n1";
  child.depth = 1;
  child.routed_event_ids = {"e2"};
  Gate g;
  g.id = "g0";
  g.question = "Does the scene involve fog rolling in?";
  tree.root.children.emplace_back(g, child);

  ProvenanceEvent ev;
  ev.seq = 1;
  ev.phase = "build";
  ev.op = "install_statement";
  ev.node_id = "n0";
  ev.statement_id = "s0";
  ev.details = json{{"p", 1.0}, {"yes", 2}, {"total", 2}};
  tree.provenance_log.push_back(ev);
  return tree;
}

}  // namespace

TEST_CASE("tree json round trip preserves everything") {
  Cdt tree = rich_tree();
  std::string text = serialize_tree(tree);
  Cdt back = deserialize_tree(text);

  CHECK(back.group == tree.group);
  CHECK(back.hyperparams.d_max == 2);
  CHECK(back.hyperparams.tau_min == 4);
  CHECK(back.root.id == "n0");
  REQUIRE(back.root.statements.size() == 1);
  CHECK(back.root.statements[0].origin == StatementOrigin::adapted_add);
  CHECK(back.root.statements[0].created_at_phase == "adapt");
  CHECK(back.root.grounding.labels[1][0] == EvidenceLabel::irr);
  REQUIRE(back.root.children.size() == 1);
  CHECK(back.root.children[0].first.question == tree.root.children[0].first.question);
  CHECK(back.root.children[0].second.routed_event_ids == std::vector<std::string>{"e2"});
  REQUIRE(back.provenance_log.size() == 1);
  CHECK(back.provenance_log[0].op == "install_statement");
  CHECK(back.provenance_log[0].details.at("total") == 2);

  // Serialization is canonical: a round trip reproduces the exact bytes.
  CHECK(serialize_tree(back) == text);
}

TEST_CASE("unknown schema versions are rejected") {
  json doc = tree_to_json(rich_tree());
  doc["schema_version"] = 99;
  try {
    (void)tree_from_json(doc);
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::schema);
  }

  json missing = tree_to_json(rich_tree());
  missing.erase("schema_version");
  CHECK_THROWS_AS((void)tree_from_json(missing), Error);
}

TEST_CASE("malformed tree payloads surface as schema errors") {
  json doc = tree_to_json(rich_tree());
  doc["tree"]["root"]["grounding"]["labels"][0][0] = "maybe";
  try {
    (void)tree_from_json(doc);
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::schema);
    CHECK(std::string(e.what()).find("evidence label") != std::string::npos);
  }
}

TEST_CASE("save and load through files") {
  std::string dir = testsupport::fresh_dir("serde_files");
  std::string path = dir + "/tree.json";
  Cdt tree = rich_tree();
  save_tree(tree, path);
  Cdt back = load_tree(path);
  CHECK(serialize_tree(back) == serialize_tree(tree));

  try {
    (void)load_tree(dir + "/missing.json");
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io);
  }
}

TEST_CASE("observation json round trip and validation") {
  Observation o;
  o.id = "ev-1";
  o.group = "lighthouse-keepers-union";
  o.domain = "maritime";
  o.source = Source::techcrunch;
  o.order_key = 42;
  o.context = "Fog bank drifting toward the strait.";
  o.decision = "The keepers light the auxiliary lamp early.";
  o.question = "What will the keepers do?";

  Observation back = observation_from_json(observation_to_json(o));
  CHECK(back.id == o.id);
  CHECK(back.source == Source::techcrunch);
  CHECK(back.order_key == 42);
  CHECK(back.question == o.question);

  json bad = observation_to_json(o);
  bad.erase("context");
  try {
    (void)observation_from_json(bad);
    FAIL("expected a data error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::data);
    CHECK(std::string(e.what()).find("context") != std::string::npos);
  }
  CHECK_THROWS_AS((void)observation_from_json(json::array()), Error);
}

TEST_CASE("hyperparams json round trip applies defaults and validates") {
  HyperParams hp;
  hp.tau_filter = 0.9;
  hp.voting_rounds = 7;
  json j = hyperparams_to_json(hp);
  HyperParams back = hyperparams_from_json(j);
  CHECK(back.tau_filter == doctest::Approx(0.9));
  CHECK(back.voting_rounds == 7);

  HyperParams sparse = hyperparams_from_json(json{{"d_max", 2}});
  CHECK(sparse.d_max == 2);
  CHECK(sparse.rounds_r == HyperParams{}.rounds_r);

  CHECK_THROWS_AS((void)hyperparams_from_json(json{{"tau_min", 0}}), Error);
}

TEST_CASE("dot export renders gates on edges and truncates long statements") {
  Cdt tree = rich_tree();
  std::string long_text(120, 'x');
  Statement s;
  s.id = "s1";
  s.text = long_text;
  tree.root.children[0].second.statements.push_back(s);
  tree.root.children[0].second.grounding.node_id = "n1";
  tree.root.children[0].second.grounding.event_ids = {"e2"};
  tree.root.children[0].second.grounding.statement_ids = {"s1"};
  tree.root.children[0].second.grounding.labels = {{EvidenceLabel::sup}};

  std::string dot = tree_to_dot(tree);
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("fog rolling in") != std::string::npos);      // gate on the edge
  CHECK(dot.find("rotates night shifts") != std::string::npos);  // statement in the node
  CHECK(dot.find(std::string(80, 'x') + "...") != std::string::npos);
  CHECK(dot.find(std::string(81, 'x')) == std::string::npos);
}

TEST_CASE("single node tree exports with no edges") {
  Cdt tree;
  tree.group = "solo";
  tree.root.id = "n0";
  std::string dot = tree_to_dot(tree);
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("->") == std::string::npos);
}
