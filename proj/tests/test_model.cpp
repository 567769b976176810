#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "cdt/error.hpp"
#include "cdt/model.hpp"

using namespace cdt;

namespace {

// Small well-formed tree: root with one statement and one gated child.
Cdt sample_tree() {
  Cdt tree;
  tree.group = "tide-pool-collective";
  tree.root.id = "n0";
  tree.root.depth = 0;
  tree.root.routed_event_ids = {"e1", "e2", "e3"};
  Statement s;
  s.id = "s0";
  s.text = "The group posts a notice before every expedition.";
  tree.root.statements.push_back(s);
  tree.root.grounding.node_id = "n0";
  tree.root.grounding.event_ids = {"e1", "e2", "e3"};
  tree.root.grounding.statement_ids = {"s0"};
  tree.root.grounding.labels = {{EvidenceLabel::sup}, {EvidenceLabel::sup}, {EvidenceLabel::con}};

  CdtNode child;
  child.id = "n1";
  child.depth = 1;
  child.routed_event_ids = {"e1", "e2"};
  Statement cs;
  cs.id = "s1";
  cs.text = "The group delays departure when storms pass through.";
  child.statements.push_back(cs);
  child.grounding.node_id = "n1";
  child.grounding.event_ids = {"e1", "e2"};
  child.grounding.statement_ids = {"s1"};
  child.grounding.labels = {{EvidenceLabel::sup}, {EvidenceLabel::sup}};
  Gate g;
  g.id = "g0";
  g.question = "Does the scene mention incoming weather?";
  tree.root.children.emplace_back(g, child);
  return tree;
}

Observation obs(const std::string& id, std::int64_t key, const std::string& group = "g") {
  Observation o;
  o.id = id;
  o.group = group;
  o.order_key = key;
  o.context = "ctx " + id;
  o.decision = "act " + id;
  return o;
}

}  // namespace

TEST_CASE("enum string round trips") {
  for (auto s : {Source::wikipedia, Source::techcrunch, Source::synthetic}) {
    CHECK(source_from_string(to_string(s)) == s);
  }
  for (auto l : {EvidenceLabel::sup, EvidenceLabel::con, EvidenceLabel::irr}) {
    CHECK(evidence_label_from_string(to_string(l)) == l);
  }
  for (auto o : {StatementOrigin::constructed, StatementOrigin::adapted_add,
                 StatementOrigin::demoted, StatementOrigin::transferred}) {
    CHECK(statement_origin_from_string(to_string(o)) == o);
  }
  CHECK_FALSE(source_from_string("gopher").has_value());
  CHECK_FALSE(evidence_label_from_string("").has_value());
  CHECK_FALSE(statement_origin_from_string("invented").has_value());
}

TEST_CASE("statement stats") {
  StatementStats st{6, 2, 5};
  CHECK(st.effective_n() == 8);
  CHECK(st.precision().value() == doctest::Approx(0.75));

  StatementStats none{0, 0, 9};
  CHECK(none.effective_n() == 0);
  CHECK_FALSE(none.precision().has_value());
}

TEST_CASE("routed id helpers keep the vector sorted and unique") {
  std::vector<std::string> ids;
  insert_routed_id(ids, "e5");
  insert_routed_id(ids, "e1");
  insert_routed_id(ids, "e3");
  insert_routed_id(ids, "e3");
  insert_routed_id(ids, "e1");
  CHECK(ids == std::vector<std::string>{"e1", "e3", "e5"});
  CHECK(contains_id(ids, "e3"));
  CHECK_FALSE(contains_id(ids, "e2"));
  CHECK_FALSE(contains_id({}, "e2"));
}

TEST_CASE("chronological sort orders by key then id and rejects mixed groups") {
  std::vector<Observation> in = {obs("b", 2), obs("c", 1), obs("a", 2), obs("d", 1)};
  auto sorted = sort_chronologically(in);
  std::vector<std::string> got;
  for (const auto& o : sorted) got.push_back(o.id);
  CHECK(got == std::vector<std::string>{"c", "d", "a", "b"});

  std::vector<Observation> mixed = {obs("a", 1, "g1"), obs("b", 2, "g2")};
  CHECK_THROWS_AS((void)sort_chronologically(mixed), Error);
  try {
    (void)sort_chronologically(mixed);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_argument);
  }
}

TEST_CASE("grounding matrix lookups") {
  Cdt tree = sample_tree();
  const GroundingMatrix& m = tree.root.grounding;
  CHECK(m.event_row("e2") == 1);
  CHECK_FALSE(m.event_row("zzz").has_value());
  CHECK(m.statement_col("s0") == 0);
  CHECK_FALSE(m.statement_col("s9").has_value());
  CHECK_FALSE(m.empty());
  CHECK(GroundingMatrix{}.empty());

  GroundingMatrix reset;
  reset.node_id = "n7";
  reset.statement_ids = {"s0"};
  CHECK(reset.empty());  // columns without rows still count as empty
}

TEST_CASE("hyperparameter validation") {
  HyperParams hp;
  CHECK_NOTHROW(hp.validate());

  HyperParams inverted;
  inverted.tau_accept_keep = 0.3;
  inverted.tau_reject_delete = 0.6;
  try {
    inverted.validate();
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
    CHECK(std::string(e.what()).find("tau_reject_delete") != std::string::npos);
  }

  HyperParams multi;
  multi.d_max = 0;
  multi.bss_top_n = 0;
  try {
    multi.validate();
    FAIL("expected a config error");
  } catch (const Error& e) {
    std::string msg = e.what();
    CHECK(msg.find("d_max") != std::string::npos);
    CHECK(msg.find("bss_top_n") != std::string::npos);
  }
}

TEST_CASE("validate_tree accepts the sample tree") {
  CHECK(validate_tree(sample_tree()).empty());
}

TEST_CASE("validate_tree flags structural violations") {
  auto has = [](const std::vector<std::string>& problems, const std::string& needle) {
    return std::any_of(problems.begin(), problems.end(), [&](const std::string& p) {
      return p.find(needle) != std::string::npos;
    });
  };

  SUBCASE("duplicate node id") {
    Cdt t = sample_tree();
    t.root.children[0].second.id = "n0";
    CHECK(has(validate_tree(t), "duplicate node id"));
  }
  SUBCASE("wrong child depth") {
    Cdt t = sample_tree();
    t.root.children[0].second.depth = 2;
    CHECK(has(validate_tree(t), "parent depth"));
  }
  SUBCASE("depth beyond d_max") {
    Cdt t = sample_tree();
    t.hyperparams.d_max = 1;
    CdtNode grand;
    grand.id = "n2";
    grand.depth = 2;
    grand.routed_event_ids = {"e1"};
    Gate g;
    g.id = "g1";
    g.question = "Is the tide low?";
    t.root.children[0].second.children.emplace_back(g, grand);
    CHECK(has(validate_tree(t), "exceeds d_max"));
  }
  SUBCASE("unsorted routed ids") {
    Cdt t = sample_tree();
    t.root.routed_event_ids = {"e3", "e1", "e2"};
    CHECK(has(validate_tree(t), "not sorted"));
  }
  SUBCASE("duplicate routed ids") {
    Cdt t = sample_tree();
    t.root.routed_event_ids = {"e1", "e1", "e2", "e3"};
    CHECK(has(validate_tree(t), "duplicates"));
  }
  SUBCASE("child routed id missing from parent") {
    Cdt t = sample_tree();
    insert_routed_id(t.root.children[0].second.routed_event_ids, "e9");
    insert_routed_id(t.root.children[0].second.grounding.event_ids, "e9");
    CHECK(has(validate_tree(t), "not routed to parent"));
  }
  SUBCASE("duplicate statement id across nodes") {
    Cdt t = sample_tree();
    t.root.children[0].second.statements[0].id = "s0";
    t.root.children[0].second.grounding.statement_ids = {"s0"};
    CHECK(has(validate_tree(t), "duplicate statement id"));
  }
  SUBCASE("grounding node_id mismatch") {
    Cdt t = sample_tree();
    t.root.grounding.node_id = "n9";
    CHECK(has(validate_tree(t), "node_id mismatch"));
  }
  SUBCASE("grounding references foreign statement") {
    Cdt t = sample_tree();
    t.root.grounding.statement_ids = {"s9"};
    CHECK(has(validate_tree(t), "foreign statement"));
  }
  SUBCASE("grounding row not routed") {
    Cdt t = sample_tree();
    t.root.grounding.event_ids[2] = "e9";
    CHECK(has(validate_tree(t), "unrouted event"));
  }
  SUBCASE("statement-bearing node without matrix") {
    Cdt t = sample_tree();
    t.root.grounding = GroundingMatrix{};
    CHECK(has(validate_tree(t), "missing grounding matrix"));
  }
  SUBCASE("empty gate question") {
    Cdt t = sample_tree();
    t.root.children[0].first.question.clear();
    CHECK(has(validate_tree(t), "empty question"));
  }
  SUBCASE("provenance seq must strictly increase") {
    Cdt t = sample_tree();
    ProvenanceEvent a;
    a.seq = 1;
    a.op = "install_statement";
    ProvenanceEvent b = a;
    b.seq = 1;
    t.provenance_log = {a, b};
    CHECK(has(validate_tree(t), "strictly increasing"));
  }
}

TEST_CASE("id allocator resumes past scanned ids") {
  Cdt t = sample_tree();
  t.root.statements[0].id = "s41";
  t.root.grounding.statement_ids = {"s41"};
  auto alloc = IdAllocator::scan(t);
  CHECK(alloc.node_id() == "n2");
  CHECK(alloc.statement_id() == "s42");
  CHECK(alloc.gate_id() == "g1");

  IdAllocator fresh;
  CHECK(fresh.node_id() == "n0");
  CHECK(fresh.statement_id() == "s0");
  CHECK(fresh.gate_id() == "g0");
}

TEST_CASE("id allocator ignores ids outside its naming scheme") {
  Cdt t = sample_tree();
  t.root.id = "root";
  t.root.children[0].second.id = "n1";
  t.root.statements[0].id = "legacy-7";
  t.root.grounding.statement_ids = {"legacy-7"};
  auto alloc = IdAllocator::scan(t);
  CHECK(alloc.node_id() == "n2");
  CHECK(alloc.statement_id() == "s2");  // only the child's s1 counts
}

TEST_CASE("tree traversal helpers") {
  Cdt t = sample_tree();
  std::vector<std::string> visited;
  for_each_node(std::as_const(t.root),
                [&](const CdtNode& n) { visited.push_back(n.id); });
  CHECK(visited == std::vector<std::string>{"n0", "n1"});

  CHECK(count_statements(t) == 2);
  CHECK(find_node(t.root, "n1") != nullptr);
  CHECK(find_node(t.root, "n9") == nullptr);
  const Statement* s = find_statement(t, "s1");
  REQUIRE(s != nullptr);
  CHECK(s->text.find("delays departure") != std::string::npos);
  CHECK(find_statement(t, "nope") == nullptr);

  for_each_node(t.root, [](CdtNode& n) { n.depth += 0; });  // mutable overload compiles
}
