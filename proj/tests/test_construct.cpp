#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "cdt/construct.hpp"
#include "cdt/error.hpp"
#include "cdt/ground.hpp"
#include "cdt/mock_oracle.hpp"
#include "cdt/prompts.hpp"
#include "cdt/rng.hpp"
#include "cdt/serde.hpp"
#include "support.hpp"

using namespace cdt;
using testsupport::disjoint_world;
using testsupport::planted_event;

namespace {

std::vector<Observation> mixed_cluster(const PlantedWorld& world, int n_first, int n_second) {
  std::vector<Observation> out;
  int order = 0;
  for (int i = 0; i < n_first; ++i) {
    out.push_back(planted_event(world.rules[0], "g", "a" + std::to_string(i), ++order));
  }
  for (int i = 0; i < n_second; ++i) {
    out.push_back(planted_event(world.rules[1], "g", "b" + std::to_string(i), ++order));
  }
  return out;
}

}  // namespace

TEST_CASE("hypothesis generation surfaces the cluster's rules, dominant first") {
  auto world = disjoint_world(2, 31);
  PlantedRuleOracle oracle(world);
  auto events = mixed_cluster(world, 3, 1);

  auto pairs = generate_hypotheses(events, {}, {}, "g", "synthetic", 3, oracle);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].statement_hypothesis == world.rules[0].statement);
  CHECK(pairs[0].gate_hypothesis == world.rules[0].gate);
  CHECK(pairs[1].statement_hypothesis == world.rules[1].statement);

  SUBCASE("established statements are excluded") {
    auto rest = generate_hypotheses(events, {world.rules[0].statement}, {}, "g", "synthetic", 3,
                                    oracle);
    REQUIRE(rest.size() == 1);
    CHECK(rest[0].statement_hypothesis == world.rules[1].statement);
  }
  SUBCASE("bad arguments are rejected") {
    CHECK_THROWS_AS((void)generate_hypotheses({}, {}, {}, "g", "t", 3, oracle), Error);
    CHECK_THROWS_AS((void)generate_hypotheses(events, {}, {}, "g", "t", 0, oracle), Error);
  }
}

TEST_CASE("hypothesis generation retries once in strict mode") {
  auto events = mixed_cluster(disjoint_world(1, 1), 1, 0);
  events.resize(1);

  SUBCASE("retry rescues a malformed first reply") {
    auto scripted = std::make_shared<ScriptedOracle>();
    // Only the retry prompt carries the strict suffix; the first attempt
    // falls through to the garbage default.
    scripted->script_generate(
        "did not match the required format",
        R"({"action_hypotheses": ["They act."], "scene_check_hypotheses": ["Is it so?"]})");
    scripted->set_generate_fallback("no structure here");
    CountingOracle counting(scripted);
    auto pairs = generate_hypotheses(events, {}, {}, "g", "t", 2, counting);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].statement_hypothesis == "They act.");
    CHECK(counting.counts().generate == 2);
  }
  SUBCASE("two malformed replies raise a protocol error") {
    ScriptedOracle scripted;
    scripted.set_generate_fallback("still nothing");
    try {
      (void)generate_hypotheses(events, {}, {}, "g", "t", 2, scripted);
      FAIL("expected a protocol error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::oracle_protocol);
    }
  }
}

TEST_CASE("summarization canonicalizes paraphrases and respects the cap") {
  auto world = disjoint_world(3, 17);
  PlantedRuleOracle oracle(world);

  std::vector<HypothesisPair> pairs;
  HypothesisPair exact{world.rules[0].gate, world.rules[0].statement, "r1.c0"};
  HypothesisPair variant{"Do omen-alfa readings dominate the scene?",
                         "Crews mobilize whenever omen-alfa readings spike.", "r1.c1"};
  HypothesisPair other{world.rules[1].gate, world.rules[1].statement, "r2.c0"};
  pairs = {exact, variant, other};

  auto out = summarize_hypotheses(pairs, "g", 4, 8, oracle);
  REQUIRE(out.size() == 2);
  CHECK(out[0].statement_hypothesis == world.rules[0].statement);
  CHECK(out[1].statement_hypothesis == world.rules[1].statement);
  CHECK(out[0].source_cluster == "summary");

  SUBCASE("upper bound is a hard cap") {
    std::vector<HypothesisPair> three;
    for (int i = 0; i < 3; ++i) {
      three.push_back({world.rules[i].gate, world.rules[i].statement, "c"});
    }
    auto capped = summarize_hypotheses(three, "g", 2, 2, oracle);
    CHECK(capped.size() <= 2);
    for (const auto& p : capped) {
      CHECK(world.rule_for_statement(p.statement_hypothesis) != nullptr);
    }
  }
  SUBCASE("empty input is rejected") {
    CHECK_THROWS_AS((void)summarize_hypotheses({}, "g", 4, 8, oracle), Error);
  }
}

TEST_CASE("ungated validation scores per-event consistency") {
  auto world = disjoint_world(2, 13);
  PlantedRuleOracle oracle(world);
  auto events = mixed_cluster(world, 3, 1);

  auto verdicts = validate_ungated(world.rules[0].statement, events, "g", oracle);
  CHECK(verdicts.p_global == doctest::Approx(0.75));
  REQUIRE(verdicts.by_event.size() == 4);
  CHECK(verdicts.by_event.at("a0"));
  CHECK(verdicts.by_event.at("a2"));
  CHECK_FALSE(verdicts.by_event.at("b0"));

  CHECK_THROWS_AS((void)validate_ungated("s", {}, "g", oracle), Error);
}

TEST_CASE("gated validation routes, filters, and classifies") {
  auto world = disjoint_world(3, 23);
  HyperParams hp;
  HypothesisPair pair{world.rules[0].gate, world.rules[0].statement, "c"};

  SUBCASE("clean precision over a narrow gate yields a leaf child") {
    auto events = mixed_cluster(world, 4, 4);
    UngatedVerdicts stage1;
    for (const auto& e : events) stage1.by_event[e.id] = e.id[0] == 'a';
    auto counting =
        CountingOracle(std::make_shared<PlantedRuleOracle>(world));
    auto r = validate_gated(pair, events, stage1, "g", hp, counting);
    CHECK(r.outcome == GatedOutcome::leaf_child);
    CHECK(r.routed_ids == std::vector<std::string>{"a0", "a1", "a2", "a3"});
    CHECK(r.broadness == doctest::Approx(0.5));
    CHECK(r.p_gated == doctest::Approx(1.0));
    // Stage-1 verdicts are reused: routing is the only oracle traffic.
    CHECK(counting.counts().judge_gate == 8);
    CHECK(counting.counts().generate == 0);
  }
  SUBCASE("middling precision recurses") {
    auto events = mixed_cluster(world, 4, 4);
    UngatedVerdicts stage1;
    stage1.by_event = {{"a0", true},  {"a1", true},  {"a2", false}, {"a3", false},
                       {"b0", false}, {"b1", false}, {"b2", false}, {"b3", false}};
    PlantedRuleOracle oracle(world);
    auto r = validate_gated(pair, events, stage1, "g", hp, oracle);
    CHECK(r.outcome == GatedOutcome::recurse_child);
    CHECK(r.p_gated == doctest::Approx(0.5));
  }
  SUBCASE("low routed precision is discarded") {
    auto events = mixed_cluster(world, 4, 4);
    UngatedVerdicts stage1;
    for (const auto& e : events) stage1.by_event[e.id] = e.id == "a0";
    PlantedRuleOracle oracle(world);
    auto r = validate_gated(pair, events, stage1, "g", hp, oracle);
    CHECK(r.outcome == GatedOutcome::discard);
    CHECK(r.discard_reason == "routed precision below rejection threshold");
  }
  SUBCASE("a gate matching nearly everything is too broad") {
    auto events = mixed_cluster(world, 9, 1);
    PlantedRuleOracle oracle(world);
    auto r = validate_gated(pair, events, {}, "g", hp, oracle);
    CHECK(r.outcome == GatedOutcome::discard);
    CHECK(r.discard_reason == "gate too broad");
    CHECK(r.broadness == doctest::Approx(0.9));
  }
  SUBCASE("a gate matching nothing is discarded") {
    auto events = mixed_cluster(world, 0, 4);
    PlantedRuleOracle oracle(world);
    auto r = validate_gated(pair, events, {}, "g", hp, oracle);
    CHECK(r.outcome == GatedOutcome::discard);
    CHECK(r.discard_reason == "gate routed no events");
  }
  SUBCASE("a universal gate cannot become a recursion step") {
    HyperParams open = hp;
    open.tau_filter = 1.0;
    auto events = mixed_cluster(world, 2, 0);
    UngatedVerdicts stage1;
    stage1.by_event = {{"a0", true}, {"a1", false}};
    PlantedRuleOracle oracle(world);
    auto r = validate_gated(pair, events, stage1, "g", open, oracle);
    CHECK(r.outcome == GatedOutcome::discard);
    CHECK(r.discard_reason == "gate routes every event");
  }
  SUBCASE("empty event set is rejected") {
    PlantedRuleOracle oracle(world);
    CHECK_THROWS_AS((void)validate_gated(pair, {}, {}, "g", hp, oracle), Error);
  }
}

TEST_CASE("build_tree recovers planted rules behind their gates") {
  auto world = disjoint_world(2, 41);
  PlantedRuleOracle oracle(world);
  testsupport::CorpusSpec spec;
  spec.per_rule = 12;
  auto corpus = testsupport::planted_corpus(world, spec);
  HyperParams hp;
  BuildOptions opts;
  opts.seed = 7;
  opts.timestamp = "t0";

  Cdt tree = build_tree(corpus, spec.group, hp, oracle, opts);
  CHECK(validate_tree(tree).empty());
  CHECK(tree.group == spec.group);
  CHECK(tree.root.routed_event_ids.size() == corpus.size());

  // Each rule holds on exactly half the corpus, so neither statement passes
  // unconditionally; both land in a gated child with perfect grounding.
  CHECK(tree.root.statements.empty());
  REQUIRE(tree.root.children.size() == 2);
  std::set<std::string> gates, statements;
  for (const auto& [gate, child] : tree.root.children) {
    gates.insert(gate.question);
    REQUIRE(child.statements.size() == 1);
    statements.insert(child.statements[0].text);
    CHECK(child.routed_event_ids.size() == 12);
    CHECK(child.depth == 1);
    auto stats = stats_for(child.grounding, child.statements[0].id);
    CHECK(stats.n_sup == 12);
    CHECK(stats.n_con == 0);
  }
  CHECK(gates == std::set<std::string>{world.rules[0].gate, world.rules[1].gate});
  CHECK(statements ==
        std::set<std::string>{world.rules[0].statement, world.rules[1].statement});

  // Provenance records the two gated installs under the build phase.
  int installs = 0;
  for (const auto& ev : tree.provenance_log) {
    CHECK(ev.phase == "build");
    CHECK(ev.timestamp == "t0");
    if (ev.op == "install_statement") {
      ++installs;
      CHECK(ev.details.at("mode") == "gated");
      CHECK(ev.details.at("p").get<double>() >= hp.tau_accept_keep);
    }
  }
  CHECK(installs == 2);

  SUBCASE("construction is deterministic") {
    Cdt again = build_tree(corpus, spec.group, hp, oracle, opts);
    CHECK(serialize_tree(again) == serialize_tree(tree));
  }
  SUBCASE("duplicate event ids are rejected") {
    auto dup = corpus;
    dup.push_back(corpus.front());
    CHECK_THROWS_AS((void)build_tree(dup, spec.group, hp, oracle, opts), Error);
  }
  SUBCASE("empty corpus is rejected") {
    CHECK_THROWS_AS((void)build_tree({}, spec.group, hp, oracle, opts), Error);
  }
}

TEST_CASE("an undersized corpus yields a bare root") {
  auto world = disjoint_world(2, 3);
  PlantedRuleOracle oracle(world);
  testsupport::CorpusSpec spec;
  spec.per_rule = 3;
  auto corpus = testsupport::planted_corpus(world, spec);

  HyperParams hp;
  BuildOptions opts;
  Cdt tree = build_tree(corpus, spec.group, hp, oracle, opts);
  CHECK(tree.root.statements.empty());
  CHECK(tree.root.children.empty());
  CHECK(tree.root.routed_event_ids.size() == 6);
  REQUIRE(tree.provenance_log.size() == 1);
  CHECK(tree.provenance_log[0].op == "leaf");
  CHECK(tree.provenance_log[0].details.at("reason") == "below minimum size");
}

TEST_CASE("candidate selection votes and stamps the outcome") {
  auto world = disjoint_world(2, 19);
  PlantedRuleOracle oracle(world);
  testsupport::CorpusSpec spec;
  spec.per_rule = 12;
  auto corpus = testsupport::planted_corpus(world, spec);
  HyperParams hp;
  BuildOptions opts;
  opts.seed = 99;

  SUBCASE("a single candidate skips the vote") {
    HyperParams solo = hp;
    solo.candidates_c = 1;
    Cdt direct = build_tree(corpus, spec.group, solo, oracle, opts);
    Cdt chosen = build_tree_with_selection(corpus, spec.group, solo, oracle, opts);
    CHECK(serialize_tree(chosen) == serialize_tree(direct));
  }
  SUBCASE("majority vote appends a selection record") {
    Cdt chosen = build_tree_with_selection(corpus, spec.group, hp, oracle, opts);
    CHECK(validate_tree(chosen).empty());
    REQUIRE(!chosen.provenance_log.empty());
    const auto& last = chosen.provenance_log.back();
    CHECK(last.op == "select_candidate");
    CHECK(last.details.at("rounds").get<int>() == hp.voting_rounds);
    int votes = 0;
    for (const auto& entry : last.details.at("tally")) {
      votes += entry.at("votes").get<int>();
    }
    CHECK(votes == hp.voting_rounds);

    std::set<std::string> gates;
    for (const auto& [gate, child] : chosen.root.children) gates.insert(gate.question);
    CHECK(gates == std::set<std::string>{world.rules[0].gate, world.rules[1].gate});

    Cdt again = build_tree_with_selection(corpus, spec.group, hp, oracle, opts);
    CHECK(serialize_tree(again) == serialize_tree(chosen));
  }
}

TEST_CASE("tree outlines list statements under their gates") {
  Cdt tree;
  tree.group = "g";
  tree.root.id = "n0";
  Statement s;
  s.id = "s0";
  s.text = "They always file a report.";
  tree.root.statements.push_back(s);
  Gate gate;
  gate.id = "g0";
  gate.question = "Is the harbor closed?";
  CdtNode child;
  child.id = "n1";
  child.depth = 1;
  Statement s2;
  s2.id = "s1";
  s2.text = "They reroute the ferries.";
  child.statements.push_back(s2);
  tree.root.children.emplace_back(gate, child);

  std::string outline = render_tree_outline(tree);
  CHECK(outline.find("- They always file a report.") != std::string::npos);
  CHECK(outline.find("If: Is the harbor closed?") != std::string::npos);
  CHECK(outline.find("  - They reroute the ferries.") != std::string::npos);

  Cdt bare;
  bare.root.id = "n0";
  CHECK(render_tree_outline(bare) == "(no statements)\n");
}
