#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdt/bench.hpp"
#include "cdt/error.hpp"
#include "cdt/mock_oracle.hpp"
#include "cdt/model.hpp"
#include "cdt/serde.hpp"
#include "support.hpp"

using namespace cdt;
using nlohmann::json;
using testsupport::CorpusSpec;
using testsupport::disjoint_world;
using testsupport::fresh_dir;
using testsupport::planted_corpus;
using testsupport::write_corpus_file;

namespace {

template <typename Fn>
std::optional<ErrorKind> thrown_kind(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

std::string obs_line(const std::string& id, const std::string& group, std::int64_t key) {
  return json{{"id", id},          {"group", group},   {"domain", "synthetic"},
              {"source", "synthetic"}, {"order_key", key}, {"context", "ctx " + id},
              {"decision", "dec " + id}}
      .dump();
}

Observation keyed_obs(const std::string& id, std::int64_t key) {
  Observation o;
  o.id = id;
  o.group = "g";
  o.domain = "synthetic";
  o.order_key = key;
  o.context = "ctx " + id;
  o.decision = "dec " + id;
  return o;
}

std::size_t line_count(const std::string& text) {
  std::size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("jsonl ingestion keeps good lines and records bad ones") {
  std::string dir = fresh_dir("bench_ingest");
  std::string path = dir + "/pairs.jsonl";
  std::ostringstream file;
  file << obs_line("a1", "gb", 1) << "\n";
  file << "   \n";
  file << "{not json\n";
  file << obs_line("a2", "ga", 2) << "\n";
  file << R"({"id":"bad1","group":"ga","domain":"d","source":"synthetic","order_key":3,"context":"c"})"
       << "\n";
  file << obs_line("a3", "gb", 4) << "\n";
  write_text_file(path, file.str());

  IngestResult res = ingest(path);
  REQUIRE(res.by_group.size() == 2);
  REQUIRE(res.by_group.count("ga") == 1);
  REQUIRE(res.by_group.count("gb") == 1);
  CHECK(res.by_group.at("ga").size() == 1);
  CHECK(res.by_group.at("ga")[0].id == "a2");
  REQUIRE(res.by_group.at("gb").size() == 2);
  CHECK(res.by_group.at("gb")[0].id == "a1");  // file order within the group
  CHECK(res.by_group.at("gb")[1].id == "a3");

  REQUIRE(res.errors.size() == 2);
  CHECK(res.errors[0].line == 3);
  CHECK(res.errors[0].message == "invalid JSON");
  CHECK(res.errors[1].line == 5);
  CHECK(res.errors[1].message.find("decision") != std::string::npos);
}

TEST_CASE("duplicate observation ids abort the ingest with both lines named") {
  std::string dir = fresh_dir("bench_dup");
  std::string path = dir + "/pairs.jsonl";
  write_text_file(path, obs_line("dup", "g", 1) + "\n" + obs_line("other", "g", 2) + "\n" +
                            obs_line("dup", "g", 3) + "\n");
  try {
    (void)ingest(path);
    FAIL("expected the duplicate id to throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::data);
    CHECK(std::string(e.what()).find("dup") != std::string::npos);
    CHECK(std::string(e.what()).find("lines 1 and 3") != std::string::npos);
  }
}

TEST_CASE("a missing observation file is an io error") {
  CHECK(thrown_kind([] { (void)ingest("/nonexistent/pairs.jsonl"); }) == ErrorKind::io);
}

TEST_CASE("chronological splits respect order and the fraction") {
  std::vector<Observation> corpus;
  for (int i = 9; i >= 0; --i)  // deliberately reversed input order
    corpus.push_back(keyed_obs("e" + std::to_string(i), i));

  Split s = chronological_split(corpus, 0.7);
  REQUIRE(s.train_ids.size() == 7);
  REQUIRE(s.test_ids.size() == 3);
  CHECK(s.train_ids.front() == "e0");
  CHECK(s.train_ids.back() == "e6");
  CHECK(s.test_ids == std::vector<std::string>{"e7", "e8", "e9"});

  Split tiny = chronological_split(corpus, 0.01);
  CHECK(tiny.train_ids == std::vector<std::string>{"e0"});
  CHECK(tiny.test_ids.size() == 9);

  // A fraction that would swallow everything keeps one event for test.
  std::vector<Observation> three = {keyed_obs("x0", 0), keyed_obs("x1", 1), keyed_obs("x2", 2)};
  Split clamped = chronological_split(three, 1.0);
  CHECK(clamped.train_ids.size() == 2);
  CHECK(clamped.test_ids == std::vector<std::string>{"x2"});

  CHECK(thrown_kind([&] { (void)chronological_split({keyed_obs("solo", 0)}, 0.5); }) ==
        ErrorKind::data);
  CHECK(thrown_kind([&] { (void)chronological_split(corpus, 0.0); }) == ErrorKind::config);
  CHECK(thrown_kind([&] { (void)chronological_split(corpus, 1.2); }) == ErrorKind::config);
}

TEST_CASE("equal order keys fall back to id order") {
  std::vector<Observation> corpus = {keyed_obs("b", 5), keyed_obs("a", 5), keyed_obs("c", 1)};
  Split s = chronological_split(corpus, 0.6);
  CHECK(s.train_ids == std::vector<std::string>{"c", "a"});
  CHECK(s.test_ids == std::vector<std::string>{"b"});
}

TEST_CASE("three phase split puts the remainder early") {
  std::vector<Observation> corpus;
  for (int i = 0; i < 8; ++i) corpus.push_back(keyed_obs("e" + std::to_string(i), i));
  auto phases = three_phase_split(corpus);
  REQUIRE(phases[0].size() == 3);
  REQUIRE(phases[1].size() == 3);
  REQUIRE(phases[2].size() == 2);
  CHECK(phases[0][0].id == "e0");
  CHECK(phases[1][0].id == "e3");
  CHECK(phases[2][1].id == "e7");

  std::vector<Observation> minimal = {keyed_obs("a", 0), keyed_obs("b", 1), keyed_obs("c", 2)};
  auto ones = three_phase_split(minimal);
  CHECK(ones[0].size() == 1);
  CHECK(ones[1].size() == 1);
  CHECK(ones[2].size() == 1);

  CHECK(thrown_kind([&] { (void)three_phase_split({keyed_obs("a", 0), keyed_obs("b", 1)}); }) ==
        ErrorKind::data);
}

TEST_CASE("run configs round trip through json") {
  RunConfig cfg;
  cfg.data_path = "corpus.jsonl";
  cfg.plan = "temporal";
  cfg.groups = {"g1", "g2"};
  cfg.methods = {"fixed", "adapted"};
  cfg.source_group = "src";
  cfg.train_fraction = 0.6;
  cfg.seed = 42;
  cfg.timestamp = "2026-02-01T00:00:00Z";
  cfg.hp.d_max = 2;
  cfg.hp.rounds_r = 3;
  cfg.hp.bss_top_n = 10;
  cfg.profiles = {{"g1", "They patrol at dusk."}};
  cfg.oracle = json{{"kind", "hash"}, {"dim", 8}};

  RunConfig back = run_config_from_json(run_config_to_json(cfg));
  CHECK(back.data_path == cfg.data_path);
  CHECK(back.plan == cfg.plan);
  CHECK(back.groups == cfg.groups);
  CHECK(back.methods == cfg.methods);
  CHECK(back.source_group == cfg.source_group);
  CHECK(back.train_fraction == doctest::Approx(0.6));
  CHECK(back.seed == 42);
  CHECK(back.timestamp == cfg.timestamp);
  CHECK(back.hp.d_max == 2);
  CHECK(back.hp.rounds_r == 3);
  CHECK(back.hp.bss_top_n == 10);
  CHECK(back.hp.min_node_size == 8);  // untouched fields keep their defaults
  CHECK(back.profiles == cfg.profiles);
  CHECK(back.oracle == cfg.oracle);

  RunConfig defaults = run_config_from_json(json::object());
  CHECK(defaults.data_path.empty());
  CHECK(defaults.plan == "main");
  CHECK(defaults.train_fraction == doctest::Approx(0.7));
  CHECK(defaults.hp.d_max == 3);
  CHECK(defaults.profiles.empty());

  CHECK(thrown_kind([] {
          (void)run_config_from_json(json{{"profiles", json::array({"x"})}});
        }) == ErrorKind::config);
}

TEST_CASE("the harness writes a complete and reproducible run directory") {
  auto world = disjoint_world(2, 101);
  PlantedRuleOracle oracle(world);

  CorpusSpec spec_a;
  spec_a.group = "crew-a";
  spec_a.per_rule = 12;
  spec_a.id_prefix = "a";
  CorpusSpec spec_b;
  spec_b.group = "crew-b";
  spec_b.per_rule = 12;
  spec_b.id_prefix = "b";
  std::vector<Observation> all = planted_corpus(world, spec_a);
  std::vector<Observation> more = planted_corpus(world, spec_b);
  all.insert(all.end(), more.begin(), more.end());

  std::string dir = fresh_dir("bench_run");
  std::string data = write_corpus_file(dir + "/pairs.jsonl", all);

  RunConfig cfg;
  cfg.data_path = data;
  cfg.plan = "main";
  cfg.methods = {"cdt", "vanilla", "human_profile"};
  cfg.seed = 5;
  cfg.profiles = {{"crew-a", "They reliably answer " + world.rules[0].context_marker +
                                 " conditions with " + world.rules[0].decision_marker +
                                 " moves."}};

  std::string out1 = dir + "/run1";
  RunReport rep = run_experiment(cfg, oracle, out1);
  CHECK(rep.dir == out1);
  REQUIRE(rep.cells.size() == 6);

  auto cell = [&](const std::string& g, const std::string& m) -> const CellResult& {
    for (const auto& c : rep.cells)
      if (c.group == g && c.method == m) return c;
    static CellResult missing;
    FAIL("no cell for " << g << "/" << m);
    return missing;
  };
  CHECK(cell("crew-a", "cdt").ok);
  CHECK(cell("crew-a", "cdt").predictions == 7);  // 24 events, 0.7 train fraction
  CHECK(cell("crew-a", "vanilla").ok);
  CHECK(cell("crew-a", "human_profile").ok);
  CHECK(cell("crew-b", "cdt").ok);
  CHECK(!cell("crew-b", "human_profile").ok);
  CHECK(cell("crew-b", "human_profile").error.find("no profile text") != std::string::npos);

  namespace fs = std::filesystem;
  for (const char* rel :
       {"config.json", "ingest_errors.json", "errors.json", "run_info.json", "summary.csv",
        "groups/crew-a/tree.json", "groups/crew-a/predictions_cdt.jsonl",
        "groups/crew-a/evaluations_cdt.jsonl", "groups/crew-a/predictions_vanilla.jsonl",
        "groups/crew-a/drift.json", "groups/crew-b/tree.json", "analysis/similarity_bss.csv"}) {
    CHECK_MESSAGE(fs::exists(out1 + "/" + rel), rel);
  }
  CHECK(!fs::exists(out1 + "/groups/crew-b/predictions_human_profile.jsonl"));

  CHECK(json::parse(read_text_file(out1 + "/config.json")) == run_config_to_json(cfg));
  CHECK(json::parse(read_text_file(out1 + "/ingest_errors.json")) == json::array());
  json errs = json::parse(read_text_file(out1 + "/errors.json"));
  REQUIRE(errs.size() == 1);
  CHECK(errs[0].at("group") == "crew-b");
  CHECK(errs[0].at("method") == "human_profile");

  std::string preds = read_text_file(out1 + "/groups/crew-a/predictions_cdt.jsonl");
  CHECK(line_count(preds) == 7);
  std::istringstream pred_in(preds);
  std::string first_line;
  std::getline(pred_in, first_line);
  json p0 = json::parse(first_line);
  CHECK(p0.at("group") == "crew-a");
  CHECK(p0.at("method") == "cdt");
  CHECK(p0.at("trace").is_object());
  CHECK(p0.at("trace").contains("reached_node_ids"));

  std::string vans = read_text_file(out1 + "/groups/crew-a/predictions_vanilla.jsonl");
  std::istringstream van_in(vans);
  std::getline(van_in, first_line);
  CHECK(json::parse(first_line).at("trace").is_null());

  std::string summary = read_text_file(out1 + "/summary.csv");
  CHECK(summary.rfind("method,records,", 0) == 0);
  CHECK(summary.find("\ncdt,") != std::string::npos);
  CHECK(summary.find("\nvanilla,") != std::string::npos);

  json info = json::parse(read_text_file(out1 + "/run_info.json"));
  CHECK(info.at("plan") == "main");
  CHECK(info.at("groups") == 2);
  CHECK(info.at("cells") == 6);
  CHECK(info.contains("elapsed_seconds"));

  // Same config, same backend: everything except run_info.json must repeat
  // byte for byte.
  std::string out2 = dir + "/run2";
  (void)run_experiment(cfg, oracle, out2);
  for (const char* rel : {"groups/crew-a/tree.json", "groups/crew-a/predictions_cdt.jsonl",
                          "groups/crew-a/evaluations_cdt.jsonl", "summary.csv",
                          "analysis/similarity_bss.csv"}) {
    CHECK_MESSAGE(read_text_file(out1 + "/" + rel) == read_text_file(out2 + "/" + rel), rel);
  }
}

TEST_CASE("bad run configs are rejected") {
  auto world = disjoint_world(1, 103);
  PlantedRuleOracle oracle(world);
  std::string dir = fresh_dir("bench_cfg");
  CorpusSpec spec;
  spec.group = "g";
  spec.per_rule = 4;
  std::string data = write_corpus_file(dir + "/pairs.jsonl", planted_corpus(world, spec));

  RunConfig cfg;
  cfg.data_path = data;

  RunConfig no_data = cfg;
  no_data.data_path = "";
  CHECK(thrown_kind([&] { (void)run_experiment(no_data, oracle, dir + "/o1"); }) ==
        ErrorKind::config);

  RunConfig bad_plan = cfg;
  bad_plan.plan = "sideways";
  CHECK(thrown_kind([&] { (void)run_experiment(bad_plan, oracle, dir + "/o2"); }) ==
        ErrorKind::config);

  RunConfig bad_method = cfg;
  bad_method.methods = {"adapted"};  // temporal-only method on the main plan
  CHECK(thrown_kind([&] { (void)run_experiment(bad_method, oracle, dir + "/o3"); }) ==
        ErrorKind::config);

  RunConfig ghost = cfg;
  ghost.groups = {"ghost"};
  CHECK(thrown_kind([&] { (void)run_experiment(ghost, oracle, dir + "/o4"); }) ==
        ErrorKind::config);

  RunConfig twice = cfg;
  twice.groups = {"g", "g"};
  CHECK(thrown_kind([&] { (void)run_experiment(twice, oracle, dir + "/o5"); }) ==
        ErrorKind::config);
}
