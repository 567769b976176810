#include "cdt/serde.hpp"

#include <fstream>
#include <sstream>

#include "cdt/error.hpp"

namespace cdt {

using nlohmann::json;

namespace {

json matrix_to_json(const GroundingMatrix& m) {
  json rows = json::array();
  for (const auto& row : m.labels) {
    json r = json::array();
    for (EvidenceLabel l : row) r.push_back(to_string(l));
    rows.push_back(std::move(r));
  }
  return json{{"node_id", m.node_id},
              {"event_ids", m.event_ids},
              {"statement_ids", m.statement_ids},
              {"labels", rows}};
}

GroundingMatrix matrix_from_json(const json& j) {
  GroundingMatrix m;
  m.node_id = j.value("node_id", "");
  m.event_ids = j.at("event_ids").get<std::vector<std::string>>();
  m.statement_ids = j.at("statement_ids").get<std::vector<std::string>>();
  for (const auto& row : j.at("labels")) {
    std::vector<EvidenceLabel> r;
    for (const auto& cell : row) {
      auto l = evidence_label_from_string(cell.get<std::string>());
      if (!l) fail(ErrorKind::schema, "unknown evidence label: " + cell.dump());
      r.push_back(*l);
    }
    m.labels.push_back(std::move(r));
  }
  return m;
}

json node_to_json(const CdtNode& node) {
  json statements = json::array();
  for (const auto& s : node.statements) {
    statements.push_back(json{{"id", s.id},
                              {"text", s.text},
                              {"origin", to_string(s.origin)},
                              {"created_at_phase", s.created_at_phase}});
  }
  json children = json::array();
  for (const auto& [gate, child] : node.children) {
    children.push_back(json{{"gate", json{{"id", gate.id}, {"question", gate.question}}},
                            {"node", node_to_json(child)}});
  }
  json out{{"id", node.id},
           {"depth", node.depth},
           {"statements", statements},
           {"routed_event_ids", node.routed_event_ids},
           {"children", children}};
  if (!node.grounding.statement_ids.empty() || !node.grounding.event_ids.empty()) {
    out["grounding"] = matrix_to_json(node.grounding);
  }
  return out;
}

CdtNode node_from_json(const json& j) {
  CdtNode node;
  node.id = j.at("id").get<std::string>();
  node.depth = j.at("depth").get<int>();
  for (const auto& s : j.at("statements")) {
    Statement st;
    st.id = s.at("id").get<std::string>();
    st.text = s.at("text").get<std::string>();
    auto origin = statement_origin_from_string(s.value("origin", "constructed"));
    if (!origin) fail(ErrorKind::schema, "unknown statement origin: " + s.dump());
    st.origin = *origin;
    st.created_at_phase = s.value("created_at_phase", "");
    node.statements.push_back(std::move(st));
  }
  node.routed_event_ids = j.at("routed_event_ids").get<std::vector<std::string>>();
  if (j.contains("grounding")) {
    node.grounding = matrix_from_json(j.at("grounding"));
  }
  for (const auto& c : j.at("children")) {
    Gate gate;
    gate.id = c.at("gate").at("id").get<std::string>();
    gate.question = c.at("gate").at("question").get<std::string>();
    node.children.emplace_back(std::move(gate), node_from_json(c.at("node")));
  }
  return node;
}

}  // namespace

json hyperparams_to_json(const HyperParams& hp) {
  return json{{"d_max", hp.d_max},
              {"rounds_r", hp.rounds_r},
              {"per_centroid_m", hp.per_centroid_m},
              {"hypotheses_k", hp.hypotheses_k},
              {"tau_accept_keep", hp.tau_accept_keep},
              {"tau_reject_delete", hp.tau_reject_delete},
              {"tau_filter", hp.tau_filter},
              {"tau_min", hp.tau_min},
              {"min_node_size", hp.min_node_size},
              {"candidates_c", hp.candidates_c},
              {"voting_rounds", hp.voting_rounds},
              {"bss_top_n", hp.bss_top_n},
              {"bss_context_tau", hp.bss_context_tau}};
}

HyperParams hyperparams_from_json(const json& j) {
  HyperParams hp;
  hp.d_max = j.value("d_max", hp.d_max);
  hp.rounds_r = j.value("rounds_r", hp.rounds_r);
  hp.per_centroid_m = j.value("per_centroid_m", hp.per_centroid_m);
  hp.hypotheses_k = j.value("hypotheses_k", hp.hypotheses_k);
  hp.tau_accept_keep = j.value("tau_accept_keep", hp.tau_accept_keep);
  hp.tau_reject_delete = j.value("tau_reject_delete", hp.tau_reject_delete);
  hp.tau_filter = j.value("tau_filter", hp.tau_filter);
  hp.tau_min = j.value("tau_min", hp.tau_min);
  hp.min_node_size = j.value("min_node_size", hp.min_node_size);
  hp.candidates_c = j.value("candidates_c", hp.candidates_c);
  hp.voting_rounds = j.value("voting_rounds", hp.voting_rounds);
  hp.bss_top_n = j.value("bss_top_n", hp.bss_top_n);
  hp.bss_context_tau = j.value("bss_context_tau", hp.bss_context_tau);
  hp.validate();
  return hp;
}

json tree_to_json(const Cdt& tree) {
  json events = json::array();
  for (const auto& ev : tree.provenance_log) {
    events.push_back(json{{"seq", ev.seq},
                          {"timestamp", ev.timestamp},
                          {"phase", ev.phase},
                          {"op", ev.op},
                          {"node_id", ev.node_id},
                          {"statement_id", ev.statement_id},
                          {"details", ev.details}});
  }
  return json{{"schema_version", kTreeSchemaVersion},
              {"tree", json{{"group", tree.group},
                            {"hyperparams", hyperparams_to_json(tree.hyperparams)},
                            {"provenance_log", events},
                            {"root", node_to_json(tree.root)}}}};
}

Cdt tree_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("schema_version")) {
    fail(ErrorKind::schema, "tree document missing schema_version");
  }
  const int version = doc.at("schema_version").get<int>();
  if (version != kTreeSchemaVersion) {
    fail(ErrorKind::schema, "unsupported tree schema_version " + std::to_string(version) +
                                " (expected " + std::to_string(kTreeSchemaVersion) + ")");
  }
  try {
    const json& t = doc.at("tree");
    Cdt tree;
    tree.group = t.at("group").get<std::string>();
    tree.hyperparams = hyperparams_from_json(t.at("hyperparams"));
    tree.root = node_from_json(t.at("root"));
    for (const auto& e : t.value("provenance_log", json::array())) {
      ProvenanceEvent ev;
      ev.seq = e.at("seq").get<int>();
      ev.timestamp = e.value("timestamp", "");
      ev.phase = e.value("phase", "");
      ev.op = e.at("op").get<std::string>();
      ev.node_id = e.value("node_id", "");
      ev.statement_id = e.value("statement_id", "");
      ev.details = e.value("details", json::object());
      tree.provenance_log.push_back(std::move(ev));
    }
    return tree;
  } catch (const json::exception& e) {
    fail(ErrorKind::schema, std::string("malformed tree document: ") + e.what());
  }
}

std::string serialize_tree(const Cdt& tree) { return tree_to_json(tree).dump(2) + "\n"; }

Cdt deserialize_tree(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) fail(ErrorKind::schema, "tree document is not valid JSON");
  return tree_from_json(doc);
}

void save_tree(const Cdt& tree, const std::string& path) {
  write_text_file(path, serialize_tree(tree));
}

Cdt load_tree(const std::string& path) { return deserialize_tree(read_text_file(path)); }

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  return out;
}

std::string truncate80(const std::string& s) {
  if (s.size() <= 80) return s;
  return s.substr(0, 80) + "...";
}

void node_to_dot(const CdtNode& node, std::ostringstream& os) {
  std::ostringstream label;
  label << node.id;
  for (const auto& s : node.statements) {
    label << "\n- " << truncate80(s.text);
  }
  os << "  \"" << node.id << "\" [shape=box, label=\"" << dot_escape(label.str()) << "\"];\n";
  for (const auto& [gate, child] : node.children) {
    os << "  \"" << node.id << "\" -> \"" << child.id << "\" [label=\""
       << dot_escape(truncate80(gate.question)) << "\"];\n";
    node_to_dot(child, os);
  }
}

}  // namespace

std::string tree_to_dot(const Cdt& tree) {
  std::ostringstream os;
  os << "digraph cdt {\n";
  os << "  rankdir=TB;\n";
  os << "  labelloc=t;\n";
  os << "  label=\"" << dot_escape(tree.group) << "\";\n";
  node_to_dot(tree.root, os);
  os << "}\n";
  return os.str();
}

json observation_to_json(const Observation& obs) {
  return json{{"id", obs.id},
              {"group", obs.group},
              {"domain", obs.domain},
              {"source", to_string(obs.source)},
              {"order_key", obs.order_key},
              {"context", obs.context},
              {"decision", obs.decision},
              {"question", obs.question}};
}

Observation observation_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorKind::data, "observation must be a JSON object");
  Observation obs;
  auto need_string = [&](const char* field, bool allow_empty) {
    if (!j.contains(field)) fail(ErrorKind::data, std::string("missing field: ") + field);
    const json& v = j.at(field);
    if (v.is_string()) {
      std::string s = v.get<std::string>();
      if (s.empty() && !allow_empty) fail(ErrorKind::data, std::string("empty field: ") + field);
      return s;
    }
    if (v.is_number_integer() && std::string(field) == "id") {
      return std::to_string(v.get<std::int64_t>());
    }
    fail(ErrorKind::data, std::string("field must be a string: ") + field);
  };
  obs.id = need_string("id", false);
  obs.group = need_string("group", false);
  obs.domain = need_string("domain", false);
  std::string source = need_string("source", false);
  auto src = source_from_string(source);
  if (!src) fail(ErrorKind::data, "unknown source: " + source);
  obs.source = *src;
  if (!j.contains("order_key") || !j.at("order_key").is_number_integer()) {
    fail(ErrorKind::data, "order_key must be an integer");
  }
  obs.order_key = j.at("order_key").get<std::int64_t>();
  obs.context = need_string("context", false);
  obs.decision = need_string("decision", false);
  obs.question = j.contains("question") ? need_string("question", true) : "";
  return obs;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open for reading: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) fail(ErrorKind::io, "read failed: " + path);
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot open for writing: " + path);
  out << content;
  out.flush();
  if (!out) fail(ErrorKind::io, "write failed: " + path);
}

}  // namespace cdt
