#pragma once

#include <string>

#include <json.hpp>

#include "cdt/model.hpp"

namespace cdt {

inline constexpr int kTreeSchemaVersion = 1;

nlohmann::json hyperparams_to_json(const HyperParams& hp);
HyperParams hyperparams_from_json(const nlohmann::json& j);  // validates bounds

nlohmann::json tree_to_json(const Cdt& tree);
Cdt tree_from_json(const nlohmann::json& doc);  // rejects unknown schema_version

std::string serialize_tree(const Cdt& tree);
Cdt deserialize_tree(const std::string& text);

void save_tree(const Cdt& tree, const std::string& path);
Cdt load_tree(const std::string& path);

// Graphviz rendering: gate questions label the edges, statements are listed
// inside node labels, long statements are cut at 80 chars with an ellipsis.
std::string tree_to_dot(const Cdt& tree);

nlohmann::json observation_to_json(const Observation& obs);
// Throws a data error naming the offending field.
Observation observation_from_json(const nlohmann::json& j);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace cdt
