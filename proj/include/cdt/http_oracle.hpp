#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "cdt/oracle.hpp"

namespace cdt {

// Chat-completion + embedding endpoints behind one base URL. The API key is
// read from the named environment variable; it is never stored in configs.
struct HttpBackendConfig {
  std::string base_url;
  std::string api_key_env = "CDT_API_KEY";
  double timeout_seconds = 60.0;
  int max_attempts = 3;
  // Generation model per request role, "default" as fallback.
  std::map<std::string, std::string> models;
  // Embedding model per lens name, "default" as fallback.
  std::map<std::string, std::string> embed_models;

  static HttpBackendConfig from_json(const nlohmann::json& j);
};

class HttpBackend : public TextBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  GenerationResponse complete(const GenerationRequest& req) override;
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                     EmbedLens lens) override;

 private:
  nlohmann::json post(const std::string& path, const nlohmann::json& body);
  std::string model_for_role(const std::string& role) const;
  std::string model_for_lens(EmbedLens lens) const;

  HttpBackendConfig config_;
  std::string host_;
  std::string path_prefix_;
  std::string api_key_;
};

}  // namespace cdt
