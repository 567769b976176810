#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "cdt/http_oracle.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include "cdt/error.hpp"
#include "cdt/log.hpp"

namespace cdt {

using nlohmann::json;

HttpBackendConfig HttpBackendConfig::from_json(const json& j) {
  HttpBackendConfig c;
  c.base_url = j.value("base_url", "");
  if (c.base_url.empty()) fail(ErrorKind::config, "http oracle config requires base_url");
  c.api_key_env = j.value("api_key_env", c.api_key_env);
  c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
  c.max_attempts = j.value("max_attempts", c.max_attempts);
  if (c.max_attempts < 1) fail(ErrorKind::config, "http oracle max_attempts must be >= 1");
  for (const auto& [role, model] : j.value("models", json::object()).items()) {
    c.models[role] = model.get<std::string>();
  }
  for (const auto& [lens, model] : j.value("embed_models", json::object()).items()) {
    c.embed_models[lens] = model.get<std::string>();
  }
  if (c.models.find("default") == c.models.end()) {
    fail(ErrorKind::config, "http oracle config requires models.default");
  }
  if (c.embed_models.find("default") == c.embed_models.end()) {
    fail(ErrorKind::config, "http oracle config requires embed_models.default");
  }
  return c;
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  const std::string& url = config_.base_url;
  const std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    fail(ErrorKind::config, "http oracle base_url must include a scheme: " + url);
  }
  const std::size_t host_start = scheme_end + 3;
  const std::size_t path_start = url.find('/', host_start);
  if (path_start == std::string::npos) {
    host_ = url;
    path_prefix_ = "";
  } else {
    host_ = url.substr(0, path_start);
    path_prefix_ = url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  }
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    fail(ErrorKind::config,
         "API key environment variable " + config_.api_key_env + " is not set");
  }
  api_key_ = key;
}

std::string HttpBackend::model_for_role(const std::string& role) const {
  auto it = config_.models.find(role);
  if (it != config_.models.end()) return it->second;
  return config_.models.at("default");
}

std::string HttpBackend::model_for_lens(EmbedLens lens) const {
  auto it = config_.embed_models.find(to_string(lens));
  if (it != config_.embed_models.end()) return it->second;
  return config_.embed_models.at("default");
}

json HttpBackend::post(const std::string& path, const json& body) {
  const std::string payload = body.dump();
  std::string last_failure;
  for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
    if (attempt > 0) {
      const auto delay = std::chrono::milliseconds(500 << (attempt - 1));
      log_warn("oracle transport retry " + std::to_string(attempt) + " after: " + last_failure);
      std::this_thread::sleep_for(delay);
    }
    httplib::Client client(host_);
    client.set_connection_timeout(std::chrono::duration<double>(config_.timeout_seconds));
    client.set_read_timeout(std::chrono::duration<double>(config_.timeout_seconds));
    client.set_write_timeout(std::chrono::duration<double>(config_.timeout_seconds));
    httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
    auto res = client.Post(path_prefix_ + path, headers, payload, "application/json");
    if (!res) {
      last_failure = "connection error (" + httplib::to_string(res.error()) + ")";
      continue;
    }
    if (res->status >= 200 && res->status < 300) {
      json parsed = json::parse(res->body, nullptr, false);
      if (parsed.is_discarded()) {
        fail(ErrorKind::oracle_protocol, "endpoint returned non-JSON body for " + path);
      }
      return parsed;
    }
    if (res->status == 429 || res->status >= 500) {
      last_failure = "HTTP " + std::to_string(res->status);
      continue;
    }
    fail(ErrorKind::oracle_transport,
         "HTTP " + std::to_string(res->status) + " from " + path + ": " + res->body);
  }
  fail(ErrorKind::oracle_transport,
       "request to " + path + " failed after " + std::to_string(config_.max_attempts) +
           " attempts: " + last_failure);
}

GenerationResponse HttpBackend::complete(const GenerationRequest& req) {
  json body{{"model", model_for_role(req.role)},
            {"messages", json::array({json{{"role", "user"}, {"content", req.prompt}}})},
            {"temperature", req.temperature},
            {"max_tokens", req.max_tokens}};
  json res = post("/chat/completions", body);
  try {
    const json& choice = res.at("choices").at(0);
    GenerationResponse out;
    out.text = choice.at("message").at("content").get<std::string>();
    out.finish_reason = choice.value("finish_reason", "stop");
    return out;
  } catch (const json::exception& e) {
    fail(ErrorKind::oracle_protocol, std::string("unexpected completion payload: ") + e.what());
  }
}

std::vector<EmbeddingVector> HttpBackend::embed(const std::vector<std::string>& texts,
                                                EmbedLens lens) {
  const std::string model = model_for_lens(lens);
  json body{{"model", model}, {"input", texts}};
  json res = post("/embeddings", body);
  try {
    std::vector<EmbeddingVector> out(texts.size());
    for (const auto& row : res.at("data")) {
      const std::size_t index = row.at("index").get<std::size_t>();
      if (index >= out.size()) fail(ErrorKind::oracle_protocol, "embedding index out of range");
      out[index].values = row.at("embedding").get<std::vector<double>>();
      out[index].provider = model;
    }
    for (const auto& v : out) {
      if (v.values.empty()) fail(ErrorKind::oracle_protocol, "missing embedding row in payload");
    }
    return out;
  } catch (const json::exception& e) {
    fail(ErrorKind::oracle_protocol, std::string("unexpected embedding payload: ") + e.what());
  }
}

}  // namespace cdt
