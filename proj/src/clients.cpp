#include "drag/embed.hpp"
#include "drag/errors.hpp"
#include "drag/orchestrate.hpp"
#include "httplib.h"
#include "json.hpp"

namespace drag {

namespace {

struct Endpoint {
  std::string host_port;  // scheme://host:port
  std::string base_path;  // leading path, usually empty
};

Endpoint split_endpoint(const std::string& endpoint) {
  if (endpoint.empty())
    throw_error(ErrorKind::IoFailure, "no endpoint configured");
  size_t scheme = endpoint.find("://");
  size_t path_start = scheme == std::string::npos
                          ? endpoint.find('/')
                          : endpoint.find('/', scheme + 3);
  if (path_start == std::string::npos) return {endpoint, ""};
  std::string path = endpoint.substr(path_start);
  if (path == "/") path.clear();
  return {endpoint.substr(0, path_start), path};
}

nlohmann::json post_json(const std::string& endpoint, const std::string& route,
                         int timeout_ms, int retries, const std::string& api_key,
                         const nlohmann::json& body) {
  Endpoint ep = split_endpoint(endpoint);
  httplib::Client client(ep.host_port);
  client.set_connection_timeout(0, timeout_ms * 1000);
  client.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
  httplib::Headers headers;
  if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

  std::string payload = body.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= retries; ++attempt) {
    auto res = client.Post(ep.base_path + route, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error&) {
      last_error = "response is not valid JSON";
    }
  }
  throw_error(ErrorKind::IoFailure,
              "POST " + endpoint + route + " failed after " +
                  std::to_string(retries + 1) + " attempts (" + last_error + ")");
}

}  // namespace

EmbeddingVector remote_embed(const RemoteEmbedConfig& config,
                             const std::string& id, const std::string& kind,
                             const std::string& payload_json) {
  nlohmann::json body;
  body["id"] = id;
  body["kind"] = kind;
  try {
    body["payload"] = nlohmann::json::parse(payload_json);
  } catch (const nlohmann::json::parse_error&) {
    body["payload"] = payload_json;  // opaque reference, e.g. an image path
  }

  nlohmann::json res = post_json(config.endpoint, "/embed", config.timeout_ms,
                                 config.retries, config.api_key, body);
  if (!res.is_object() || !res.contains("dim") || !res.contains("values") ||
      !res["values"].is_array())
    throw_error(ErrorKind::SchemaViolation,
                "embed response must carry id, dim, values");
  EmbeddingVector v;
  v.id = res.value("id", id);
  size_t dim = res["dim"].get<size_t>();
  for (const auto& x : res["values"]) {
    if (!x.is_number())
      throw_error(ErrorKind::SchemaViolation, "embed values must be numbers");
    v.values.push_back(x.get<float>());
  }
  if (v.values.size() != dim)
    throw_error(ErrorKind::SchemaViolation,
                "embed response dim " + std::to_string(dim) + " but " +
                    std::to_string(v.values.size()) + " values");
  return v;
}

GenerationResponse submit_generation(const GenClientConfig& config,
                                     const GenerationRequest& request) {
  nlohmann::json body;
  body["request_id"] = request.request_id;
  body["model"] = request.target_model;
  body["system"] = request.system_text;
  body["user"] = request.user_text;
  body["attachments"] = request.attachments;

  nlohmann::json res = post_json(config.endpoint, "/generate", config.timeout_ms,
                                 config.retries, config.api_key, body);
  if (!res.is_object() || !res.contains("status"))
    throw_error(ErrorKind::SchemaViolation, "generate response missing status");
  GenerationResponse out;
  out.request_id = res.value("request_id", request.request_id);
  out.artifact_ref = res.value("artifact_ref", "");
  out.status = res["status"].get<std::string>();
  return out;
}

}  // namespace drag
