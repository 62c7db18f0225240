#pragma once

#include <optional>
#include <regex>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "fault2flow/error.hpp"

namespace fault2flow {

/// Routes and header of the host's public REST API.
inline constexpr const char* kApiKeyHeader = "X-N8N-API-KEY";
inline constexpr const char* kWorkflowsRoute = "/api/v1/workflows";

inline std::string activation_route(const std::string& id) { return std::string(kWorkflowsRoute) + "/" + id + "/activate"; }

struct PushOptions {
  int timeout_seconds = 10;
  bool activate = true;
};

struct Endpoint {
  std::string host;
  int port = 80;
  std::string base_path;  // without trailing slash
};

/// `http://host[:port][/base]`. TLS endpoints are refused: the client is
/// built without an SSL backend.
inline Endpoint parse_endpoint(const std::string& url) {
  static const std::regex pattern(R"(^(https?)://([^/:]+)(?::(\d+))?(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, pattern)) throw Error(ErrorKind::ConfigError, "malformed endpoint '" + url + "'");
  if (m[1] == "https") throw Error(ErrorKind::ConfigError, "https endpoints are not supported: '" + url + "'");
  Endpoint ep;
  ep.host = m[2];
  if (m[3].matched) ep.port = std::stoi(m[3]);
  ep.base_path = m[4].matched ? m[4].str() : "";
  while (!ep.base_path.empty() && ep.base_path.back() == '/') ep.base_path.pop_back();
  return ep;
}

namespace n8n_detail {

inline void raise_for_status(const httplib::Result& res, const std::string& what) {
  if (!res) throw Error(ErrorKind::NetworkError, what + ": " + httplib::to_string(res.error()));
  int status = res->status;
  if (status == 401 || status == 403) {
    throw Error(ErrorKind::AuthError, what + ": HTTP " + std::to_string(status) + " " + res->body);
  }
  if (status >= 400 && status < 500) throw Error(ErrorKind::SchemaRejected, res->body);
  if (status >= 500 || status < 200 || status >= 300) {
    throw Error(ErrorKind::NetworkError, what + ": HTTP " + std::to_string(status) + " " + res->body);
  }
}

}  // namespace n8n_detail

/// POSTs the exported document (plus an empty `settings` object, which the
/// creation route requires) to the workflow-creation route, then POSTs the
/// activation route for the returned id. Returns that id.
inline std::string push_workflow(const std::string& document, const std::string& endpoint, const std::string& api_key,
                                 const PushOptions& opts = {}) {
  Endpoint ep = parse_endpoint(endpoint);
  nlohmann::ordered_json body;
  try {
    body = nlohmann::ordered_json::parse(document);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaError, std::string("workflow document is not valid JSON: ") + e.what());
  }
  if (!body.is_object()) throw Error(ErrorKind::SchemaError, "workflow document is not an object");
  if (!body.contains("settings")) body["settings"] = nlohmann::ordered_json::object();

  httplib::Client client(ep.host, ep.port);
  client.set_connection_timeout(opts.timeout_seconds, 0);
  client.set_read_timeout(opts.timeout_seconds, 0);
  client.set_write_timeout(opts.timeout_seconds, 0);
  httplib::Headers headers{{kApiKeyHeader, api_key}, {"Accept", "application/json"}};

  auto created = client.Post(ep.base_path + kWorkflowsRoute, headers, body.dump(), "application/json");
  n8n_detail::raise_for_status(created, "create workflow");
  std::string id;
  try {
    auto reply = nlohmann::json::parse(created->body);
    const auto& raw = reply.at("id");
    id = raw.is_string() ? raw.get<std::string>() : raw.dump();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::SchemaRejected, "creation response carries no workflow id: " + created->body);
  }

  if (opts.activate) {
    auto activated = client.Post(ep.base_path + activation_route(id), headers, "", "application/json");
    n8n_detail::raise_for_status(activated, "activate workflow " + id);
  }
  return id;
}

}  // namespace fault2flow
