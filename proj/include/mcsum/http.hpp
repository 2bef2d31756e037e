#pragma once

// Retrying JSON-over-HTTP POST shared by the remote providers.

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "mcsum/error.hpp"

namespace mcsum::http {

using Headers = std::vector<std::pair<std::string, std::string>>;

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // starts with '/'
};

inline Endpoint parse_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorKind::kContract, "endpoint '" + url + "' has no scheme");
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorKind::kContract, "endpoint '" + url + "' must be http or https");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

struct RetryPolicy {
  std::size_t max_retries = 3;
  double initial_backoff_seconds = 0.5;
  double timeout_seconds = 60.0;
};

/// Reads a bearer token from the environment variable `env_name`. An empty
/// name means no authentication.
inline Headers bearer_auth(const std::string& env_name) {
  if (env_name.empty()) return {};
  const char* token = std::getenv(env_name.c_str());
  if (token == nullptr || *token == '\0') {
    throw Error(ErrorKind::kContract, "environment variable " + env_name + " (API token) is not set");
  }
  return {{"Authorization", std::string("Bearer ") + token}};
}

/// POSTs `body` and parses the JSON reply. Connection failures, 429 and 5xx
/// are retried with exponential backoff; other statuses and malformed JSON
/// fail immediately with a protocol error.
inline nlohmann::json post_json(const std::string& url, const nlohmann::json& body, const Headers& headers,
                                const RetryPolicy& policy) {
  const auto endpoint = parse_endpoint(url);
  httplib::Client client(endpoint.origin);
  const auto timeout = std::chrono::duration<double>(policy.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

  httplib::Headers hdrs;
  for (const auto& [k, v] : headers) hdrs.emplace(k, v);
  const auto payload = body.dump();

  std::string last_failure;
  double backoff = policy.initial_backoff_seconds;
  for (std::size_t attempt = 0; attempt <= policy.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      backoff *= 2.0;
    }
    auto res = client.Post(endpoint.path, hdrs, payload, "application/json");
    if (!res) {
      last_failure = "connection failed (" + httplib::to_string(res.error()) + ")";
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_failure = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw Error(ErrorKind::kProtocol, url + " answered HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::kProtocol, url + " returned invalid JSON: " + e.what());
    }
  }
  throw Error(ErrorKind::kTransport, url + " unreachable after " + std::to_string(policy.max_retries + 1) +
                                         " attempts: " + last_failure);
}

}  // namespace mcsum::http
