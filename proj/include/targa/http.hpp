#pragma once
// Minimal JSON-over-HTTP(S) client used by the remote providers.

#include <string>

#include <json.hpp>

namespace targa {

struct Endpoint {
  /// Full URL, e.g. "https://api.example.com/v1/embeddings".
  std::string url;
  std::string model;
  /// Name of the environment variable holding the bearer token; may be empty.
  std::string token_env;
  int timeout_seconds = 60;
  int retries = 2;
};

/// POSTs `body` and returns the decoded JSON response. Transport failures and
/// 5xx responses are retried up to `endpoint.retries` times. Throws
/// ProviderError naming the endpoint when all attempts fail.
nlohmann::json post_json(const Endpoint& endpoint, const nlohmann::json& body, int* attempts = nullptr);

}  // namespace targa
