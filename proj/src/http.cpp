#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "targa/http.hpp"

#include <cstdlib>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "targa/error.hpp"

namespace targa {

namespace {

struct SplitUrl {
  std::string origin;
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ProviderError("endpoint URL lacks a scheme", url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

nlohmann::json post_json(const Endpoint& endpoint, const nlohmann::json& body, int* attempts) {
  if (endpoint.url.empty()) throw ProviderError("no endpoint URL configured", "");
  const auto [origin, path] = split_url(endpoint.url);

  httplib::Headers headers;
  if (!endpoint.token_env.empty()) {
    const char* token = std::getenv(endpoint.token_env.c_str());
    if (token == nullptr || *token == '\0') {
      throw ProviderError("environment variable " + endpoint.token_env + " is not set", endpoint.url);
    }
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  std::string last_error;
  const int tries = std::max(0, endpoint.retries) + 1;
  for (int attempt = 1; attempt <= tries; ++attempt) {
    if (attempts != nullptr) *attempts = attempt;
    httplib::Client client(origin);
    client.set_connection_timeout(endpoint.timeout_seconds, 0);
    client.set_read_timeout(endpoint.timeout_seconds, 0);
    client.set_write_timeout(endpoint.timeout_seconds, 0);
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
    } else if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
    } else if (res->status >= 400) {
      throw ProviderError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200), endpoint.url);
    } else {
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("malformed JSON response: ") + e.what(), endpoint.url);
      }
    }
    spdlog::warn("{} (attempt {}/{}) at {}", last_error, attempt, tries, endpoint.url);
  }
  throw ProviderError(last_error, endpoint.url);
}

}  // namespace targa
