#pragma once
// Run configuration: defaults, overlaid by a JSON file, overlaid by flags.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "targa/completion.hpp"
#include "targa/qa_engine.hpp"
#include "targa/scoring.hpp"

namespace targa {

struct ProviderConfig {
  /// "local" or "remote" for scorers; "echo" or "remote" for completion.
  std::string mode;
  Endpoint endpoint;
};

struct Config {
  std::string triples;
  std::string labels;
  std::string aliases;
  std::string type_relation = "type.object.type";
  EngineOptions engine;
  ProviderConfig similarity{"local", {}};
  ProviderConfig rerank{"local", {}};
  ProviderConfig completion{"echo", {}};
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string out_dir = "out";
  std::string training_pool;

  /// Overlays the keys present in `j`. Relative paths are resolved against
  /// `base`. Throws ConfigError on unknown keys or ill-typed values.
  void apply(const nlohmann::json& j, const std::filesystem::path& base = {});
  static Config from_file(const std::filesystem::path& path);
  nlohmann::ordered_json to_json() const;
};

/// Settings given on the command line; only present values override.
struct ConfigOverrides {
  std::optional<std::string> triples, labels, aliases, type_relation;
  std::optional<int> max_hops, max_edges;
  std::optional<std::size_t> probe_budget, k_relations, n_per_parent, m_demos, jobs;
  std::optional<bool> decorations;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir, training_pool;
  std::optional<std::string> similarity_mode, rerank_mode, completion_mode;

  void apply(Config& config) const;
};

Config resolve_config(const std::optional<std::filesystem::path>& file, const ConfigOverrides& flags);

std::unique_ptr<Scorer> make_similarity(const ProviderConfig& config);
std::unique_ptr<Scorer> make_reranker(const ProviderConfig& config);
std::unique_ptr<CompletionProvider> make_completion(const ProviderConfig& config);

}  // namespace targa
