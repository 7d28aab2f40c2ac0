#include "targa/config.hpp"

#include <fstream>
#include <set>

#include "targa/error.hpp"

namespace targa {

namespace {

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key \"" + key + "\" in " + where);
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("bad value for \"" + std::string(key) + "\" in " + where);
  }
}

void read_path(const nlohmann::json& j, const char* key, std::string& out, const std::filesystem::path& base,
               const std::string& where) {
  std::string value;
  if (!j.contains(key)) return;
  read(j, key, value, where);
  std::filesystem::path p(value);
  out = (p.is_relative() && !base.empty() && !value.empty()) ? (base / p).lexically_normal().string() : value;
}

void read_provider(const nlohmann::json& j, ProviderConfig& out, const std::string& where,
                   const std::set<std::string>& modes) {
  check_keys(j, {"mode", "url", "model", "token_env", "timeout", "retries"}, where);
  read(j, "mode", out.mode, where);
  if (!modes.count(out.mode)) throw ConfigError("unsupported mode \"" + out.mode + "\" in " + where);
  read(j, "url", out.endpoint.url, where);
  read(j, "model", out.endpoint.model, where);
  read(j, "token_env", out.endpoint.token_env, where);
  read(j, "timeout", out.endpoint.timeout_seconds, where);
  read(j, "retries", out.endpoint.retries, where);
}

nlohmann::ordered_json provider_json(const ProviderConfig& p) {
  return {{"mode", p.mode},
          {"url", p.endpoint.url},
          {"model", p.endpoint.model},
          {"token_env", p.endpoint.token_env},
          {"timeout", p.endpoint.timeout_seconds},
          {"retries", p.endpoint.retries}};
}

const std::set<std::string> kScorerModes{"local", "remote"};
const std::set<std::string> kCompletionModes{"echo", "remote"};

}  // namespace

void Config::apply(const nlohmann::json& j, const std::filesystem::path& base) {
  check_keys(j,
             {"graph", "limits", "decorations", "k_relations", "n_per_parent", "m_demos", "similarity", "rerank",
              "completion", "seed", "jobs", "out_dir", "training_pool"},
             "config");
  if (j.contains("graph")) {
    const auto& g = j["graph"];
    check_keys(g, {"triples", "labels", "aliases", "type_relation"}, "graph");
    read_path(g, "triples", triples, base, "graph");
    read_path(g, "labels", labels, base, "graph");
    read_path(g, "aliases", aliases, base, "graph");
    read(g, "type_relation", type_relation, "graph");
  }
  if (j.contains("limits")) {
    const auto& l = j["limits"];
    auto& limits = engine.synthesis.limits;
    check_keys(l, {"max_hops", "max_edges", "probe_budget", "value_cap"}, "limits");
    read(l, "max_hops", limits.max_hops, "limits");
    read(l, "max_edges", limits.max_edges, "limits");
    read(l, "probe_budget", limits.probe_budget, "limits");
    read(l, "value_cap", limits.value_cap, "limits");
  }
  read(j, "decorations", engine.synthesis.decorations, "config");
  read(j, "k_relations", engine.k_relations, "config");
  read(j, "n_per_parent", engine.n_per_parent, "config");
  read(j, "m_demos", engine.m_demos, "config");
  if (j.contains("similarity")) read_provider(j["similarity"], similarity, "similarity", kScorerModes);
  if (j.contains("rerank")) read_provider(j["rerank"], rerank, "rerank", kScorerModes);
  if (j.contains("completion")) read_provider(j["completion"], completion, "completion", kCompletionModes);
  read(j, "seed", seed, "config");
  read(j, "jobs", jobs, "config");
  read_path(j, "out_dir", out_dir, base, "config");
  read_path(j, "training_pool", training_pool, base, "config");
}

Config Config::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  Config c;
  c.apply(j, path.parent_path());
  return c;
}

nlohmann::ordered_json Config::to_json() const {
  const auto& l = engine.synthesis.limits;
  nlohmann::ordered_json j;
  j["graph"] = {{"triples", triples}, {"labels", labels}, {"aliases", aliases}, {"type_relation", type_relation}};
  j["limits"] = {{"max_hops", l.max_hops},
                 {"max_edges", l.max_edges},
                 {"probe_budget", l.probe_budget},
                 {"value_cap", l.value_cap}};
  j["decorations"] = engine.synthesis.decorations;
  j["k_relations"] = engine.k_relations;
  j["n_per_parent"] = engine.n_per_parent;
  j["m_demos"] = engine.m_demos;
  j["similarity"] = provider_json(similarity);
  j["rerank"] = provider_json(rerank);
  j["completion"] = provider_json(completion);
  j["seed"] = seed;
  j["jobs"] = jobs;
  j["out_dir"] = out_dir;
  j["training_pool"] = training_pool;
  return j;
}

void ConfigOverrides::apply(Config& c) const {
  auto& limits = c.engine.synthesis.limits;
  if (triples) c.triples = *triples;
  if (labels) c.labels = *labels;
  if (aliases) c.aliases = *aliases;
  if (type_relation) c.type_relation = *type_relation;
  if (max_hops) limits.max_hops = *max_hops;
  if (max_edges) limits.max_edges = *max_edges;
  if (probe_budget) limits.probe_budget = *probe_budget;
  if (k_relations) c.engine.k_relations = *k_relations;
  if (n_per_parent) c.engine.n_per_parent = *n_per_parent;
  if (m_demos) c.engine.m_demos = *m_demos;
  if (jobs) c.jobs = *jobs;
  if (decorations) c.engine.synthesis.decorations = *decorations;
  if (seed) c.seed = *seed;
  if (out_dir) c.out_dir = *out_dir;
  if (training_pool) c.training_pool = *training_pool;
  if (similarity_mode) c.similarity.mode = *similarity_mode;
  if (rerank_mode) c.rerank.mode = *rerank_mode;
  if (completion_mode) c.completion.mode = *completion_mode;
  if (!kScorerModes.count(c.similarity.mode)) throw ConfigError("unsupported similarity mode " + c.similarity.mode);
  if (!kScorerModes.count(c.rerank.mode)) throw ConfigError("unsupported rerank mode " + c.rerank.mode);
  if (!kCompletionModes.count(c.completion.mode)) {
    throw ConfigError("unsupported completion mode " + c.completion.mode);
  }
}

Config resolve_config(const std::optional<std::filesystem::path>& file, const ConfigOverrides& flags) {
  Config c = file ? Config::from_file(*file) : Config{};
  flags.apply(c);
  c.engine.synthesis.limits.check();
  return c;
}

std::unique_ptr<Scorer> make_similarity(const ProviderConfig& config) {
  if (config.mode == "remote") return std::make_unique<EmbeddingScorer>(config.endpoint);
  return std::make_unique<TrigramScorer>();
}

std::unique_ptr<Scorer> make_reranker(const ProviderConfig& config) {
  if (config.mode == "remote") return std::make_unique<CrossEncoderScorer>(config.endpoint);
  return std::make_unique<TokenF1Scorer>();
}

std::unique_ptr<CompletionProvider> make_completion(const ProviderConfig& config) {
  if (config.mode == "remote") return std::make_unique<ChatProvider>(config.endpoint);
  return std::make_unique<EchoProvider>();
}

}  // namespace targa
