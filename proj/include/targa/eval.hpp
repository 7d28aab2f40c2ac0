#pragma once
// Benchmark datasets, the F1 metric, the benchmark runner, demonstration
// corruption and the brute-force enumeration oracle.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "targa/construction.hpp"
#include "targa/qa_engine.hpp"

namespace targa {

struct DatasetItem {
  std::string id;
  std::string question;
  std::optional<EntityLinks> links;
  std::vector<std::string> answers;
  std::optional<std::string> logic_form;
  std::optional<std::string> tag;
};

/// JSON lines with "question", optional "id", "entities" (object of surface
/// to node id, order kept), "answers", "logic_form" and "tag" (one of iid,
/// compositional, zero-shot). Throws ParseError with the line number.
std::vector<DatasetItem> load_dataset(std::istream& in);
std::vector<DatasetItem> load_dataset_file(const std::filesystem::path& path);

/// JSON lines of {"question", "logic_form"}.
std::vector<TrainingExample> load_training_pool(const std::filesystem::path& path);

/// Trimmed answer string; numerals are reduced to a canonical decimal form.
std::string normalize_answer(std::string_view answer);

/// Set F1 over normalized answers. Both empty gives 1, one empty gives 0.
double f1(const std::vector<std::string>& predicted, const std::vector<std::string>& gold);

enum class CorruptionMode { Relation, Entity };

std::string_view to_string(CorruptionMode mode);
std::optional<CorruptionMode> parse_corruption_mode(std::string_view text);

/// Uniform integer in [0, n) with a fixed, platform-independent mapping from
/// the generator's output.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n);

/// Seed for item `index` of a run seeded with `seed`.
std::uint64_t item_seed(std::uint64_t seed, std::uint64_t index);

/// Alters exactly `level` of the demonstrations that carry a query, each by
/// one relation (or entity) occurrence replaced with a different one from the
/// graph. Altered demonstrations are re-rendered and flagged. Throws
/// ConfigError when fewer than `level` demonstrations carry a query.
std::vector<Demonstration> corrupt_demonstrations(const std::vector<Demonstration>& demos, std::size_t level,
                                                  CorruptionMode mode, const KnowledgeGraph& graph,
                                                  std::uint64_t seed);

struct AttackOptions {
  std::size_t level = 0;
  CorruptionMode mode = CorruptionMode::Relation;
};

struct BenchmarkOptions {
  EngineOptions engine;
  std::size_t jobs = 1;
  std::uint64_t seed = 0;
  std::optional<AttackOptions> attack;
};

struct ItemResult {
  std::size_t index = 0;
  std::string id;
  std::optional<std::string> tag;
  double f1 = 0;
  bool hard_failed = false;
  std::string failure;
  std::size_t corrupted = 0;
  AnswerRecord record;
};

struct EvalReport {
  std::vector<ItemResult> items;
  double wall_seconds = 0;

  std::optional<double> mean_f1() const;
  double mean_qpq() const;
  double mean_tpq() const;
  double mean_pool_size() const;
  std::size_t hard_failures() const;
  /// Mean F1 and item count per generalization tag.
  std::map<std::string, std::pair<double, std::size_t>> per_tag() const;

  /// Deterministic summary: no timings, no run configuration.
  nlohmann::ordered_json report_json() const;
  nlohmann::ordered_json timing_json() const;
};

/// Answers every item; item-level failures are recorded, never thrown.
EvalReport run_benchmark(const std::vector<DatasetItem>& dataset, const KnowledgeGraph& graph,
                         const BenchmarkOptions& options, const Providers& providers);

/// Every valid connected structure anchored on `entities` with relations from
/// `relations` that splits into single-entity pieces of at most max_hops
/// edges, up to max_edges edges in total, with every answer placement.
/// Validity is decided by a naive scan evaluator independent of the store's
/// indices. Refuses graphs with more than `node_cap` nodes.
std::set<std::string> brute_force_enumerate(const std::vector<EntityRef>& entities,
                                            const std::vector<std::string>& relations,
                                            const KnowledgeGraph& graph, const Limits& limits,
                                            std::size_t node_cap = 50);

/// Linear-scan evaluation of the triple patterns of `triples`.
bool naive_nonempty(const std::vector<Triple>& triples, const KnowledgeGraph& graph);

}  // namespace targa
