#pragma once
// End-to-end question answering: link, synthesize, rank, prompt, complete,
// parse and execute.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "targa/completion.hpp"
#include "targa/construction.hpp"
#include "targa/kg_store.hpp"
#include "targa/linking.hpp"
#include "targa/logic_form.hpp"
#include "targa/rerank.hpp"

namespace targa {

struct EngineOptions {
  std::size_t k_relations = 20;
  SynthesisOptions synthesis;
  std::size_t n_per_parent = 3;
  std::size_t m_demos = 10;
};

struct Providers {
  Scorer* relations = nullptr;
  Scorer* rerank = nullptr;
  CompletionProvider* completion = nullptr;
  const std::vector<TrainingExample>* training = nullptr;
};

struct AnswerRecord {
  std::string question;
  std::vector<std::string> entities;
  std::vector<std::string> relations;
  std::size_t pool_size = 0;
  bool pool_truncated = false;
  std::vector<Demonstration> demonstrations;
  std::string prompt;
  std::string completion;
  /// The parsed completion, re-printed; absent when parsing failed.
  std::optional<std::string> logic_form;
  std::optional<std::string> sparql;
  /// Why the completion could not be used, if it could not.
  std::optional<std::string> error;
  bool fallback = false;
  /// The synthesized candidate pool was empty.
  bool no_candidates = false;
  AnswerSet answers;
  std::vector<std::pair<std::string, double>> timings;
  std::uint64_t probe_count = 0;
  Usage usage;

  /// Every field except timings; those are added when `with_timings` is set.
  nlohmann::ordered_json to_json(bool with_timings = false) const;
  double total_seconds() const;
};

/// Applied to the selected demonstrations before the prompt is built.
using DemoTransform = std::function<void(std::vector<Demonstration>&)>;

std::string build_prompt(const std::vector<Demonstration>& demos, std::string_view nlq,
                         const std::vector<std::string>& entity_surfaces);

/// Throws ProviderError when the completion provider fails after its retries.
AnswerRecord answer_question(std::string_view nlq, const std::optional<EntityLinks>& links,
                             const KnowledgeGraph& graph, const EngineOptions& options,
                             const Providers& providers, const DemoTransform& transform = {});

}  // namespace targa
