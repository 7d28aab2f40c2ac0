#pragma once
// Hierarchical ranking of synthesized candidates and demonstration selection.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "targa/construction.hpp"
#include "targa/scoring.hpp"

namespace targa {

struct RankedCandidate {
  std::string key;
  QueryGraph query;
  /// Pseudo-question rendered from the query.
  std::string text;
  double score = 0;
};

struct RankedCandidates {
  /// Ordered by score descending, then canonical key ascending.
  std::vector<RankedCandidate> entries;
  std::size_t per_parent = 0;
};

/// Scores every pool query's textification against `nlq`, keeps the best `n`
/// within each parent group (parentless queries share the group "root") and
/// returns the union sorted by score.
RankedCandidates hierarchical_rank(const CandidatePool& pool, std::string_view nlq, Scorer& scorer,
                                   std::size_t n);

struct TrainingExample {
  std::string question;
  std::string logic_form;
};

struct Demonstration {
  std::string question;
  std::string logic_form;
  /// The synthetic query behind the demonstration; absent for training examples.
  std::optional<QueryGraph> query;
  double score = 0;
  bool corrupted = false;
};

/// The top `m` ranked candidates as demonstrations, ordered by ascending score
/// so the best one sits last, nearest the question. With a training pool, the
/// best ceil(m/2) training examples by similarity to `nlq` come first, then
/// synthetic demonstrations fill the remaining slots, skipping any whose logic
/// form duplicates a chosen training example.
std::vector<Demonstration> select_demonstrations(const RankedCandidates& ranked, std::size_t m,
                                                 const std::vector<TrainingExample>* training = nullptr,
                                                 Scorer* scorer = nullptr, std::string_view nlq = {});

}  // namespace targa
