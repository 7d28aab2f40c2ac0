#pragma once
// Query-to-document scorers. Relation retrieval and candidate re-ranking both
// ask the same question: how well does each document match this query?

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "targa/http.hpp"

namespace targa {

class Scorer {
 public:
  virtual ~Scorer() = default;
  /// One finite score per document, aligned with `documents`.
  virtual std::vector<double> score(std::string_view query, const std::vector<std::string>& documents) = 0;
  virtual std::string name() const = 0;
};

/// Character-trigram TF-IDF cosine. Each word is padded with one space on
/// either side before trigrams are taken; IDF is the smoothed
/// log((1 + N) / (1 + df)) + 1 fitted on the documents of the call.
class TrigramScorer final : public Scorer {
 public:
  std::vector<double> score(std::string_view query, const std::vector<std::string>& documents) override;
  std::string name() const override { return "local-trigram"; }

  /// Symmetric similarity of two texts with IDF fitted on both.
  static double similarity(std::string_view a, std::string_view b);
};

/// Token overlap F1 between a candidate and the query over content words:
/// lowercased, '_' split, punctuation and function words dropped, a plural
/// "s" folded. Token counts are clipped as a multiset intersection. A bonus of
/// `focus_weight` is added when the query's wh-head word ("which viewfinder")
/// occurs in the candidate's leading clause ("what viewfinder_type, ...").
class TokenF1Scorer final : public Scorer {
 public:
  static constexpr double focus_weight = 0.1;

  std::vector<double> score(std::string_view query, const std::vector<std::string>& documents) override;
  std::string name() const override { return "local-token-f1"; }
};

/// Embedding service: {"model", "input": [texts]} -> {"data": [{"embedding": [...]}]}.
/// The score is the cosine between the query and document embeddings.
class EmbeddingScorer final : public Scorer {
 public:
  explicit EmbeddingScorer(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::vector<double> score(std::string_view query, const std::vector<std::string>& documents) override;
  std::string name() const override { return "remote-embedding"; }

 private:
  Endpoint endpoint_;
};

/// Cross-encoder service: {"model", "query", "documents"} -> {"scores": [...]}
/// or {"results": [{"index", "relevance_score"}]}.
class CrossEncoderScorer final : public Scorer {
 public:
  explicit CrossEncoderScorer(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
  std::vector<double> score(std::string_view query, const std::vector<std::string>& documents) override;
  std::string name() const override { return "remote-cross-encoder"; }

 private:
  Endpoint endpoint_;
};

}  // namespace targa
