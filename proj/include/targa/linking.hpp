#pragma once
// Candidate entities and relations for a question.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "targa/kg_store.hpp"
#include "targa/scoring.hpp"

namespace targa {

/// Surface form and node id pairs as supplied with a dataset item, in order.
using EntityLinks = std::vector<std::pair<std::string, std::string>>;

struct EntityCandidate {
  std::string surface;
  NodeId node = 0;
};

struct EntityCandidates {
  enum class Source { Dataset, LabelMatch };
  std::vector<EntityCandidate> entries;
  Source source = Source::LabelMatch;

  bool empty() const { return entries.empty(); }
  /// Entity constants carrying their graph labels, in candidate order.
  std::vector<EntityRef> refs(const KnowledgeGraph& graph) const;
};

/// Provided links are kept in order (unknown ids dropped with a warning,
/// duplicates by node dropped). Without links, the question is scanned left
/// to right for the longest token run equal to an entity label or alias.
EntityCandidates link_entities(std::string_view nlq, const std::optional<EntityLinks>& provided,
                               const KnowledgeGraph& graph);

struct RelationCandidate {
  std::string relation;
  double score = 0;
};

/// Top-k relations by scorer similarity between the question and the
/// relation's segmented name, ties broken by name.
std::vector<RelationCandidate> retrieve_relations(std::string_view nlq, const KnowledgeGraph& graph,
                                                  std::size_t k, Scorer& scorer);

}  // namespace targa
