#include "targa/linking.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <spdlog/spdlog.h>

#include "targa/text.hpp"

namespace targa {

std::vector<EntityRef> EntityCandidates::refs(const KnowledgeGraph& graph) const {
  std::vector<EntityRef> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(EntityRef{graph.node_key(e.node), graph.label(e.node)});
  return out;
}

namespace {

std::vector<std::string> surface_tokens(std::string_view s) { return text::tokenize(s, true); }

EntityCandidates scan_labels(std::string_view nlq, const KnowledgeGraph& graph) {
  std::map<std::vector<std::string>, std::set<NodeId>> index;
  std::size_t longest = 0;
  auto add = [&](const std::string& name, NodeId n) {
    auto toks = surface_tokens(name);
    if (toks.empty()) return;
    longest = std::max(longest, toks.size());
    index[std::move(toks)].insert(n);
  };
  for (NodeId n : graph.entities()) {
    add(graph.label(n), n);
    for (const auto& a : graph.aliases(n)) add(a, n);
  }

  EntityCandidates out;
  out.source = EntityCandidates::Source::LabelMatch;
  std::set<NodeId> seen;
  const auto words = surface_tokens(nlq);
  std::size_t i = 0;
  while (i < words.size()) {
    std::size_t matched = 0;
    for (std::size_t len = std::min(longest, words.size() - i); len > 0; --len) {
      std::vector<std::string> span(words.begin() + static_cast<std::ptrdiff_t>(i),
                                    words.begin() + static_cast<std::ptrdiff_t>(i + len));
      auto it = index.find(span);
      if (it == index.end()) continue;
      for (NodeId n : it->second) {
        if (seen.insert(n).second) out.entries.push_back({text::join(span, " "), n});
      }
      matched = len;
      break;
    }
    i += matched > 0 ? matched : 1;
  }
  return out;
}

}  // namespace

EntityCandidates link_entities(std::string_view nlq, const std::optional<EntityLinks>& provided,
                               const KnowledgeGraph& graph) {
  if (!provided) return scan_labels(nlq, graph);
  EntityCandidates out;
  out.source = EntityCandidates::Source::Dataset;
  std::set<NodeId> seen;
  for (const auto& [surface, id] : *provided) {
    auto node = graph.find_entity(id);
    if (!node) {
      spdlog::warn("dropping link {} -> {}: id not in graph", surface, id);
      continue;
    }
    if (surface.empty() || !seen.insert(*node).second) continue;
    out.entries.push_back({surface, *node});
  }
  return out;
}

std::vector<RelationCandidate> retrieve_relations(std::string_view nlq, const KnowledgeGraph& graph,
                                                  std::size_t k, Scorer& scorer) {
  if (k == 0) return {};
  const auto names = graph.relation_names();
  std::vector<std::string> texts;
  texts.reserve(names.size());
  for (const auto& n : names) texts.push_back(text::relation_text(n));
  const auto scores = scorer.score(nlq, texts);

  std::vector<RelationCandidate> ranked;
  ranked.reserve(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) ranked.push_back({names[i], scores.at(i)});
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.relation < b.relation;
  });
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

}  // namespace targa
