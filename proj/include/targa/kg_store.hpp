#pragma once
// Immutable in-memory triple store and query-graph execution.
//
// Entities and literals share one node id space; literals are interned by
// (kind, lexical form). Three sorted copies of the triple set serve lookups:
// (s,p,o) for subject-bound patterns, (o,p,s) for object-bound patterns and
// (p,s,o) for patterns with neither end bound.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "targa/literal.hpp"
#include "targa/query_graph.hpp"

namespace targa {

using NodeId = std::uint32_t;
using RelationId = std::uint32_t;

struct StoredTriple {
  NodeId subject;
  RelationId predicate;
  NodeId object;
  auto operator<=>(const StoredTriple&) const = default;
};

struct LoadOptions {
  /// Relation used to evaluate type(v, t) constraints.
  std::string type_relation = "type.object.type";
};

class KnowledgeGraph {
 public:
  KnowledgeGraph();
  KnowledgeGraph(KnowledgeGraph&&) noexcept = default;
  KnowledgeGraph& operator=(KnowledgeGraph&&) noexcept = default;
  KnowledgeGraph(const KnowledgeGraph&) = delete;
  KnowledgeGraph& operator=(const KnowledgeGraph&) = delete;

  /// Triple lines are `subject<TAB>predicate<TAB>object` or an N-Triples
  /// subset (`<s> <p> <o> .`). Label and alias lines are `id<TAB>text`.
  /// Blank lines and lines starting with '#' are skipped. Throws ParseError
  /// carrying the offending line number.
  static KnowledgeGraph load(std::istream& triples, std::istream* labels = nullptr,
                             std::istream* aliases = nullptr, LoadOptions options = {});
  static KnowledgeGraph load_files(const std::filesystem::path& triples,
                                   const std::optional<std::filesystem::path>& labels = std::nullopt,
                                   const std::optional<std::filesystem::path>& aliases = std::nullopt,
                                   LoadOptions options = {});

  std::size_t triple_count() const { return spo_.size(); }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t entity_count() const { return entity_ids_.size(); }
  std::size_t relation_count() const { return relations_.size(); }

  std::optional<NodeId> find_entity(std::string_view id) const;
  std::optional<RelationId> find_relation(std::string_view name) const;
  std::optional<NodeId> find_literal(const Literal& lit) const;

  bool is_literal(NodeId n) const { return nodes_[n].literal.has_value(); }
  const Literal* literal(NodeId n) const { return nodes_[n].literal ? &*nodes_[n].literal : nullptr; }
  /// Entity id, or the lexical form of a literal.
  const std::string& node_key(NodeId n) const { return nodes_[n].key; }
  const std::string& label(NodeId n) const { return nodes_[n].label; }
  const std::vector<std::string>& aliases(NodeId n) const { return nodes_[n].aliases; }
  const std::string& relation_name(RelationId r) const { return relations_[r]; }

  /// Entity node ids ordered by id string.
  const std::vector<NodeId>& entities() const { return entity_ids_; }
  /// Relation names in ascending order.
  std::vector<std::string> relation_names() const;
  const std::string& type_relation() const { return options_.type_relation; }

  std::span<const StoredTriple> triples() const { return spo_; }
  std::span<const StoredTriple> match_subject(NodeId s, RelationId p) const;
  /// Triples sorted by (o, p, s) with the given object and predicate.
  std::span<const StoredTriple> match_object(NodeId o, RelationId p) const;
  std::span<const StoredTriple> match_predicate(RelationId p) const;
  bool contains(NodeId s, RelationId p, NodeId o) const;

  /// True when all three indices hold exactly the deduplicated triple set.
  bool indices_consistent() const;

  /// Executions since construction or the last reset; safe under concurrency.
  std::uint64_t execution_count() const { return counter_->load(std::memory_order_relaxed); }
  void reset_execution_count() const { counter_->store(0, std::memory_order_relaxed); }
  void record_execution() const;

 private:
  struct Node {
    std::string key;
    std::string label;
    std::optional<Literal> literal;
    std::vector<std::string> aliases;
  };

  NodeId intern_entity(std::string_view id);
  NodeId intern_literal(Literal lit);
  RelationId intern_relation(std::string_view name);
  void build_indices();

  LoadOptions options_;
  std::vector<Node> nodes_;
  std::unordered_map<std::string, NodeId> entity_index_;
  std::unordered_map<std::string, NodeId> literal_index_;
  std::vector<NodeId> entity_ids_;
  std::vector<std::string> relations_;
  std::unordered_map<std::string, RelationId> relation_index_;
  std::vector<StoredTriple> spo_;
  std::vector<StoredTriple> ops_;
  std::vector<StoredTriple> pso_;
  std::unique_ptr<std::atomic<std::uint64_t>> counter_;
};

/// Executions performed by the calling thread since the scope was opened.
/// Used for exact per-question accounting when questions run in parallel.
class ExecutionScope {
 public:
  ExecutionScope();
  std::uint64_t count() const;

 private:
  std::uint64_t start_;
};

enum class ExecMode { Probe, Full };

inline constexpr std::size_t kDefaultRowCap = 10'000;

/// Result of executing a query. Rows cover every variable of the query in
/// ascending index order; for count queries `count` holds the number of
/// distinct answer bindings and rows are projected to the answer variable.
struct BindingSet {
  std::vector<int> variables;
  std::vector<std::vector<NodeId>> rows;
  bool truncated = false;
  std::optional<std::size_t> count;

  bool empty() const { return rows.empty(); }
  /// Distinct values bound to `var`, sorted.
  std::vector<NodeId> column(int var) const;
};

/// Executes `query` against `graph`. Probe mode stops at the first satisfying
/// row. Full mode returns up to `row_cap` rows (argmax/argmin/count see every
/// row before the cap applies). Unknown entity or relation ids give an empty
/// result. Each call counts as exactly one execution.
BindingSet execute(const QueryGraph& query, const KnowledgeGraph& graph, ExecMode mode,
                   std::size_t row_cap = kDefaultRowCap);

}  // namespace targa
