#pragma once
// Candidate query graphs: triples over entities and variables plus optional
// decorations, with canonical keys and a deterministic display order.

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "targa/literal.hpp"

namespace targa {

struct Var {
  int index = 0;
  bool operator==(const Var&) const = default;
};

/// An entity constant. The label is carried for rendering only and does not
/// take part in equality or canonical keys.
struct EntityRef {
  std::string id;
  std::string label;
  bool operator==(const EntityRef& other) const { return id == other.id; }
};

using Term = std::variant<Var, EntityRef>;

inline bool is_var(const Term& t) { return std::holds_alternative<Var>(t); }
inline int var_of(const Term& t) { return std::get<Var>(t).index; }

struct Triple {
  Term subject;
  std::string relation;
  Term object;
  bool operator==(const Triple&) const = default;
};

enum class CompareOp { Less, Greater, LessEqual, GreaterEqual };

std::string_view to_string(CompareOp op);
std::optional<CompareOp> parse_compare_op(std::string_view text);
bool satisfies(std::strong_ordering cmp, CompareOp op);

struct ArgMax {
  int var = 0;
  bool operator==(const ArgMax&) const = default;
};
struct ArgMin {
  int var = 0;
  bool operator==(const ArgMin&) const = default;
};
struct Filter {
  int var = 0;
  CompareOp op = CompareOp::LessEqual;
  Literal value;
  bool operator==(const Filter&) const = default;
};
struct Count {
  int var = 0;
  bool operator==(const Count&) const = default;
};
struct TypeOf {
  int var = 0;
  std::string type_id;
  bool operator==(const TypeOf&) const = default;
};

using Decoration = std::variant<ArgMax, ArgMin, Filter, Count, TypeOf>;

int decoration_var(const Decoration& d);

/// Where a candidate came from: layer L_k of the expansion, or a combination
/// L_{x x y} of two operands with x and y edges.
struct LayerTag {
  enum class Kind { Expansion, Combination };
  Kind kind = Kind::Expansion;
  int first = 1;
  int second = 0;

  static LayerTag layer(int k) { return {Kind::Expansion, k, 0}; }
  static LayerTag combo(int x, int y) { return {Kind::Combination, x, y}; }
  std::string str() const;
  static std::optional<LayerTag> parse(std::string_view text);
  bool operator==(const LayerTag&) const = default;
};

struct QueryGraph {
  std::vector<Triple> triples;
  std::vector<Decoration> decorations;
  int answer = 0;
  LayerTag layer;
  /// Canonical key of the query this one was derived from.
  std::optional<std::string> parent;

  std::size_t edge_count() const { return triples.size(); }
  /// Distinct variable indices in ascending order.
  std::vector<int> variables() const;
  bool is_count() const;
  bool has_decorations() const { return !decorations.empty(); }
};

/// Checks connectivity, that the answer and every decorated variable occur in
/// a triple, and that no variable carries both argmax and argmin.
void validate(const QueryGraph& q);

bool is_connected(std::span<const Triple> triples);

/// Key invariant under variable renaming and triple reordering. Throws
/// StructureError for disconnected or otherwise malformed queries.
std::string canonicalize(const QueryGraph& q);

/// Canonical key of the bare triple structure (no answer, no decorations).
std::string structure_key(std::span<const Triple> triples);

struct KeyedStructure {
  std::string key;
  /// Canonical index of each variable number, -1 for numbers not in use.
  std::vector<int> var_map;
};

/// structure_key together with the variable renaming that produced it.
KeyedStructure keyed_structure(std::span<const Triple> triples);

/// Same query with triples in display order and variables renumbered v0, v1,
/// ... by first occurrence. Display order is a depth-first walk from the
/// entity anchor with the smallest relation name that finishes each variable
/// chain before attaching further entity constraints.
QueryGraph normalized(const QueryGraph& q);

/// Display-order normal form of a bare triple structure.
std::vector<Triple> normalized_structure(std::span<const Triple> triples);

/// Number of triples that mention an entity constant.
std::size_t entity_occurrences(std::span<const Triple> triples);

/// Largest distance from any variable to its nearest entity constant, or -1
/// when the query has no entity.
int max_entity_distance(std::span<const Triple> triples);

std::string term_string(const Term& t);

}  // namespace targa
