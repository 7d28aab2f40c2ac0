#pragma once
// The PyQL-style logic-form language: one function call per line.
//
//   triplet([jpeg ( exif 2.21 )], digicams.camera_compressed_format.cameras, ?v0)
//   triplet(?v0, digicams.digital_camera.viewfinder_type, ?v1)
//   answer(?v1)

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "targa/kg_store.hpp"
#include "targa/query_graph.hpp"

namespace targa {

struct Triplet {
  Term subject;
  std::string relation;
  Term object;
  bool operator==(const Triplet&) const = default;
};

struct Answer {
  int var = 0;
  bool operator==(const Answer&) const = default;
};

using Statement = std::variant<Triplet, ArgMax, ArgMin, Filter, TypeOf, Count, Answer>;

struct LogicForm {
  std::vector<Statement> statements;
  bool operator==(const LogicForm&) const = default;
};

/// Surface forms a logic form may mention in brackets. Lookup ignores case
/// and spacing around punctuation.
class EntityMap {
 public:
  void add(std::string_view surface, std::string id);
  std::optional<std::string> resolve(std::string_view surface) const;
  bool empty() const { return by_surface_.empty(); }

 private:
  std::map<std::string, std::string> by_surface_;
};

/// Throws ParseError (line and column of the offending token) for syntax
/// errors, unknown functions, unresolved entities and a missing or repeated
/// terminal statement; StructureError when a modifier or the terminal names a
/// variable no triplet binds.
LogicForm parse_logic_form(std::string_view text, const EntityMap& entities);

std::string print_logic_form(const LogicForm& lf);

LogicForm from_query(const QueryGraph& q);

/// Throws StructureError for contradictory decorations.
QueryGraph to_executable(const LogicForm& lf);

/// SELECT DISTINCT rendering of an executable query.
std::string to_sparql(const QueryGraph& q, std::string_view type_relation = "type.object.type");

struct AnswerValue {
  std::string id;
  std::string label;
  bool operator==(const AnswerValue&) const = default;
};

struct AnswerSet {
  std::vector<AnswerValue> values;
  std::optional<std::size_t> count;

  /// Comparable answer strings: node ids and literal forms, or the count.
  std::vector<std::string> keys() const;
  bool empty() const { return values.empty() && !count; }
};

AnswerSet answers_from(const BindingSet& bindings, int answer_var, const KnowledgeGraph& graph);

AnswerSet execute_lf(const LogicForm& lf, const KnowledgeGraph& graph);

}  // namespace targa
