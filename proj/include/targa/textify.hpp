#pragma once
// Rule-based rendering of query graphs as pseudo-questions.

#include <string>

#include "targa/query_graph.hpp"

namespace targa {

/// Name of a variable: the last segment of the first relation it is the
/// object of, else the second-to-last segment of the first relation it is the
/// subject of. Throws StructureError when `var` does not occur in `q`.
std::string variable_name(const QueryGraph& q, int var);

/// Entity as rendered in pseudo-questions and logic forms.
std::string entity_text(const EntityRef& e);

/// "what {answer}, {a} has {b}, ..., when {v} is the smallest".
std::string textify(const QueryGraph& q);

}  // namespace targa
