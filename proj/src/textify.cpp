#include "targa/textify.hpp"

#include "targa/error.hpp"
#include "targa/text.hpp"

namespace targa {

std::string variable_name(const QueryGraph& q, int var) {
  for (const auto& t : q.triples) {
    if (is_var(t.object) && var_of(t.object) == var) return std::string(text::last_segment(t.relation));
  }
  for (const auto& t : q.triples) {
    if (is_var(t.subject) && var_of(t.subject) == var) {
      return std::string(text::second_to_last_segment(t.relation));
    }
  }
  throw StructureError("variable ?v" + std::to_string(var) + " does not occur in the query");
}

std::string entity_text(const EntityRef& e) { return text::spaced(e.label.empty() ? e.id : e.label); }

namespace {

std::string segment(const QueryGraph& q, const Triple& t) {
  std::string out = is_var(t.subject) ? variable_name(q, var_of(t.subject)) : entity_text(std::get<EntityRef>(t.subject));
  out += " has ";
  if (is_var(t.object)) {
    out += text::last_segment(t.relation);
  } else {
    out += entity_text(std::get<EntityRef>(t.object));
  }
  return out;
}

std::string modifier(const QueryGraph& q, const Decoration& d) {
  const std::string name = variable_name(q, decoration_var(d));
  if (std::holds_alternative<ArgMin>(d)) return ", when " + name + " is the smallest";
  if (std::holds_alternative<ArgMax>(d)) return ", when " + name + " is the largest";
  if (const auto* type = std::get_if<TypeOf>(&d)) {
    return ", " + name + " is a " + std::string(text::last_segment(type->type_id));
  }
  if (const auto* f = std::get_if<Filter>(&d)) {
    switch (f->op) {
      case CompareOp::LessEqual: return ", when " + name + " no more than " + f->value.lexical;
      case CompareOp::GreaterEqual: return ", when " + name + " no less than " + f->value.lexical;
      case CompareOp::Less: return ", when " + name + " less than " + f->value.lexical;
      case CompareOp::Greater: return ", when " + name + " more than " + f->value.lexical;
    }
  }
  return "";
}

}  // namespace

std::string textify(const QueryGraph& q) {
  std::string out = (q.is_count() ? "how many " : "what ") + variable_name(q, q.answer);
  for (const auto& t : q.triples) out += ", " + segment(q, t);
  for (const auto& d : q.decorations) {
    if (!std::holds_alternative<Count>(d)) out += modifier(q, d);
  }
  return out;
}

}  // namespace targa
