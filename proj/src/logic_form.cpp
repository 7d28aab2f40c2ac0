#include "targa/logic_form.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "targa/error.hpp"
#include "targa/text.hpp"
#include "targa/textify.hpp"

namespace targa {

void EntityMap::add(std::string_view surface, std::string id) {
  by_surface_.insert_or_assign(text::normalize_surface(surface), std::move(id));
}

std::optional<std::string> EntityMap::resolve(std::string_view surface) const {
  auto it = by_surface_.find(text::normalize_surface(surface));
  if (it == by_surface_.end()) return std::nullopt;
  return it->second;
}

namespace {

struct Arg {
  std::string text;
  std::size_t column;  // 1-based
};

struct Call {
  std::string name;
  std::vector<Arg> args;
  std::size_t line;
};

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

Call split_call(std::string_view line, std::size_t line_no, std::size_t indent) {
  std::size_t pos = 0;
  while (pos < line.size() && ident_char(line[pos])) ++pos;
  if (pos == 0) throw ParseError("expected a function name", line_no, indent + 1);
  Call call{std::string(line.substr(0, pos)), {}, line_no};
  while (pos < line.size() && line[pos] == ' ') ++pos;
  if (pos >= line.size() || line[pos] != '(') throw ParseError("expected '('", line_no, indent + pos + 1);
  ++pos;
  std::size_t start = pos;
  int brackets = 0;
  bool quoted = false;
  for (; pos < line.size(); ++pos) {
    const char c = line[pos];
    if (quoted) {
      if (c == '\\') ++pos;
      else if (c == '"') quoted = false;
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == '[') {
      ++brackets;
    } else if (c == ']') {
      if (--brackets < 0) throw ParseError("unbalanced ']'", line_no, indent + pos + 1);
    } else if (brackets == 0 && (c == ',' || c == ')')) {
      const auto raw = line.substr(start, pos - start);
      std::size_t lead = 0;
      while (lead < raw.size() && raw[lead] == ' ') ++lead;
      call.args.push_back(Arg{text::trim(raw), indent + start + lead + 1});
      start = pos + 1;
      if (c == ')') break;
    }
  }
  if (quoted) throw ParseError("unterminated string", line_no, indent + start + 1);
  if (brackets > 0) throw ParseError("unterminated '['", line_no, indent + start + 1);
  if (pos >= line.size()) throw ParseError("expected ')'", line_no, indent + line.size() + 1);
  const auto rest = text::trim(line.substr(pos + 1));
  if (!rest.empty()) throw ParseError("unexpected text after ')'", line_no, indent + pos + 2);
  if (call.args.size() == 1 && call.args[0].text.empty()) call.args.clear();
  return call;
}

// Variable names: "?v3" and "v3" keep their number; any other "?name" is
// numbered after the largest explicit index in order of first appearance.
class VarNames {
 public:
  static std::optional<std::string> name_of(std::string_view arg) {
    if (!arg.empty() && arg.front() == '?') {
      arg.remove_prefix(1);
      if (arg.empty() || !std::all_of(arg.begin(), arg.end(), ident_char)) return std::nullopt;
      return std::string(arg);
    }
    if (arg.size() >= 2 && arg.front() == 'v' &&
        std::all_of(arg.begin() + 1, arg.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      return std::string(arg);
    }
    return std::nullopt;
  }

  static std::optional<int> explicit_index(std::string_view name) {
    if (name.size() < 2 || name.front() != 'v' || name.size() > 6) return std::nullopt;
    int value = 0;
    for (char c : name.substr(1)) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
      value = value * 10 + (c - '0');
    }
    return value;
  }

  void reserve(std::string_view name) {
    if (auto i = explicit_index(name)) next_ = std::max(next_, *i + 1);
  }

  int index(const std::string& name) {
    if (auto i = explicit_index(name)) return *i;
    auto [it, fresh] = implicit_.try_emplace(name, next_);
    if (fresh) ++next_;
    return it->second;
  }

 private:
  std::map<std::string, int> implicit_;
  int next_ = 0;
};

Literal parse_value(const Arg& arg, std::size_t line_no) {
  std::string_view v = arg.text;
  if (v.empty()) throw ParseError("empty value", line_no, arg.column);
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') throw ParseError("unterminated string", line_no, arg.column);
    return Literal::quoted(v.substr(1, v.size() - 2));
  }
  return Literal::parse(v);
}

std::string value_text(const Literal& lit) {
  if (lit.kind == LiteralKind::String || lit.kind == LiteralKind::DateTime) return "\"" + lit.lexical + "\"";
  return lit.lexical;
}

std::string var_text(int v) { return "?v" + std::to_string(v); }

std::string term_text(const Term& t) {
  if (is_var(t)) return var_text(var_of(t));
  return "[" + entity_text(std::get<EntityRef>(t)) + "]";
}

}  // namespace

LogicForm parse_logic_form(std::string_view source, const EntityMap& entities) {
  std::vector<Call> calls;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= source.size()) {
    auto end = source.find('\n', pos);
    if (end == std::string_view::npos) end = source.size();
    auto line = source.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::size_t indent = 0;
    while (indent < line.size() && std::isspace(static_cast<unsigned char>(line[indent]))) ++indent;
    const auto body = text::trim(line);
    if (body.empty()) continue;
    calls.push_back(split_call(body, line_no, indent));
  }

  VarNames names;
  for (const auto& call : calls) {
    for (const auto& arg : call.args) {
      if (auto n = VarNames::name_of(arg.text)) names.reserve(*n);
    }
  }

  auto expect_args = [](const Call& call, std::size_t n) {
    if (call.args.size() != n) {
      throw ParseError(call.name + " expects " + std::to_string(n) + " argument" + (n == 1 ? "" : "s") + ", got " +
                           std::to_string(call.args.size()),
                       call.line);
    }
  };
  auto variable = [&](const Call& call, const Arg& arg) {
    auto n = VarNames::name_of(arg.text);
    if (!n) throw ParseError("expected a variable, found '" + arg.text + "'", call.line, arg.column);
    return names.index(*n);
  };
  auto term = [&](const Call& call, const Arg& arg) -> Term {
    if (!arg.text.empty() && arg.text.front() == '[') {
      if (arg.text.back() != ']') throw ParseError("unterminated '['", call.line, arg.column);
      const auto surface = text::trim(std::string_view(arg.text).substr(1, arg.text.size() - 2));
      auto id = entities.resolve(surface);
      if (!id) throw ParseError("unresolved entity [" + surface + "]", call.line, arg.column);
      return EntityRef{*id, surface};
    }
    return Var{variable(call, arg)};
  };

  LogicForm lf;
  for (const auto& call : calls) {
    if (call.name == "triplet") {
      expect_args(call, 3);
      const auto& rel = call.args[1];
      if (rel.text.empty() || rel.text.find_first_of(" []?\"") != std::string::npos) {
        throw ParseError("expected a relation name, found '" + rel.text + "'", call.line, rel.column);
      }
      lf.statements.push_back(Triplet{term(call, call.args[0]), rel.text, term(call, call.args[2])});
    } else if (call.name == "argmax") {
      expect_args(call, 1);
      lf.statements.push_back(ArgMax{variable(call, call.args[0])});
    } else if (call.name == "argmin") {
      expect_args(call, 1);
      lf.statements.push_back(ArgMin{variable(call, call.args[0])});
    } else if (call.name == "filter") {
      expect_args(call, 3);
      const auto op = parse_compare_op(call.args[1].text);
      if (!op) throw ParseError("unknown comparison '" + call.args[1].text + "'", call.line, call.args[1].column);
      lf.statements.push_back(Filter{variable(call, call.args[0]), *op, parse_value(call.args[2], call.line)});
    } else if (call.name == "type") {
      expect_args(call, 2);
      std::string cls = call.args[1].text;
      if (cls.size() >= 2 && cls.front() == '[' && cls.back() == ']') cls = text::trim(std::string_view(cls).substr(1, cls.size() - 2));
      if (cls.empty()) throw ParseError("empty type name", call.line, call.args[1].column);
      lf.statements.push_back(TypeOf{variable(call, call.args[0]), cls});
    } else if (call.name == "count") {
      expect_args(call, 1);
      lf.statements.push_back(Count{variable(call, call.args[0])});
    } else if (call.name == "answer") {
      expect_args(call, 1);
      lf.statements.push_back(Answer{variable(call, call.args[0])});
    } else {
      throw ParseError("unknown function '" + call.name + "'", call.line, 1);
    }
  }

  std::set<int> bound;
  std::size_t terminals = 0;
  for (const auto& s : lf.statements) {
    if (const auto* t = std::get_if<Triplet>(&s)) {
      if (is_var(t->subject)) bound.insert(var_of(t->subject));
      if (is_var(t->object)) bound.insert(var_of(t->object));
    }
    terminals += std::holds_alternative<Answer>(s) || std::holds_alternative<Count>(s);
  }
  if (terminals == 0) throw ParseError("missing answer(...) or count(...) statement", line_no);
  if (terminals > 1) throw ParseError("more than one answer(...) or count(...) statement", line_no);
  for (const auto& s : lf.statements) {
    if (std::holds_alternative<Triplet>(s)) continue;
    const int v = std::visit(
        [](const auto& x) -> int {
          if constexpr (std::is_same_v<std::decay_t<decltype(x)>, Triplet>) {
            return -1;
          } else {
            return x.var;
          }
        },
        s);
    if (!bound.count(v)) {
      const bool terminal = std::holds_alternative<Answer>(s) || std::holds_alternative<Count>(s);
      throw StructureError(std::string(terminal ? "answer" : "modifier") + " variable " + var_text(v) +
                           " is not bound by any triplet");
    }
  }
  return lf;
}

std::string print_logic_form(const LogicForm& lf) {
  std::string out;
  for (const auto& s : lf.statements) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Triplet>) {
            out += "triplet(" + term_text(x.subject) + ", " + x.relation + ", " + term_text(x.object) + ")";
          } else if constexpr (std::is_same_v<T, ArgMax>) {
            out += "argmax(" + var_text(x.var) + ")";
          } else if constexpr (std::is_same_v<T, ArgMin>) {
            out += "argmin(" + var_text(x.var) + ")";
          } else if constexpr (std::is_same_v<T, Filter>) {
            out += "filter(" + var_text(x.var) + ", " + std::string(to_string(x.op)) + ", " + value_text(x.value) + ")";
          } else if constexpr (std::is_same_v<T, TypeOf>) {
            out += "type(" + var_text(x.var) + ", " + x.type_id + ")";
          } else if constexpr (std::is_same_v<T, Count>) {
            out += "count(" + var_text(x.var) + ")";
          } else {
            out += "answer(" + var_text(x.var) + ")";
          }
        },
        s);
    out += '\n';
  }
  if (!out.empty()) out.pop_back();
  return out;
}

LogicForm from_query(const QueryGraph& q) {
  LogicForm lf;
  for (const auto& t : q.triples) lf.statements.push_back(Triplet{t.subject, t.relation, t.object});
  bool counted = false;
  for (const auto& d : q.decorations) {
    if (std::holds_alternative<Count>(d)) {
      counted = true;
      continue;
    }
    std::visit([&](const auto& x) { lf.statements.push_back(x); }, d);
  }
  if (counted) {
    lf.statements.push_back(Count{q.answer});
  } else {
    lf.statements.push_back(Answer{q.answer});
  }
  return lf;
}

QueryGraph to_executable(const LogicForm& lf) {
  QueryGraph q;
  std::optional<int> answer;
  for (const auto& s : lf.statements) {
    if (const auto* t = std::get_if<Triplet>(&s)) {
      q.triples.push_back(Triple{t->subject, t->relation, t->object});
    } else if (const auto* a = std::get_if<Answer>(&s)) {
      answer = a->var;
    } else if (const auto* c = std::get_if<Count>(&s)) {
      answer = c->var;
      q.decorations.emplace_back(*c);
    } else {
      std::visit(
          [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (!std::is_same_v<T, Triplet> && !std::is_same_v<T, Answer> && !std::is_same_v<T, Count>) {
              q.decorations.emplace_back(x);
            }
          },
          s);
    }
  }
  if (!answer) throw StructureError("logic form has no answer(...) or count(...) statement");
  q.answer = *answer;
  validate(q);
  return q;
}

std::string to_sparql(const QueryGraph& q, std::string_view type_relation) {
  auto term = [](const Term& t) {
    if (is_var(t)) return var_text(var_of(t));
    return ":" + std::get<EntityRef>(t).id;
  };
  auto value = [](const Literal& lit) -> std::string {
    switch (lit.kind) {
      case LiteralKind::Number:
      case LiteralKind::Boolean: return lit.lexical;
      case LiteralKind::DateTime: return "\"" + lit.lexical + "\"^^xsd:dateTime";
      case LiteralKind::String: break;
    }
    return "\"" + lit.lexical + "\"";
  };

  std::string out = q.is_count() ? "SELECT COUNT(DISTINCT " + var_text(q.answer) + ") WHERE {\n"
                                 : "SELECT DISTINCT " + var_text(q.answer) + " WHERE {\n";
  for (const auto& t : q.triples) out += term(t.subject) + " :" + t.relation + " " + term(t.object) + " .\n";
  std::string order;
  for (const auto& d : q.decorations) {
    if (const auto* type = std::get_if<TypeOf>(&d)) {
      out += var_text(type->var) + " :" + std::string(type_relation) + " :" + type->type_id + " .\n";
    } else if (const auto* f = std::get_if<Filter>(&d)) {
      out += "FILTER(" + var_text(f->var) + " " + std::string(to_string(f->op)) + " " + value(f->value) + ")\n";
    } else if (const auto* mx = std::get_if<ArgMax>(&d)) {
      order = "ORDER BY DESC(" + var_text(mx->var) + ") LIMIT 1\n";
    } else if (const auto* mn = std::get_if<ArgMin>(&d)) {
      order = "ORDER BY ASC(" + var_text(mn->var) + ") LIMIT 1\n";
    }
  }
  out += "}\n" + order;
  return out;
}

std::vector<std::string> AnswerSet::keys() const {
  if (count) return {std::to_string(*count)};
  std::vector<std::string> out;
  for (const auto& v : values) out.push_back(v.id);
  return out;
}

AnswerSet answers_from(const BindingSet& bindings, int answer_var, const KnowledgeGraph& graph) {
  AnswerSet out;
  if (bindings.count) {
    out.count = bindings.count;
    return out;
  }
  for (NodeId n : bindings.column(answer_var)) out.values.push_back(AnswerValue{graph.node_key(n), graph.label(n)});
  std::sort(out.values.begin(), out.values.end(),
            [](const AnswerValue& a, const AnswerValue& b) { return a.id < b.id; });
  return out;
}

AnswerSet execute_lf(const LogicForm& lf, const KnowledgeGraph& graph) {
  const auto q = to_executable(lf);
  return answers_from(execute(q, graph, ExecMode::Full), q.answer, graph);
}

}  // namespace targa
