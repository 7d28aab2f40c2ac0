#include "targa/kg_store.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <set>
#include <tuple>

#include "targa/error.hpp"

namespace targa {

namespace {

thread_local std::uint64_t tls_executions = 0;

constexpr NodeId kUnbound = std::numeric_limits<NodeId>::max();

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

bool skippable(std::string_view line) {
  for (char c : line) {
    if (c == ' ' || c == '\t') continue;
    return c == '#';
  }
  return true;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

std::string unescape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out.push_back(s[i]);
      continue;
    }
    switch (s[++i]) {
      case 'n': out.push_back('\n'); break;
      case 't': out.push_back('\t'); break;
      case 'r': out.push_back('\r'); break;
      default: out.push_back(s[i]); break;
    }
  }
  return out;
}

// One parsed object position: either an entity id or a literal.
struct ObjectTerm {
  std::optional<std::string> entity;
  std::optional<Literal> literal;
};

// Finds the closing quote of a literal that opens at `open`, honoring escapes.
std::size_t closing_quote(std::string_view s, std::size_t open) {
  for (std::size_t i = open + 1; i < s.size(); ++i) {
    if (s[i] == '\\') {
      ++i;
    } else if (s[i] == '"') {
      return i;
    }
  }
  return std::string_view::npos;
}

Literal typed_literal(std::string lexical, std::string_view datatype) {
  const auto local = datatype.substr(std::min(datatype.size(), datatype.find_last_of("#/:") + 1));
  if (local == "integer" || local == "decimal" || local == "double" || local == "float" || local == "int" ||
      local == "long") {
    if (auto n = parse_number(lexical)) return Literal{LiteralKind::Number, std::move(lexical), n};
  } else if (local == "date" || local == "dateTime" || local == "gYear" || local == "gYearMonth") {
    if (auto t = parse_iso_datetime(lexical)) return Literal{LiteralKind::DateTime, std::move(lexical), t};
  } else if (local == "boolean") {
    return Literal{LiteralKind::Boolean, std::move(lexical), std::nullopt};
  }
  return Literal::quoted(lexical);
}

ObjectTerm parse_tsv_object(std::string_view field, std::size_t line_no) {
  ObjectTerm term;
  if (!field.empty() && field.front() == '"') {
    const auto close = closing_quote(field, 0);
    if (close == std::string_view::npos) throw ParseError("unterminated string literal", line_no);
    auto lexical = unescape(field.substr(1, close - 1));
    const auto rest = field.substr(close + 1);
    if (rest.starts_with("^^")) {
      auto dt = rest.substr(2);
      if (dt.size() >= 2 && dt.front() == '<' && dt.back() == '>') dt = dt.substr(1, dt.size() - 2);
      term.literal = typed_literal(std::move(lexical), dt);
    } else {
      term.literal = Literal::quoted(lexical);
    }
    return term;
  }
  if (field.empty()) throw ParseError("empty object field", line_no);
  if (auto n = parse_number(field)) {
    term.literal = Literal{LiteralKind::Number, std::string(field), n};
  } else if (field == "true" || field == "false") {
    term.literal = Literal{LiteralKind::Boolean, std::string(field), std::nullopt};
  } else {
    term.entity = std::string(field);
  }
  return term;
}

// N-Triples subset: <s> <p> (<o> | "lit"[@lang|^^<dt>]) .
struct NTriple {
  std::string subject;
  std::string predicate;
  ObjectTerm object;
};

NTriple parse_ntriple(std::string_view line, std::size_t line_no) {
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
  };
  auto iri = [&](const char* what) -> std::string {
    skip_ws();
    if (pos >= line.size() || line[pos] != '<') {
      throw ParseError(std::string("expected <iri> for ") + what, line_no, pos + 1);
    }
    const auto close = line.find('>', pos);
    if (close == std::string_view::npos) throw ParseError("unterminated <iri>", line_no, pos + 1);
    std::string out(line.substr(pos + 1, close - pos - 1));
    pos = close + 1;
    return out;
  };
  NTriple t;
  t.subject = iri("subject");
  t.predicate = iri("predicate");
  skip_ws();
  if (pos < line.size() && line[pos] == '"') {
    const auto close = closing_quote(line, pos);
    if (close == std::string_view::npos) throw ParseError("unterminated string literal", line_no, pos + 1);
    auto lexical = unescape(line.substr(pos + 1, close - pos - 1));
    pos = close + 1;
    if (line.substr(pos).starts_with("^^")) {
      pos += 2;
      const auto dt = iri("datatype");
      t.object.literal = typed_literal(std::move(lexical), dt);
    } else {
      if (pos < line.size() && line[pos] == '@') {
        while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
      }
      t.object.literal = Literal::quoted(lexical);
    }
  } else {
    t.object.entity = iri("object");
  }
  skip_ws();
  if (pos >= line.size() || line[pos] != '.') throw ParseError("expected '.' after object", line_no, pos + 1);
  ++pos;
  skip_ws();
  if (pos != line.size()) throw ParseError("trailing characters after '.'", line_no, pos + 1);
  return t;
}

std::string literal_index_key(const Literal& lit) {
  std::string key(1, static_cast<char>('0' + static_cast<int>(lit.kind)));
  key += lit.lexical;
  return key;
}

void read_pairs(std::istream& in, const char* what,
                const std::function<void(std::string_view, std::string_view)>& sink) {
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = strip_cr(std::move(raw));
    if (skippable(line)) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw ParseError(std::string("expected id<TAB>") + what, line_no);
    }
    std::string_view view(line);
    sink(view.substr(0, tab), view.substr(tab + 1));
  }
}

auto by_sp = [](const StoredTriple& a, const StoredTriple& b) {
  return std::tie(a.subject, a.predicate) < std::tie(b.subject, b.predicate);
};
auto by_op = [](const StoredTriple& a, const StoredTriple& b) {
  return std::tie(a.object, a.predicate) < std::tie(b.object, b.predicate);
};
auto by_ops = [](const StoredTriple& a, const StoredTriple& b) {
  return std::tie(a.object, a.predicate, a.subject) < std::tie(b.object, b.predicate, b.subject);
};
auto by_pso = [](const StoredTriple& a, const StoredTriple& b) {
  return std::tie(a.predicate, a.subject, a.object) < std::tie(b.predicate, b.subject, b.object);
};

}  // namespace

KnowledgeGraph::KnowledgeGraph() : counter_(std::make_unique<std::atomic<std::uint64_t>>(0)) {}

NodeId KnowledgeGraph::intern_entity(std::string_view id) {
  auto [it, fresh] = entity_index_.try_emplace(std::string(id), static_cast<NodeId>(nodes_.size()));
  if (fresh) nodes_.push_back(Node{std::string(id), std::string(id), std::nullopt, {}});
  return it->second;
}

NodeId KnowledgeGraph::intern_literal(Literal lit) {
  auto [it, fresh] = literal_index_.try_emplace(literal_index_key(lit), static_cast<NodeId>(nodes_.size()));
  if (fresh) {
    const auto lexical = lit.lexical;
    nodes_.push_back(Node{lexical, lexical, std::move(lit), {}});
  }
  return it->second;
}

RelationId KnowledgeGraph::intern_relation(std::string_view name) {
  auto [it, fresh] = relation_index_.try_emplace(std::string(name), static_cast<RelationId>(relations_.size()));
  if (fresh) relations_.emplace_back(name);
  return it->second;
}

KnowledgeGraph KnowledgeGraph::load(std::istream& triples, std::istream* labels, std::istream* aliases,
                                    LoadOptions options) {
  KnowledgeGraph g;
  g.options_ = std::move(options);

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(triples, raw)) {
    ++line_no;
    const auto line = strip_cr(std::move(raw));
    if (skippable(line)) continue;
    std::string subject;
    std::string predicate;
    ObjectTerm object;
    const auto first = line.find_first_not_of(" \t");
    if (line[first] == '<') {
      auto t = parse_ntriple(line, line_no);
      subject = std::move(t.subject);
      predicate = std::move(t.predicate);
      object = std::move(t.object);
    } else {
      const auto fields = split_tabs(line);
      if (fields.size() != 3) {
        throw ParseError("expected 3 tab-separated fields, found " + std::to_string(fields.size()), line_no);
      }
      if (fields[0].empty()) throw ParseError("empty subject field", line_no, 1);
      if (fields[1].empty()) throw ParseError("empty predicate field", line_no, fields[0].size() + 2);
      subject = std::string(fields[0]);
      predicate = std::string(fields[1]);
      object = parse_tsv_object(fields[2], line_no);
    }
    const NodeId s = g.intern_entity(subject);
    const RelationId p = g.intern_relation(predicate);
    const NodeId o = object.entity ? g.intern_entity(*object.entity) : g.intern_literal(std::move(*object.literal));
    g.spo_.push_back(StoredTriple{s, p, o});
  }

  if (labels != nullptr) {
    read_pairs(*labels, "label", [&](std::string_view id, std::string_view label) {
      auto it = g.entity_index_.find(std::string(id));
      if (it != g.entity_index_.end()) g.nodes_[it->second].label = std::string(label);
    });
  }
  if (aliases != nullptr) {
    read_pairs(*aliases, "alias", [&](std::string_view id, std::string_view alias) {
      auto it = g.entity_index_.find(std::string(id));
      if (it != g.entity_index_.end()) g.nodes_[it->second].aliases.emplace_back(alias);
    });
  }

  g.build_indices();
  return g;
}

KnowledgeGraph KnowledgeGraph::load_files(const std::filesystem::path& triples,
                                          const std::optional<std::filesystem::path>& labels,
                                          const std::optional<std::filesystem::path>& aliases,
                                          LoadOptions options) {
  auto open = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw Error("cannot open " + p.string());
    return in;
  };
  auto t = open(triples);
  std::optional<std::ifstream> l;
  std::optional<std::ifstream> a;
  if (labels) l = open(*labels);
  if (aliases) a = open(*aliases);
  try {
    return load(t, l ? &*l : nullptr, a ? &*a : nullptr, std::move(options));
  } catch (const ParseError& e) {
    throw ParseError(triples.filename().string() + ": " + e.what(), 0);
  }
}

void KnowledgeGraph::build_indices() {
  std::sort(spo_.begin(), spo_.end());
  spo_.erase(std::unique(spo_.begin(), spo_.end()), spo_.end());
  ops_ = spo_;
  std::sort(ops_.begin(), ops_.end(), by_ops);
  pso_ = spo_;
  std::sort(pso_.begin(), pso_.end(), by_pso);

  entity_ids_.clear();
  for (const auto& [id, node] : entity_index_) entity_ids_.push_back(node);
  std::sort(entity_ids_.begin(), entity_ids_.end(),
            [&](NodeId a, NodeId b) { return nodes_[a].key < nodes_[b].key; });
}

std::optional<NodeId> KnowledgeGraph::find_entity(std::string_view id) const {
  auto it = entity_index_.find(std::string(id));
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> KnowledgeGraph::find_relation(std::string_view name) const {
  auto it = relation_index_.find(std::string(name));
  if (it == relation_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<NodeId> KnowledgeGraph::find_literal(const Literal& lit) const {
  auto it = literal_index_.find(literal_index_key(lit));
  if (it == literal_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> KnowledgeGraph::relation_names() const {
  auto names = relations_;
  std::sort(names.begin(), names.end());
  return names;
}

std::span<const StoredTriple> KnowledgeGraph::match_subject(NodeId s, RelationId p) const {
  const StoredTriple probe{s, p, 0};
  auto [lo, hi] = std::equal_range(spo_.begin(), spo_.end(), probe, by_sp);
  return {lo, hi};
}

std::span<const StoredTriple> KnowledgeGraph::match_object(NodeId o, RelationId p) const {
  const StoredTriple probe{0, p, o};
  auto [lo, hi] = std::equal_range(ops_.begin(), ops_.end(), probe, by_op);
  return {lo, hi};
}

std::span<const StoredTriple> KnowledgeGraph::match_predicate(RelationId p) const {
  const StoredTriple probe{0, p, 0};
  auto [lo, hi] = std::equal_range(pso_.begin(), pso_.end(), probe,
                                   [](const StoredTriple& a, const StoredTriple& b) { return a.predicate < b.predicate; });
  return {lo, hi};
}

bool KnowledgeGraph::contains(NodeId s, RelationId p, NodeId o) const {
  return std::binary_search(spo_.begin(), spo_.end(), StoredTriple{s, p, o});
}

bool KnowledgeGraph::indices_consistent() const {
  if (!std::is_sorted(spo_.begin(), spo_.end())) return false;
  if (std::adjacent_find(spo_.begin(), spo_.end()) != spo_.end()) return false;
  if (ops_.size() != spo_.size() || pso_.size() != spo_.size()) return false;
  if (!std::is_sorted(ops_.begin(), ops_.end(), by_ops) || !std::is_sorted(pso_.begin(), pso_.end(), by_pso)) {
    return false;
  }
  auto a = ops_;
  auto b = pso_;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a != spo_ || b != spo_) return false;
  for (const auto& t : spo_) {
    if (t.subject >= nodes_.size() || t.object >= nodes_.size() || t.predicate >= relations_.size()) return false;
    if (nodes_[t.subject].literal) return false;
  }
  return true;
}

void KnowledgeGraph::record_execution() const {
  counter_->fetch_add(1, std::memory_order_relaxed);
  ++tls_executions;
}

ExecutionScope::ExecutionScope() : start_(tls_executions) {}

std::uint64_t ExecutionScope::count() const { return tls_executions - start_; }

std::vector<NodeId> BindingSet::column(int var) const {
  const auto it = std::find(variables.begin(), variables.end(), var);
  if (it == variables.end()) return {};
  const auto pos = static_cast<std::size_t>(it - variables.begin());
  std::vector<NodeId> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row[pos]);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

// A triple pattern resolved against the graph; a slot is -1 for constants.
struct Pattern {
  int s_slot = -1;
  NodeId s_const = kUnbound;
  RelationId p = 0;
  int o_slot = -1;
  NodeId o_const = kUnbound;
};

struct SlotFilter {
  int slot;
  CompareOp op;
  Literal value;
};

class Join {
 public:
  Join(const KnowledgeGraph& g, std::vector<Pattern> patterns, std::vector<SlotFilter> filters, std::size_t slots,
       std::vector<NodeId> constants)
      : g_(g),
        patterns_(std::move(patterns)),
        filters_(std::move(filters)),
        binding_(slots, kUnbound),
        constants_(std::move(constants)) {
    order_patterns();
  }

  // Calls `emit` for each satisfying assignment until it returns false.
  template <class Emit>
  void run(Emit&& emit) {
    stop_ = false;
    step(0, emit);
  }

 private:
  std::size_t estimate(const Pattern& p, const std::vector<char>& bound) const {
    const bool s = p.s_slot < 0 || bound[static_cast<std::size_t>(p.s_slot)];
    const bool o = p.o_slot < 0 || bound[static_cast<std::size_t>(p.o_slot)];
    if (s && o) return 0;
    if (s && p.s_slot < 0) return g_.match_subject(p.s_const, p.p).size();
    if (o && p.o_slot < 0) return g_.match_object(p.o_const, p.p).size();
    if (s || o) return 1 + g_.match_predicate(p.p).size() / 64;
    return 1 + g_.match_predicate(p.p).size();
  }

  // Greedy static order: cheapest pattern first, then always a pattern
  // touching an already bound slot when one exists.
  void order_patterns() {
    std::vector<char> bound(binding_.size(), 0);
    std::vector<Pattern> ordered;
    std::vector<char> taken(patterns_.size(), 0);
    for (std::size_t round = 0; round < patterns_.size(); ++round) {
      std::size_t best = patterns_.size();
      std::pair<int, std::size_t> best_rank{2, 0};
      for (std::size_t i = 0; i < patterns_.size(); ++i) {
        if (taken[i]) continue;
        const auto& p = patterns_[i];
        const bool touches = (p.s_slot >= 0 && bound[static_cast<std::size_t>(p.s_slot)]) ||
                             (p.o_slot >= 0 && bound[static_cast<std::size_t>(p.o_slot)]) ||
                             p.s_slot < 0 || p.o_slot < 0;
        std::pair<int, std::size_t> rank{touches ? 0 : 1, estimate(p, bound)};
        if (best == patterns_.size() || rank < best_rank) {
          best = i;
          best_rank = rank;
        }
      }
      taken[best] = 1;
      const auto& p = patterns_[best];
      if (p.s_slot >= 0) bound[static_cast<std::size_t>(p.s_slot)] = 1;
      if (p.o_slot >= 0) bound[static_cast<std::size_t>(p.o_slot)] = 1;
      ordered.push_back(p);
    }
    patterns_ = std::move(ordered);
  }

  bool filters_hold() const {
    for (const auto& f : filters_) {
      const NodeId n = binding_[static_cast<std::size_t>(f.slot)];
      const Literal* lit = g_.literal(n);
      const Literal value = lit != nullptr ? *lit : Literal{LiteralKind::String, g_.node_key(n), std::nullopt};
      if (!satisfies(compare_values(value, f.value), f.op)) return false;
    }
    return true;
  }

  // Distinct query terms take distinct entity nodes; literal values may repeat.
  bool admissible(int slot, NodeId value) const {
    if (g_.is_literal(value)) return true;
    if (std::find(constants_.begin(), constants_.end(), value) != constants_.end()) return false;
    for (std::size_t i = 0; i < binding_.size(); ++i) {
      if (static_cast<int>(i) != slot && binding_[i] == value) return false;
    }
    return true;
  }

  template <class Emit>
  void bind_and_continue(std::size_t depth, int slot, NodeId value, Emit& emit) {
    if (slot < 0) {
      step(depth + 1, emit);
      return;
    }
    auto& cell = binding_[static_cast<std::size_t>(slot)];
    if (cell != kUnbound) {
      if (cell == value) step(depth + 1, emit);
      return;
    }
    if (!admissible(slot, value)) return;
    cell = value;
    step(depth + 1, emit);
    cell = kUnbound;
  }

  template <class Emit>
  void step(std::size_t depth, Emit& emit) {
    if (stop_) return;
    if (depth == patterns_.size()) {
      if (filters_hold() && !emit(binding_)) stop_ = true;
      return;
    }
    const auto& p = patterns_[depth];
    const NodeId s = p.s_slot < 0 ? p.s_const : binding_[static_cast<std::size_t>(p.s_slot)];
    const NodeId o = p.o_slot < 0 ? p.o_const : binding_[static_cast<std::size_t>(p.o_slot)];
    if (s != kUnbound && o != kUnbound) {
      if (g_.contains(s, p.p, o)) step(depth + 1, emit);
      return;
    }
    if (s != kUnbound) {
      for (const auto& t : g_.match_subject(s, p.p)) {
        bind_and_continue(depth, p.o_slot, t.object, emit);
        if (stop_) return;
      }
      return;
    }
    if (o != kUnbound) {
      for (const auto& t : g_.match_object(o, p.p)) {
        bind_and_continue(depth, p.s_slot, t.subject, emit);
        if (stop_) return;
      }
      return;
    }
    for (const auto& t : g_.match_predicate(p.p)) {
      if (!admissible(p.s_slot, t.subject)) continue;
      auto& sc = binding_[static_cast<std::size_t>(p.s_slot)];
      sc = t.subject;
      bind_and_continue(depth, p.o_slot, t.object, emit);
      sc = kUnbound;
      if (stop_) return;
    }
  }

  const KnowledgeGraph& g_;
  std::vector<Pattern> patterns_;
  std::vector<SlotFilter> filters_;
  std::vector<NodeId> binding_;
  std::vector<NodeId> constants_;
  bool stop_ = false;
};

// Keeps the rows whose value in `pos` is the numeric extremum.
void keep_extremum(std::vector<std::vector<NodeId>>& rows, std::size_t pos, const KnowledgeGraph& g, bool maximum) {
  std::optional<double> best;
  for (const auto& row : rows) {
    const Literal* lit = g.literal(row[pos]);
    if (lit == nullptr || !lit->numeric) continue;
    if (!best || (maximum ? *lit->numeric > *best : *lit->numeric < *best)) best = lit->numeric;
  }
  std::erase_if(rows, [&](const std::vector<NodeId>& row) {
    const Literal* lit = g.literal(row[pos]);
    return !best || lit == nullptr || !lit->numeric || *lit->numeric != *best;
  });
}

}  // namespace

BindingSet execute(const QueryGraph& query, const KnowledgeGraph& graph, ExecMode mode, std::size_t row_cap) {
  graph.record_execution();
  validate(query);

  BindingSet out;
  out.variables = query.variables();
  auto slot_of = [&](int var) {
    return static_cast<int>(std::lower_bound(out.variables.begin(), out.variables.end(), var) - out.variables.begin());
  };
  const bool counting = query.is_count();
  auto empty_result = [&] {
    if (counting) {
      out.variables = {query.answer};
      out.count = 0;
    }
    return out;
  };

  std::vector<Pattern> patterns;
  std::vector<NodeId> constants;
  for (const auto& t : query.triples) {
    Pattern p;
    const auto rel = graph.find_relation(t.relation);
    if (!rel) return empty_result();
    p.p = *rel;
    for (int side = 0; side < 2; ++side) {
      const Term& term = side == 0 ? t.subject : t.object;
      int& slot = side == 0 ? p.s_slot : p.o_slot;
      NodeId& constant = side == 0 ? p.s_const : p.o_const;
      if (is_var(term)) {
        slot = slot_of(var_of(term));
      } else {
        const auto node = graph.find_entity(std::get<EntityRef>(term).id);
        if (!node) return empty_result();
        constant = *node;
        constants.push_back(*node);
      }
    }
    patterns.push_back(p);
  }

  std::vector<SlotFilter> filters;
  std::vector<std::pair<std::size_t, bool>> extrema;
  for (const auto& d : query.decorations) {
    if (const auto* type = std::get_if<TypeOf>(&d)) {
      const auto rel = graph.find_relation(graph.type_relation());
      const auto cls = graph.find_entity(type->type_id);
      if (!rel || !cls) return empty_result();
      patterns.push_back(Pattern{slot_of(type->var), kUnbound, *rel, -1, *cls});
    } else if (const auto* f = std::get_if<Filter>(&d)) {
      filters.push_back(SlotFilter{slot_of(f->var), f->op, f->value});
    } else if (const auto* mx = std::get_if<ArgMax>(&d)) {
      extrema.emplace_back(static_cast<std::size_t>(slot_of(mx->var)), true);
    } else if (const auto* mn = std::get_if<ArgMin>(&d)) {
      extrema.emplace_back(static_cast<std::size_t>(slot_of(mn->var)), false);
    }
  }

  Join join(graph, std::move(patterns), std::move(filters), out.variables.size(), std::move(constants));
  // Extremum decorations need every row before any can be kept.
  const bool exhaustive = !extrema.empty() || counting;
  const bool witness_only = mode == ExecMode::Probe && extrema.empty();
  join.run([&](const std::vector<NodeId>& row) {
    out.rows.push_back(row);
    if (witness_only) return false;
    if (!exhaustive && out.rows.size() >= row_cap) {
      out.truncated = true;
      return false;
    }
    return true;
  });

  for (const auto& [pos, maximum] : extrema) keep_extremum(out.rows, pos, graph, maximum);

  if (counting) {
    const auto pos = static_cast<std::size_t>(slot_of(query.answer));
    std::set<NodeId> distinct;
    for (const auto& row : out.rows) distinct.insert(row[pos]);
    out.variables = {query.answer};
    out.rows.clear();
    for (NodeId n : distinct) out.rows.push_back({n});
    out.count = distinct.size();
    if (mode == ExecMode::Probe && out.rows.size() > 1) out.rows.resize(1);
    return out;
  }

  std::sort(out.rows.begin(), out.rows.end());
  if (mode == ExecMode::Probe && out.rows.size() > 1) {
    out.rows.resize(1);
  } else if (out.rows.size() > row_cap) {
    out.rows.resize(row_cap);
    out.truncated = true;
  }
  return out;
}

}  // namespace targa
