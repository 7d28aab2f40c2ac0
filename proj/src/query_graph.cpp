#include "targa/query_graph.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include "targa/error.hpp"

namespace targa {

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Less: return "<";
    case CompareOp::Greater: return ">";
    case CompareOp::LessEqual: return "<=";
    case CompareOp::GreaterEqual: return ">=";
  }
  return "<=";
}

std::optional<CompareOp> parse_compare_op(std::string_view text) {
  if (text == "<") return CompareOp::Less;
  if (text == ">") return CompareOp::Greater;
  if (text == "<=") return CompareOp::LessEqual;
  if (text == ">=") return CompareOp::GreaterEqual;
  return std::nullopt;
}

bool satisfies(std::strong_ordering cmp, CompareOp op) {
  switch (op) {
    case CompareOp::Less: return cmp < 0;
    case CompareOp::Greater: return cmp > 0;
    case CompareOp::LessEqual: return cmp <= 0;
    case CompareOp::GreaterEqual: return cmp >= 0;
  }
  return false;
}

int decoration_var(const Decoration& d) {
  return std::visit([](const auto& x) { return x.var; }, d);
}

std::string LayerTag::str() const {
  if (kind == Kind::Expansion) return "L" + std::to_string(first);
  return "L" + std::to_string(first) + "x" + std::to_string(second);
}

std::optional<LayerTag> LayerTag::parse(std::string_view text) {
  if (text.size() < 2 || text.front() != 'L') return std::nullopt;
  text.remove_prefix(1);
  auto read = [](std::string_view s, int& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size() && out >= 1;
  };
  const auto x = text.find('x');
  int a = 0;
  int b = 0;
  if (x == std::string_view::npos) {
    if (!read(text, a)) return std::nullopt;
    return layer(a);
  }
  if (!read(text.substr(0, x), a) || !read(text.substr(x + 1), b)) return std::nullopt;
  return combo(a, b);
}

std::vector<int> QueryGraph::variables() const {
  std::set<int> vars;
  for (const auto& t : triples) {
    if (is_var(t.subject)) vars.insert(var_of(t.subject));
    if (is_var(t.object)) vars.insert(var_of(t.object));
  }
  return {vars.begin(), vars.end()};
}

bool QueryGraph::is_count() const {
  return std::any_of(decorations.begin(), decorations.end(),
                     [](const Decoration& d) { return std::holds_alternative<Count>(d); });
}

std::string term_string(const Term& t) {
  if (is_var(t)) return "?v" + std::to_string(var_of(t));
  return ":" + std::get<EntityRef>(t).id;
}

namespace {

std::string node_key(const Term& t) {
  if (is_var(t)) return "?" + std::to_string(var_of(t));
  return ":" + std::get<EntityRef>(t).id;
}

int max_var(std::span<const Triple> triples) {
  int m = -1;
  for (const auto& t : triples) {
    if (is_var(t.subject)) m = std::max(m, var_of(t.subject));
    if (is_var(t.object)) m = std::max(m, var_of(t.object));
  }
  return m;
}

std::string literal_key(const Literal& lit) {
  if (lit.kind == LiteralKind::Number && lit.numeric) return format_number(*lit.numeric);
  return std::string(to_string(lit.kind)) + ":" + lit.lexical;
}

std::string decoration_key(const Decoration& d, const std::vector<int>& map) {
  auto v = [&](int var) { return "?" + std::to_string(map.at(static_cast<std::size_t>(var))); };
  return std::visit(
      [&](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ArgMax>) return "argmax " + v(x.var);
        if constexpr (std::is_same_v<T, ArgMin>) return "argmin " + v(x.var);
        if constexpr (std::is_same_v<T, Count>) return "count " + v(x.var);
        if constexpr (std::is_same_v<T, TypeOf>) return "type " + v(x.var) + " :" + x.type_id;
        if constexpr (std::is_same_v<T, Filter>) {
          return "filter " + v(x.var) + " " + std::string(to_string(x.op)) + " " + literal_key(x.value);
        }
      },
      d);
}

// Lexicographically smallest serialization over all triple orders, with
// variables numbered by first occurrence. Ties between triples that render
// identically are explored exhaustively; queries are small (<= a handful of
// triples) so the branching stays cheap.
class CanonicalSearch {
 public:
  CanonicalSearch(std::span<const Triple> triples, const std::vector<Decoration>* decorations,
                  std::optional<int> answer)
      : triples_(triples), decorations_(decorations), answer_(answer) {}

  void run() {
    std::vector<int> map(static_cast<std::size_t>(max_var(triples_) + 1), -1);
    std::vector<char> used(triples_.size(), 0);
    std::vector<std::string> parts;
    recurse(map, 0, used, parts);
  }

  const std::string& key() const { return best_key_; }
  const std::vector<int>& var_map() const { return best_map_; }

 private:
  std::string render(const Triple& t, std::vector<int>& map, int& next) const {
    auto term = [&](const Term& term) -> std::string {
      if (!is_var(term)) return ":" + std::get<EntityRef>(term).id;
      auto& slot = map[static_cast<std::size_t>(var_of(term))];
      if (slot < 0) slot = next++;
      return "?" + std::to_string(slot);
    };
    std::string s = term(t.subject);
    s += ' ';
    s += t.relation;
    s += ' ';
    s += term(t.object);
    return s;
  }

  void recurse(std::vector<int>& map, int next, std::vector<char>& used, std::vector<std::string>& parts) {
    if (parts.size() == triples_.size()) {
      finish(map, parts);
      return;
    }
    std::string best;
    std::vector<std::size_t> ties;
    for (std::size_t i = 0; i < triples_.size(); ++i) {
      if (used[i]) continue;
      auto m = map;
      int n = next;
      auto s = render(triples_[i], m, n);
      if (ties.empty() || s < best) {
        best = std::move(s);
        ties.assign(1, i);
      } else if (s == best) {
        ties.push_back(i);
      }
    }
    // Prune branches whose prefix is already worse than the best full key.
    if (!best_key_.empty()) {
      std::string prefix;
      for (const auto& p : parts) prefix += p + " . ";
      prefix += best;
      if (best_key_.compare(0, prefix.size(), prefix) < 0) return;
    }
    for (auto i : ties) {
      auto m = map;
      int n = next;
      auto s = render(triples_[i], m, n);
      used[i] = 1;
      parts.push_back(std::move(s));
      recurse(m, n, used, parts);
      parts.pop_back();
      used[i] = 0;
    }
  }

  void finish(const std::vector<int>& map, const std::vector<std::string>& parts) {
    std::string key;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i) key += " . ";
      key += parts[i];
    }
    if (decorations_ != nullptr || answer_) {
      std::vector<std::string> decos;
      if (decorations_ != nullptr) {
        for (const auto& d : *decorations_) decos.push_back(decoration_key(d, map));
      }
      std::sort(decos.begin(), decos.end());
      key += " |";
      for (const auto& d : decos) key += " " + d + ";";
      if (answer_) key += " | ans ?" + std::to_string(map.at(static_cast<std::size_t>(*answer_)));
    }
    if (best_key_.empty() || key < best_key_) {
      best_key_ = std::move(key);
      best_map_ = map;
    }
  }

  std::span<const Triple> triples_;
  const std::vector<Decoration>* decorations_;
  std::optional<int> answer_;
  std::string best_key_;
  std::vector<int> best_map_;
};

}  // namespace

bool is_connected(std::span<const Triple> triples) {
  if (triples.empty()) return true;
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& t : triples) {
    auto a = node_key(t.subject);
    auto b = node_key(t.object);
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::set<std::string> seen;
  std::deque<std::string> queue{adj.begin()->first};
  seen.insert(adj.begin()->first);
  while (!queue.empty()) {
    auto cur = queue.front();
    queue.pop_front();
    for (const auto& n : adj[cur]) {
      if (seen.insert(n).second) queue.push_back(n);
    }
  }
  return seen.size() == adj.size();
}

void validate(const QueryGraph& q) {
  if (q.triples.empty()) throw StructureError("query has no triples");
  if (!is_connected(q.triples)) throw StructureError("query graph is disconnected");
  const auto vars = q.variables();
  auto occurs = [&](int v) { return std::binary_search(vars.begin(), vars.end(), v); };
  if (!occurs(q.answer)) {
    throw StructureError("answer variable ?v" + std::to_string(q.answer) + " is not bound by any triple");
  }
  std::set<int> maxed;
  std::set<int> mined;
  int counts = 0;
  for (const auto& d : q.decorations) {
    const int v = decoration_var(d);
    if (!occurs(v)) throw StructureError("decorated variable ?v" + std::to_string(v) + " is not bound by any triple");
    if (std::holds_alternative<ArgMax>(d)) maxed.insert(v);
    if (std::holds_alternative<ArgMin>(d)) mined.insert(v);
    if (std::holds_alternative<Count>(d)) {
      ++counts;
      if (v != q.answer) throw StructureError("count must apply to the answer variable");
    }
  }
  for (int v : maxed) {
    if (mined.count(v)) throw StructureError("argmax and argmin on the same variable ?v" + std::to_string(v));
  }
  if (counts > 1) throw StructureError("more than one count decoration");
}

std::string canonicalize(const QueryGraph& q) {
  validate(q);
  CanonicalSearch search(q.triples, &q.decorations, q.answer);
  search.run();
  return search.key();
}

KeyedStructure keyed_structure(std::span<const Triple> triples) {
  if (triples.empty()) throw StructureError("query has no triples");
  if (!is_connected(triples)) throw StructureError("query graph is disconnected");
  CanonicalSearch search(triples, nullptr, std::nullopt);
  search.run();
  return {search.key(), search.var_map()};
}

std::string structure_key(std::span<const Triple> triples) {
  if (triples.empty()) throw StructureError("query has no triples");
  if (!is_connected(triples)) throw StructureError("query graph is disconnected");
  CanonicalSearch search(triples, nullptr, std::nullopt);
  search.run();
  return search.key();
}

// Display order of `triples`: indices in the order a depth-first walk emits
// them. `canon` maps each variable to its canonical index and breaks ties.
std::vector<std::size_t> display_order(std::span<const Triple> triples, const std::vector<int>& canon) {

  auto sort_key = [&](const Term& t) -> std::string {
    if (!is_var(t)) return ":" + std::get<EntityRef>(t).id;
    char buf[16];
    std::snprintf(buf, sizeof buf, "?%04d", canon.at(static_cast<std::size_t>(var_of(t))));
    return buf;
  };

  // Start at the entity anchor whose triple has the smallest relation name.
  std::optional<std::tuple<std::string, std::string, int>> start_rank;
  std::string start;
  for (const auto& t : triples) {
    for (int side = 0; side < 2; ++side) {
      const Term& term = side == 0 ? t.subject : t.object;
      if (is_var(term)) continue;
      std::tuple<std::string, std::string, int> rank{t.relation, std::get<EntityRef>(term).id, side};
      if (!start_rank || rank < *start_rank) {
        start_rank = rank;
        start = node_key(term);
      }
    }
  }
  if (!start_rank) {
    for (const auto& t : triples) {
      for (const Term* term : {&t.subject, &t.object}) {
        if (is_var(*term) && canon.at(static_cast<std::size_t>(var_of(*term))) == 0) start = node_key(*term);
      }
    }
  }

  std::vector<char> used(triples.size(), 0);
  std::set<std::string> visited;
  std::vector<std::size_t> order;

  auto visit = [&](auto&& self, const std::string& node) -> void {
    visited.insert(node);
    for (;;) {
      std::optional<std::tuple<int, std::string, int, std::string>> best;
      std::size_t best_index = 0;
      for (std::size_t i = 0; i < triples.size(); ++i) {
        if (used[i]) continue;
        const auto& t = triples[i];
        const bool as_subject = node_key(t.subject) == node;
        const bool as_object = node_key(t.object) == node;
        if (!as_subject && !as_object) continue;
        const Term& other = as_subject ? t.object : t.subject;
        const int fresh_var = is_var(other) && !visited.count(node_key(other)) ? 0 : 1;
        std::tuple<int, std::string, int, std::string> rank{fresh_var, t.relation, as_subject ? 0 : 1,
                                                            sort_key(other)};
        if (!best || rank < *best) {
          best = rank;
          best_index = i;
        }
      }
      if (!best) return;
      used[best_index] = 1;
      order.push_back(best_index);
      const auto& t = triples[best_index];
      const Term& other = node_key(t.subject) == node ? t.object : t.subject;
      const auto other_key = node_key(other);
      if (!visited.count(other_key)) self(self, other_key);
    }
  };
  visit(visit, start);
  if (order.size() != triples.size()) throw StructureError("query graph is disconnected");
  return order;
}


QueryGraph normalized(const QueryGraph& q) {
  validate(q);
  CanonicalSearch search(q.triples, &q.decorations, q.answer);
  search.run();
  const auto& canon = search.var_map();
  const auto order = display_order(q.triples, canon);

  std::vector<int> renumber(canon.size(), -1);
  int next = 0;
  auto remap = [&](const Term& t) -> Term {
    if (!is_var(t)) return t;
    auto& slot = renumber[static_cast<std::size_t>(var_of(t))];
    if (slot < 0) slot = next++;
    return Var{slot};
  };

  QueryGraph out;
  out.layer = q.layer;
  out.parent = q.parent;
  for (auto i : order) {
    const auto& t = q.triples[i];
    Term s = remap(t.subject);
    Term o = remap(t.object);
    out.triples.push_back(Triple{std::move(s), t.relation, std::move(o)});
  }
  out.answer = renumber.at(static_cast<std::size_t>(q.answer));
  for (auto d : q.decorations) {
    std::visit([&](auto& x) { x.var = renumber.at(static_cast<std::size_t>(x.var)); }, d);
    out.decorations.push_back(std::move(d));
  }
  std::stable_sort(out.decorations.begin(), out.decorations.end(), [](const Decoration& a, const Decoration& b) {
    // type, filter, argmax, argmin, count: the order logic forms list them in.
    static constexpr int rank[] = {2, 3, 1, 4, 0};
    const auto ra = rank[a.index()];
    const auto rb = rank[b.index()];
    if (ra != rb) return ra < rb;
    return decoration_var(a) < decoration_var(b);
  });
  return out;
}

std::vector<Triple> normalized_structure(std::span<const Triple> triples) {
  if (triples.empty()) throw StructureError("query has no triples");
  if (!is_connected(triples)) throw StructureError("query graph is disconnected");
  CanonicalSearch search(triples, nullptr, std::nullopt);
  search.run();
  const auto order = display_order(triples, search.var_map());
  std::vector<int> renumber(search.var_map().size(), -1);
  int next = 0;
  std::vector<Triple> out;
  for (auto i : order) {
    Triple t = triples[i];
    for (Term* term : {&t.subject, &t.object}) {
      if (!is_var(*term)) continue;
      auto& slot = renumber[static_cast<std::size_t>(var_of(*term))];
      if (slot < 0) slot = next++;
      *term = Var{slot};
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::size_t entity_occurrences(std::span<const Triple> triples) {
  std::size_t n = 0;
  for (const auto& t : triples) n += static_cast<std::size_t>(!is_var(t.subject)) + static_cast<std::size_t>(!is_var(t.object));
  return n;
}

int max_entity_distance(std::span<const Triple> triples) {
  const int nv = max_var(triples) + 1;
  std::vector<int> dist(static_cast<std::size_t>(std::max(nv, 0)), -1);
  std::vector<std::vector<int>> adj(dist.size());
  std::deque<int> queue;
  bool any_entity = false;
  for (const auto& t : triples) {
    const bool sv = is_var(t.subject);
    const bool ov = is_var(t.object);
    if (sv && ov) {
      adj[static_cast<std::size_t>(var_of(t.subject))].push_back(var_of(t.object));
      adj[static_cast<std::size_t>(var_of(t.object))].push_back(var_of(t.subject));
    } else if (sv || ov) {
      any_entity = true;
      const int v = sv ? var_of(t.subject) : var_of(t.object);
      if (dist[static_cast<std::size_t>(v)] < 0) {
        dist[static_cast<std::size_t>(v)] = 1;
        queue.push_back(v);
      }
    } else {
      any_entity = true;
    }
  }
  if (!any_entity) return -1;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int n : adj[static_cast<std::size_t>(v)]) {
      if (dist[static_cast<std::size_t>(n)] < 0) {
        dist[static_cast<std::size_t>(n)] = dist[static_cast<std::size_t>(v)] + 1;
        queue.push_back(n);
      }
    }
  }
  int worst = 0;
  for (std::size_t v = 0; v < dist.size(); ++v) {
    bool present = false;
    for (const auto& t : triples) {
      present = present || (is_var(t.subject) && var_of(t.subject) == static_cast<int>(v)) ||
                (is_var(t.object) && var_of(t.object) == static_cast<int>(v));
    }
    if (!present) continue;
    if (dist[v] < 0) return std::numeric_limits<int>::max();
    worst = std::max(worst, dist[v]);
  }
  return worst;
}

}  // namespace targa
