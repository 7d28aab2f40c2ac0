#include "targa/construction.hpp"

#include <algorithm>
#include <optional>
#include <tuple>
#include <unordered_map>
#include <utility>

#include <spdlog/spdlog.h>

#include "targa/error.hpp"
#include "targa/literal.hpp"
#include "targa/text.hpp"

namespace targa {

void Limits::check() const {
  if (max_hops < 1) throw ConfigError("max_hops must be at least 1");
  if (max_edges < max_hops) throw ConfigError("max_edges must be at least max_hops");
}

const Candidate* CandidatePool::find(std::string_view key) const {
  for (const auto& c : entries) {
    if (c.key == key) return &c;
  }
  return nullptr;
}

std::map<std::string, std::size_t> CandidatePool::stats() const {
  std::map<std::string, std::size_t> out;
  for (const auto& c : entries) {
    ++out[c.query.has_decorations() ? std::string("decorated") : c.query.layer.str()];
  }
  return out;
}

std::set<std::string> CandidatePool::structure_keys() const {
  std::set<std::string> out;
  for (const auto& c : entries) {
    if (!c.query.has_decorations()) out.insert(c.key);
  }
  return out;
}

namespace {

using Structure = std::vector<Triple>;

int max_var(const Structure& s) {
  int m = -1;
  for (const auto& t : s) {
    if (is_var(t.subject)) m = std::max(m, var_of(t.subject));
    if (is_var(t.object)) m = std::max(m, var_of(t.object));
  }
  return m;
}

std::vector<int> vars_of(const Structure& s) {
  std::vector<int> out;
  for (const auto& t : s) {
    if (is_var(t.subject)) out.push_back(var_of(t.subject));
    if (is_var(t.object)) out.push_back(var_of(t.object));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

QueryGraph make_query(const Structure& s, int answer, LayerTag layer) {
  QueryGraph q;
  q.triples = s;
  q.answer = answer;
  q.layer = layer;
  return normalized(q);
}

struct ValueSets {
  std::unordered_map<int, std::vector<NodeId>> columns;
  bool truncated = false;
};

struct ValueView {
  const ValueSets* sets;
  std::vector<int> var_map;

  bool truncated() const { return sets->truncated; }
  const std::vector<NodeId>& column(int v) const {
    return sets->columns.at(var_map.at(static_cast<std::size_t>(v)));
  }
};

bool intersects(const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      return true;
    }
  }
  return false;
}

// Probing, caching and logging shared by all construction stages.
class Synthesizer {
 public:
  Synthesizer(const KnowledgeGraph& graph, const Limits& limits, CandidatePool& pool)
      : graph_(graph), limits_(limits), pool_(pool) {}

  const KnowledgeGraph& graph() const { return graph_; }
  const Limits& limits() const { return limits_; }

  bool probe(const Structure& s, const std::string& key, const std::string& stage,
             std::vector<std::string> sources) {
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    auto& used = spent_[stage];
    if (used >= limits_.probe_budget) {
      if (!pool_.truncated) spdlog::warn("probe budget exhausted in stage {}", stage);
      pool_.truncated = true;
      return false;
    }
    ++used;
    QueryGraph q;
    q.triples = s;
    q.answer = vars_of(s).front();
    const bool valid = !execute(q, graph_, ExecMode::Probe).empty();
    cache_.emplace(key, valid);
    pool_.probe_log.push_back({key, stage, std::move(sources), valid, ExecMode::Probe});
    return valid;
  }

  bool probe_query(const QueryGraph& q, const std::string& key, const std::string& source) {
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    auto& used = spent_["decorate"];
    if (used >= limits_.probe_budget) {
      pool_.truncated = true;
      return false;
    }
    ++used;
    const bool valid = !execute(q, graph_, ExecMode::Probe).empty();
    cache_.emplace(key, valid);
    pool_.probe_log.push_back({key, "decorate", {source}, valid, ExecMode::Probe});
    return valid;
  }

  // Bindings of each variable of `s`. Executions are shared by every
  // numbering of the same structure.
  const ValueView& values(const Structure& s) {
    std::string cache_key;
    for (const auto& t : s) {
      cache_key += term_string(t.subject) + " " + t.relation + " " + term_string(t.object) + " . ";
    }
    if (auto it = views_.find(cache_key); it != views_.end()) return it->second;
    auto keyed = keyed_structure(s);
    auto it = values_.find(keyed.key);
    if (it == values_.end()) {
      QueryGraph q;
      q.triples = s;
      q.answer = vars_of(s).front();
      const auto rows = execute(q, graph_, ExecMode::Full, limits_.value_cap);
      ValueSets vs;
      vs.truncated = rows.truncated;
      for (int v : rows.variables) vs.columns[keyed.var_map.at(static_cast<std::size_t>(v))] = rows.column(v);
      pool_.probe_log.push_back({keyed.key, "values", {keyed.key}, !rows.empty(), ExecMode::Full});
      it = values_.emplace(keyed.key, std::move(vs)).first;
    }
    return views_.emplace(cache_key, ValueView{&it->second, std::move(keyed.var_map)}).first->second;
  }

 private:
  const KnowledgeGraph& graph_;
  const Limits& limits_;
  CandidatePool& pool_;
  std::unordered_map<std::string, bool> cache_;
  std::unordered_map<std::string, ValueSets> values_;
  std::unordered_map<std::string, ValueView> views_;
  std::map<std::string, std::size_t> spent_;
};

std::vector<QueryGraph> layer1(Synthesizer& syn, const std::vector<EntityRef>& entities,
                               const std::vector<std::string>& relations) {
  std::map<std::string, QueryGraph> out;
  for (const auto& e : entities) {
    for (const auto& r : relations) {
      for (int orient = 0; orient < 2; ++orient) {
        Structure s{orient == 0 ? Triple{e, r, Var{0}} : Triple{Var{0}, r, e}};
        const auto key = structure_key(s);
        if (!syn.probe(s, key, "L1", {})) continue;
        auto q = make_query(s, 0, LayerTag::layer(1));
        out.emplace(canonicalize(q), std::move(q));
      }
    }
  }
  std::vector<QueryGraph> result;
  for (auto& [k, q] : out) result.push_back(std::move(q));
  return result;
}

std::vector<QueryGraph> expand(Synthesizer& syn, const std::vector<QueryGraph>& prev,
                               const std::vector<std::string>& relations) {
  std::vector<std::pair<std::string, const QueryGraph*>> sorted;
  for (const auto& q : prev) sorted.emplace_back(canonicalize(q), &q);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::map<std::string, QueryGraph> out;
  for (const auto& [pkey, q] : sorted) {
    const int k = static_cast<int>(q->edge_count()) + 1;
    if (k > syn.limits().max_hops) continue;
    const auto stage = "L" + std::to_string(k);
    const auto source = structure_key(q->triples);
    const int fresh = max_var(q->triples) + 1;
    for (int v : q->variables()) {
      for (const auto& r : relations) {
        for (int orient = 0; orient < 2; ++orient) {
          Structure s = q->triples;
          s.push_back(orient == 0 ? Triple{Var{v}, r, Var{fresh}} : Triple{Var{fresh}, r, Var{v}});
          const auto key = structure_key(s);
          if (!syn.probe(s, key, stage, {source})) continue;
          for (int answer : {fresh, q->answer}) {
            auto child = make_query(s, answer, LayerTag::layer(k));
            auto ckey = canonicalize(child);
            auto it = out.find(ckey);
            if (it == out.end()) {
              child.parent = pkey;
              out.emplace(std::move(ckey), std::move(child));
            } else if (pkey < *it->second.parent) {
              it->second.parent = pkey;
            }
          }
        }
      }
    }
  }
  std::vector<QueryGraph> result;
  for (auto& [k, q] : out) result.push_back(std::move(q));
  return result;
}

struct Operand {
  Structure triples;
  std::string key;
};

// B glued onto A by identifying B's variable y with A's variable x.
std::optional<Structure> merge(const Structure& a, int x, const Structure& b, int y) {
  const int base = max_var(a) + 1;
  auto rename = [&](Term t) -> Term {
    if (!is_var(t)) return t;
    const int v = var_of(t);
    return Var{v == y ? x : base + v};
  };
  Structure out = a;
  for (const auto& t : b) {
    Triple r{rename(t.subject), t.relation, rename(t.object)};
    if (std::find(out.begin(), out.end(), r) != out.end()) return std::nullopt;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<QueryGraph> combination(Synthesizer& syn, const std::vector<QueryGraph>& pool) {
  const auto& limits = syn.limits();
  std::map<std::string, Operand> piece_map;
  for (const auto& q : pool) {
    if (q.layer.kind != LayerTag::Kind::Expansion || q.has_decorations()) continue;
    if (static_cast<int>(q.edge_count()) > limits.max_hops) continue;
    auto key = structure_key(q.triples);
    if (piece_map.count(key)) continue;
    piece_map.emplace(key, Operand{normalized_structure(q.triples), key});
  }
  std::vector<Operand> pieces;
  for (auto& [k, p] : piece_map) pieces.push_back(std::move(p));

  // Composites available as left operands: pieces plus earlier combinations.
  std::vector<Operand> composites = pieces;

  struct Best {
    std::size_t edges;
    std::string parent;
    std::size_t total;
  };
  std::map<std::string, std::pair<Structure, Best>> found;
  std::map<std::pair<std::string, int>, std::string> parent_keys;

  auto parent_key = [&](const Operand& op, int glue) {
    auto [it, inserted] = parent_keys.try_emplace({op.key, glue});
    if (inserted) it->second = canonicalize(make_query(op.triples, glue, {}));
    return it->second;
  };

  for (int e = 2; e <= limits.max_edges; ++e) {
    const auto stage = "C" + std::to_string(e);
    std::vector<Operand> made;
    for (const auto& a : composites) {
      const int ea = static_cast<int>(a.triples.size());
      const int eb = e - ea;
      if (eb < 1 || eb > limits.max_hops) continue;
      for (const auto& b : pieces) {
        if (static_cast<int>(b.triples.size()) != eb) continue;
        for (int x : vars_of(a.triples)) {
          for (int y : vars_of(b.triples)) {
            auto merged = merge(a.triples, x, b.triples, y);
            if (!merged) continue;
            const auto key = structure_key(*merged);
            auto hit = found.find(key);
            if (hit == found.end()) {
              const auto& va = syn.values(a.triples);
              const auto& vb = syn.values(b.triples);
              if (!va.truncated() && !vb.truncated() && !intersects(va.column(x), vb.column(y))) {
                continue;
              }
              if (!syn.probe(*merged, key, stage, {a.key, b.key})) continue;
            }
            // The smaller operand is the parent, ties going to the smaller key.
            const bool a_parent = ea < eb || (ea == eb && a.key <= b.key);
            const Operand& p = a_parent ? a : b;
            Best cand{p.triples.size(), parent_key(p, a_parent ? x : y), static_cast<std::size_t>(e)};
            if (hit == found.end()) {
              found.emplace(key, std::make_pair(*merged, cand));
              made.push_back({normalized_structure(*merged), key});
            } else if (std::tie(cand.edges, cand.parent) <
                       std::tie(hit->second.second.edges, hit->second.second.parent)) {
              hit->second.second = cand;
            }
          }
        }
      }
    }
    std::sort(made.begin(), made.end(), [](const auto& l, const auto& r) { return l.key < r.key; });
    composites.insert(composites.end(), made.begin(), made.end());
  }

  std::map<std::string, QueryGraph> out;
  for (const auto& [key, entry] : found) {
    const auto& [s, best] = entry;
    const auto tag = LayerTag::combo(static_cast<int>(best.edges),
                                     static_cast<int>(best.total - best.edges));
    for (int v : vars_of(s)) {
      auto q = make_query(s, v, tag);
      q.parent = best.parent;
      out.emplace(canonicalize(q), std::move(q));
    }
  }
  std::vector<QueryGraph> result;
  for (auto& [k, q] : out) result.push_back(std::move(q));
  return result;
}

bool has_count_cue(const std::vector<std::string>& tokens) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == "count") return true;
    if (i + 1 < tokens.size()) {
      if (tokens[i] == "how" && tokens[i + 1] == "many") return true;
      if (tokens[i] == "number" && tokens[i + 1] == "of") return true;
    }
  }
  return false;
}

std::vector<QueryGraph> decorations(Synthesizer& syn, const QueryGraph& base, std::string_view nlq) {
  const auto& graph = syn.graph();
  const auto base_key = canonicalize(base);
  const auto& vs = syn.values(base.triples);

  const auto tokens = text::tokenize(nlq, true);
  std::vector<std::string> numbers;
  for (const auto& tok : tokens) {
    if (parse_number(tok) && std::find(numbers.begin(), numbers.end(), tok) == numbers.end()) {
      numbers.push_back(tok);
    }
  }

  std::vector<QueryGraph> variants;
  for (int v : base.variables()) {
    const auto& column = vs.column(v);
    if (column.empty()) continue;
    bool numeric = true;
    bool datetime = true;
    for (NodeId n : column) {
      const Literal* lit = graph.literal(n);
      if (!lit || !lit->numeric) {
        numeric = false;
        break;
      }
      if (lit->kind != LiteralKind::DateTime) datetime = false;
    }
    if (!numeric) continue;

    int answer = base.answer;
    if (answer == v) {
      answer = -1;
      for (const auto& t : base.triples) {
        if (is_var(t.subject) && var_of(t.subject) == v && is_var(t.object)) answer = var_of(t.object);
        if (is_var(t.object) && var_of(t.object) == v && is_var(t.subject)) answer = var_of(t.subject);
        if (answer >= 0) break;
      }
    }
    if (answer >= 0) {
      for (int which = 0; which < 2; ++which) {
        QueryGraph q = base;
        q.answer = answer;
        q.decorations = {which == 0 ? Decoration{ArgMax{v}} : Decoration{ArgMin{v}}};
        variants.push_back(std::move(q));
      }
    }
    for (const auto& num : numbers) {
      const Literal value = datetime ? Literal::quoted(num) : Literal::parse(num);
      if (datetime && value.kind != LiteralKind::DateTime) continue;
      for (auto op : {CompareOp::Less, CompareOp::Greater, CompareOp::LessEqual, CompareOp::GreaterEqual}) {
        QueryGraph q = base;
        q.decorations = {Filter{v, op, value}};
        variants.push_back(std::move(q));
      }
    }
  }
  if (has_count_cue(tokens)) {
    QueryGraph q = base;
    q.decorations = {Count{base.answer}};
    variants.push_back(std::move(q));
  }

  std::map<std::string, QueryGraph> out;
  for (auto& q : variants) {
    q.parent = base_key;
    auto n = normalized(q);
    n.parent = base_key;
    auto key = canonicalize(n);
    if (out.count(key) || !syn.probe_query(n, key, structure_key(base.triples))) continue;
    out.emplace(std::move(key), std::move(n));
  }
  std::vector<QueryGraph> result;
  for (auto& [k, q] : out) result.push_back(std::move(q));
  return result;
}

int stage_rank(const std::string& stage) {
  if (stage == "decorate") return 1000;
  if (stage == "values") return 2000;
  const int n = std::stoi(stage.substr(1));
  return stage[0] == 'L' ? n : 100 + n;
}

}  // namespace

std::vector<QueryGraph> build_layer1(const std::vector<EntityRef>& entities,
                                     const std::vector<std::string>& relations,
                                     const KnowledgeGraph& graph) {
  CandidatePool scratch;
  Limits limits;
  Synthesizer syn(graph, limits, scratch);
  return layer1(syn, entities, relations);
}

std::vector<QueryGraph> expand_layer(const std::vector<QueryGraph>& prev,
                                     const std::vector<std::string>& relations,
                                     const KnowledgeGraph& graph, const Limits& limits) {
  limits.check();
  CandidatePool scratch;
  Synthesizer syn(graph, limits, scratch);
  return expand(syn, prev, relations);
}

std::vector<QueryGraph> combine(const std::vector<QueryGraph>& pool, const KnowledgeGraph& graph,
                                const Limits& limits) {
  limits.check();
  CandidatePool scratch;
  Synthesizer syn(graph, limits, scratch);
  return combination(syn, pool);
}

std::vector<QueryGraph> decorate(const QueryGraph& q, std::string_view nlq, const KnowledgeGraph& graph) {
  CandidatePool scratch;
  Limits limits;
  Synthesizer syn(graph, limits, scratch);
  return decorations(syn, normalized(q), nlq);
}

CandidatePool synthesize(std::string_view nlq, const std::vector<EntityRef>& entities,
                         const std::vector<std::string>& relations, const KnowledgeGraph& graph,
                         const SynthesisOptions& options) {
  options.limits.check();
  CandidatePool pool;
  if (entities.empty() || relations.empty()) return pool;
  Synthesizer syn(graph, options.limits, pool);

  std::vector<QueryGraph> all;
  auto layer = layer1(syn, entities, relations);
  all.insert(all.end(), layer.begin(), layer.end());
  for (int k = 2; k <= options.limits.max_hops && !layer.empty(); ++k) {
    layer = expand(syn, layer, relations);
    all.insert(all.end(), layer.begin(), layer.end());
  }
  auto combos = combination(syn, all);
  all.insert(all.end(), combos.begin(), combos.end());

  std::map<std::string, QueryGraph> unique;
  for (auto& q : all) {
    auto key = canonicalize(q);
    unique.emplace(std::move(key), std::move(q));
  }
  if (options.decorations) {
    std::vector<QueryGraph> extra;
    for (const auto& [key, q] : unique) {
      auto vs = decorations(syn, q, nlq);
      extra.insert(extra.end(), std::make_move_iterator(vs.begin()), std::make_move_iterator(vs.end()));
    }
    for (auto& q : extra) {
      auto key = canonicalize(q);
      unique.emplace(std::move(key), std::move(q));
    }
  }

  for (auto& [key, q] : unique) pool.entries.push_back({key, std::move(q)});
  auto order = [](const Candidate& c) {
    return std::make_tuple(c.query.has_decorations(), c.query.layer.kind, c.query.edge_count());
  };
  std::stable_sort(pool.entries.begin(), pool.entries.end(),
                   [&](const Candidate& a, const Candidate& b) { return order(a) < order(b); });
  std::stable_sort(pool.probe_log.begin(), pool.probe_log.end(),
                   [](const ProbeRecord& a, const ProbeRecord& b) {
                     return std::make_pair(stage_rank(a.stage), a.key) <
                            std::make_pair(stage_rank(b.stage), b.key);
                   });
  return pool;
}

}  // namespace targa
