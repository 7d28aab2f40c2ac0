#include "targa/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <functional>
#include <limits>
#include <thread>

#include <spdlog/spdlog.h>

#include "targa/error.hpp"
#include "targa/literal.hpp"
#include "targa/logic_form.hpp"
#include "targa/text.hpp"
#include "targa/textify.hpp"

namespace targa {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

const std::set<std::string>& known_tags() {
  static const std::set<std::string> tags{"iid", "compositional", "zero-shot"};
  return tags;
}

std::string answer_string(const nlohmann::ordered_json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return format_number(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  throw Error("answers must be strings or numbers");
}

}  // namespace

std::vector<DatasetItem> load_dataset(std::istream& in) {
  std::vector<DatasetItem> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::ordered_json::parse(line);
      DatasetItem item;
      item.question = j.at("question").get<std::string>();
      item.id = j.contains("id") ? j["id"].get<std::string>() : std::to_string(out.size());
      if (j.contains("entities") && !j["entities"].is_null()) {
        EntityLinks links;
        for (const auto& [surface, id] : j["entities"].items()) links.emplace_back(surface, id.get<std::string>());
        item.links = std::move(links);
      }
      if (j.contains("answers")) {
        for (const auto& a : j["answers"]) item.answers.push_back(answer_string(a));
      }
      if (j.contains("logic_form") && j["logic_form"].is_string()) item.logic_form = j["logic_form"].get<std::string>();
      if (j.contains("tag") && j["tag"].is_string()) {
        auto tag = j["tag"].get<std::string>();
        if (!known_tags().count(tag)) throw Error("unknown tag \"" + tag + "\"");
        item.tag = std::move(tag);
      }
      out.push_back(std::move(item));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), line_no);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return out;
}

std::vector<DatasetItem> load_dataset_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return load_dataset(in);
}

std::vector<TrainingExample> load_training_pool(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<TrainingExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({j.at("question").get<std::string>(), j.at("logic_form").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return out;
}

std::string normalize_answer(std::string_view answer) {
  auto t = text::trim(answer);
  if (auto n = parse_number(t)) return format_number(*n);
  return t;
}

double f1(const std::vector<std::string>& predicted, const std::vector<std::string>& gold) {
  std::set<std::string> p;
  std::set<std::string> g;
  for (const auto& a : predicted) p.insert(normalize_answer(a));
  for (const auto& a : gold) g.insert(normalize_answer(a));
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  std::size_t hit = 0;
  for (const auto& a : p) hit += g.count(a);
  if (hit == 0) return 0.0;
  const double precision = static_cast<double>(hit) / static_cast<double>(p.size());
  const double recall = static_cast<double>(hit) / static_cast<double>(g.size());
  return 2 * precision * recall / (precision + recall);
}

std::string_view to_string(CorruptionMode mode) {
  return mode == CorruptionMode::Relation ? "relation" : "entity";
}

std::optional<CorruptionMode> parse_corruption_mode(std::string_view text) {
  if (text == "relation") return CorruptionMode::Relation;
  if (text == "entity") return CorruptionMode::Entity;
  return std::nullopt;
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_below needs n > 0");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = 0;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

std::uint64_t item_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<Demonstration> corrupt_demonstrations(const std::vector<Demonstration>& demos, std::size_t level,
                                                  CorruptionMode mode, const KnowledgeGraph& graph,
                                                  std::uint64_t seed) {
  std::vector<Demonstration> out = demos;
  if (level == 0) return out;
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < demos.size(); ++i) {
    if (demos[i].query) eligible.push_back(i);
  }
  if (level > eligible.size()) {
    throw ConfigError("attack level " + std::to_string(level) + " exceeds the " +
                      std::to_string(eligible.size()) + " corruptible demonstrations");
  }

  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < level; ++i) {
    const auto j = i + uniform_below(rng, eligible.size() - i);
    std::swap(eligible[i], eligible[j]);
  }
  std::sort(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(level));

  const auto relations = graph.relation_names();
  for (std::size_t i = 0; i < level; ++i) {
    auto& demo = out[eligible[i]];
    QueryGraph q = *demo.query;
    if (mode == CorruptionMode::Relation) {
      if (relations.size() < 2) throw ConfigError("relation corruption needs at least two relations");
      auto& t = q.triples[uniform_below(rng, q.triples.size())];
      std::vector<std::string> others;
      for (const auto& r : relations) {
        if (r != t.relation) others.push_back(r);
      }
      t.relation = others[uniform_below(rng, others.size())];
    } else {
      std::vector<Term*> slots;
      for (auto& t : q.triples) {
        if (!is_var(t.subject)) slots.push_back(&t.subject);
        if (!is_var(t.object)) slots.push_back(&t.object);
      }
      if (slots.empty()) throw ConfigError("demonstration has no entity to corrupt");
      Term& slot = *slots[uniform_below(rng, slots.size())];
      const auto current = std::get<EntityRef>(slot).id;
      std::vector<NodeId> others;
      for (NodeId n : graph.entities()) {
        if (graph.node_key(n) != current) others.push_back(n);
      }
      if (others.empty()) throw ConfigError("entity corruption needs at least two entities");
      const NodeId pick = others[uniform_below(rng, others.size())];
      slot = EntityRef{graph.node_key(pick), graph.label(pick)};
    }
    demo.query = q;
    demo.question = textify(q);
    demo.logic_form = print_logic_form(from_query(q));
    demo.corrupted = true;
  }
  return out;
}

std::optional<double> EvalReport::mean_f1() const {
  if (items.empty()) return std::nullopt;
  double s = 0;
  for (const auto& i : items) s += i.f1;
  return s / static_cast<double>(items.size());
}

namespace {

template <typename F>
double mean_of(const std::vector<ItemResult>& items, F f) {
  if (items.empty()) return 0.0;
  double s = 0;
  for (const auto& i : items) s += f(i);
  return s / static_cast<double>(items.size());
}

}  // namespace

double EvalReport::mean_qpq() const {
  return mean_of(items, [](const ItemResult& i) { return static_cast<double>(i.record.probe_count); });
}

double EvalReport::mean_tpq() const {
  return mean_of(items, [](const ItemResult& i) { return i.record.total_seconds(); });
}

double EvalReport::mean_pool_size() const {
  return mean_of(items, [](const ItemResult& i) { return static_cast<double>(i.record.pool_size); });
}

std::size_t EvalReport::hard_failures() const {
  return static_cast<std::size_t>(
      std::count_if(items.begin(), items.end(), [](const ItemResult& i) { return i.hard_failed; }));
}

std::map<std::string, std::pair<double, std::size_t>> EvalReport::per_tag() const {
  std::map<std::string, std::pair<double, std::size_t>> sums;
  for (const auto& i : items) {
    if (!i.tag) continue;
    auto& [s, n] = sums[*i.tag];
    s += i.f1;
    ++n;
  }
  for (auto& [tag, v] : sums) v.first /= static_cast<double>(v.second);
  return sums;
}

nlohmann::ordered_json EvalReport::report_json() const {
  nlohmann::ordered_json j;
  j["items"] = items.size();
  const auto f = mean_f1();
  j["f1"] = f ? nlohmann::ordered_json(*f) : nlohmann::ordered_json();
  j["f1_defined"] = f.has_value();
  j["qpq"] = mean_qpq();
  j["mean_pool_size"] = mean_pool_size();
  j["mean_input_tokens"] =
      mean_of(items, [](const ItemResult& i) { return static_cast<double>(i.record.usage.input_tokens); });
  j["mean_output_tokens"] =
      mean_of(items, [](const ItemResult& i) { return static_cast<double>(i.record.usage.output_tokens); });
  j["hard_failures"] = hard_failures();
  auto tags = nlohmann::ordered_json::object();
  for (const auto& [tag, v] : per_tag()) tags[tag] = {{"f1", v.first}, {"items", v.second}};
  j["per_tag"] = std::move(tags);
  auto rows = nlohmann::ordered_json::array();
  for (const auto& i : items) {
    nlohmann::ordered_json r;
    r["index"] = i.index;
    r["id"] = i.id;
    r["tag"] = i.tag ? nlohmann::ordered_json(*i.tag) : nlohmann::ordered_json();
    r["f1"] = i.f1;
    r["probe_count"] = i.record.probe_count;
    r["pool_size"] = i.record.pool_size;
    r["fallback"] = i.record.fallback;
    r["no_candidates"] = i.record.no_candidates;
    r["corrupted"] = i.corrupted;
    r["hard_failed"] = i.hard_failed;
    if (i.hard_failed) r["failure"] = i.failure;
    rows.push_back(std::move(r));
  }
  j["per_item"] = std::move(rows);
  return j;
}

nlohmann::ordered_json EvalReport::timing_json() const {
  nlohmann::ordered_json j;
  j["wall_seconds"] = wall_seconds;
  j["tpq"] = mean_tpq();
  std::map<std::string, double> stages;
  auto per_item = nlohmann::ordered_json::array();
  for (const auto& i : items) {
    for (const auto& [stage, s] : i.record.timings) stages[stage] += s;
    per_item.push_back(i.record.total_seconds());
  }
  j["stage_totals"] = stages;
  j["per_item"] = std::move(per_item);
  return j;
}

EvalReport run_benchmark(const std::vector<DatasetItem>& dataset, const KnowledgeGraph& graph,
                         const BenchmarkOptions& options, const Providers& providers) {
  const auto start = std::chrono::steady_clock::now();
  EvalReport report;
  report.items.resize(dataset.size());

  auto run_item = [&](std::size_t index) {
    const auto& item = dataset[index];
    ItemResult& res = report.items[index];
    res.index = index;
    res.id = item.id;
    res.tag = item.tag;
    res.record.question = item.question;
    DemoTransform transform;
    if (options.attack && options.attack->level > 0) {
      transform = [&, index](std::vector<Demonstration>& demos) {
        std::size_t eligible = 0;
        for (const auto& d : demos) eligible += d.query.has_value();
        const auto level = std::min(options.attack->level, eligible);
        demos = corrupt_demonstrations(demos, level, options.attack->mode, graph, item_seed(options.seed, index));
        res.corrupted = level;
      };
    }
    try {
      res.record = answer_question(item.question, item.links, graph, options.engine, providers, transform);
      res.f1 = f1(res.record.answers.keys(), item.answers);
    } catch (const std::exception& e) {
      res.hard_failed = true;
      res.failure = e.what();
      res.f1 = 0.0;
      spdlog::error("item {} failed: {}", item.id, e.what());
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, dataset.size()));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < dataset.size(); ++i) run_item(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < dataset.size(); i = next++) run_item(i);
      });
    }
    for (auto& t : workers) t.join();
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

bool naive_nonempty(const std::vector<Triple>& triples, const KnowledgeGraph& graph) {
  if (triples.empty()) return false;
  // Start from a pattern with a constant, then keep to patterns that share a
  // variable with an earlier one.
  std::vector<std::size_t> order;
  std::vector<bool> used(triples.size(), false);
  std::set<int> bound;
  auto take = [&](std::size_t i) {
    used[i] = true;
    order.push_back(i);
    for (const Term* x : {&triples[i].subject, &triples[i].object}) {
      if (is_var(*x)) bound.insert(var_of(*x));
    }
  };
  auto linked = [&](const Triple& t) {
    return (is_var(t.subject) && bound.count(var_of(t.subject))) || (is_var(t.object) && bound.count(var_of(t.object)));
  };
  std::size_t first = 0;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    if (!is_var(triples[i].subject) || !is_var(triples[i].object)) {
      first = i;
      break;
    }
  }
  take(first);
  while (order.size() < triples.size()) {
    std::size_t pick = triples.size();
    for (std::size_t i = 0; i < triples.size() && pick == triples.size(); ++i) {
      if (!used[i] && linked(triples[i])) pick = i;
    }
    if (pick == triples.size()) pick = static_cast<std::size_t>(std::find(used.begin(), used.end(), false) - used.begin());
    take(pick);
  }

  const auto all = graph.triples();
  std::map<int, NodeId> assignment;
  std::set<std::string> constant_ids;
  for (const auto& t : triples) {
    for (const Term* x : {&t.subject, &t.object}) {
      if (!is_var(*x)) constant_ids.insert(std::get<EntityRef>(*x).id);
    }
  }
  auto matches = [&](const Term& term, NodeId node, std::vector<int>& fresh) {
    if (!is_var(term)) return !graph.is_literal(node) && graph.node_key(node) == std::get<EntityRef>(term).id;
    const int v = var_of(term);
    auto it = assignment.find(v);
    if (it != assignment.end()) return it->second == node;
    if (!graph.is_literal(node)) {
      if (constant_ids.count(graph.node_key(node))) return false;
      for (const auto& [other, bound] : assignment) {
        if (bound == node) return false;
      }
    }
    assignment[v] = node;
    fresh.push_back(v);
    return true;
  };
  std::function<bool(std::size_t)> search = [&](std::size_t depth) {
    if (depth == order.size()) return true;
    const auto& pat = triples[order[depth]];
    for (const auto& st : all) {
      if (graph.relation_name(st.predicate) != pat.relation) continue;
      std::vector<int> fresh;
      const bool ok = matches(pat.subject, st.subject, fresh) && matches(pat.object, st.object, fresh);
      if (ok && search(depth + 1)) return true;
      for (int v : fresh) assignment.erase(v);
    }
    return false;
  };
  return search(0);
}

namespace {

using Structure = std::vector<Triple>;

bool connected_subset(const Structure& s, const std::vector<std::size_t>& idx) {
  if (idx.empty()) return false;
  std::vector<bool> in(idx.size(), false);
  in[0] = true;
  std::set<int> vars;
  auto absorb = [&](const Triple& t) {
    if (is_var(t.subject)) vars.insert(var_of(t.subject));
    if (is_var(t.object)) vars.insert(var_of(t.object));
  };
  absorb(s[idx[0]]);
  bool grew = true;
  while (grew) {
    grew = false;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (in[i]) continue;
      const auto& t = s[idx[i]];
      const bool linked = (is_var(t.subject) && vars.count(var_of(t.subject))) ||
                          (is_var(t.object) && vars.count(var_of(t.object)));
      if (linked) {
        in[i] = true;
        absorb(t);
        grew = true;
      }
    }
  }
  return std::all_of(in.begin(), in.end(), [](bool b) { return b; });
}

// Can the edges be split into connected pieces, one per entity occurrence,
// each with at most `max_hops` edges?
bool decomposable(const Structure& s, int max_hops) {
  std::vector<std::size_t> anchors;
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < s.size(); ++i) {
    (!is_var(s[i].subject) || !is_var(s[i].object) ? anchors : rest).push_back(i);
  }
  if (anchors.empty()) return false;
  std::vector<std::size_t> choice(rest.size(), 0);
  while (true) {
    bool ok = true;
    for (std::size_t a = 0; a < anchors.size() && ok; ++a) {
      std::vector<std::size_t> piece{anchors[a]};
      for (std::size_t r = 0; r < rest.size(); ++r) {
        if (choice[r] == a) piece.push_back(rest[r]);
      }
      ok = static_cast<int>(piece.size()) <= max_hops && connected_subset(s, piece);
    }
    if (ok) return true;
    std::size_t r = 0;
    while (r < choice.size() && ++choice[r] == anchors.size()) choice[r++] = 0;
    if (r == choice.size()) return false;
  }
}

int fresh_var(const Structure& s) {
  int m = -1;
  for (const auto& t : s) {
    if (is_var(t.subject)) m = std::max(m, var_of(t.subject));
    if (is_var(t.object)) m = std::max(m, var_of(t.object));
  }
  return m + 1;
}

}  // namespace

std::set<std::string> brute_force_enumerate(const std::vector<EntityRef>& entities,
                                            const std::vector<std::string>& relations,
                                            const KnowledgeGraph& graph, const Limits& limits,
                                            std::size_t node_cap) {
  limits.check();
  if (graph.node_count() > node_cap) {
    throw Error("oracle refuses graphs with more than " + std::to_string(node_cap) + " nodes");
  }
  std::map<std::string, Structure> valid;
  std::set<std::string> seen;
  std::vector<Structure> frontier;

  auto consider = [&](Structure s, std::vector<Structure>& next) {
    auto key = structure_key(s);
    if (!seen.insert(key).second) return;
    if (!naive_nonempty(s, graph)) return;
    valid.emplace(std::move(key), s);
    next.push_back(std::move(s));
  };

  for (const auto& e : entities) {
    for (const auto& r : relations) {
      consider({Triple{e, r, Var{0}}}, frontier);
      consider({Triple{Var{0}, r, e}}, frontier);
    }
  }
  for (int edges = 1; edges < limits.max_edges && !frontier.empty(); ++edges) {
    std::vector<Structure> next;
    for (const auto& s : frontier) {
      const int fresh = fresh_var(s);
      for (int v = 0; v < fresh; ++v) {
        for (const auto& r : relations) {
          std::vector<Triple> leaves{Triple{Var{v}, r, Var{fresh}}, Triple{Var{fresh}, r, Var{v}}};
          for (const auto& e : entities) {
            leaves.push_back(Triple{Var{v}, r, e});
            leaves.push_back(Triple{e, r, Var{v}});
          }
          for (auto& leaf : leaves) {
            if (std::find(s.begin(), s.end(), leaf) != s.end()) continue;
            Structure grown = s;
            grown.push_back(std::move(leaf));
            consider(std::move(grown), next);
          }
        }
      }
    }
    frontier = std::move(next);
  }

  std::set<std::string> keys;
  for (const auto& [key, s] : valid) {
    if (!decomposable(s, limits.max_hops)) continue;
    std::set<int> vars;
    for (const auto& t : s) {
      if (is_var(t.subject)) vars.insert(var_of(t.subject));
      if (is_var(t.object)) vars.insert(var_of(t.object));
    }
    for (int v : vars) {
      QueryGraph q;
      q.triples = s;
      q.answer = v;
      keys.insert(canonicalize(q));
    }
  }
  return keys;
}

}  // namespace targa
