#include "targa/qa_engine.hpp"

#include <chrono>

#include <spdlog/spdlog.h>

#include "targa/error.hpp"
#include "targa/text.hpp"

namespace targa {

namespace {

class StageClock {
 public:
  explicit StageClock(std::vector<std::pair<std::string, double>>& sink) : sink_(sink) {}

  void lap(std::string stage) {
    const auto now = std::chrono::steady_clock::now();
    sink_.emplace_back(std::move(stage), std::chrono::duration<double>(now - last_).count());
    last_ = now;
  }

 private:
  std::vector<std::pair<std::string, double>>& sink_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

std::string quoted_list(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += "'" + items[i] + "'";
  }
  return out + "]";
}

}  // namespace

double AnswerRecord::total_seconds() const {
  double s = 0;
  for (const auto& [stage, t] : timings) s += t;
  return s;
}

nlohmann::ordered_json AnswerRecord::to_json(bool with_timings) const {
  nlohmann::ordered_json j;
  j["question"] = question;
  j["entities"] = entities;
  j["relations"] = relations;
  j["pool_size"] = pool_size;
  j["pool_truncated"] = pool_truncated;
  auto demos = nlohmann::ordered_json::array();
  for (const auto& d : demonstrations) {
    demos.push_back({{"question", d.question}, {"logic_form", d.logic_form}, {"score", d.score},
                     {"corrupted", d.corrupted}});
  }
  j["demonstrations"] = std::move(demos);
  j["prompt"] = prompt;
  j["completion"] = completion;
  j["logic_form"] = logic_form ? nlohmann::ordered_json(*logic_form) : nlohmann::ordered_json();
  j["sparql"] = sparql ? nlohmann::ordered_json(*sparql) : nlohmann::ordered_json();
  j["error"] = error ? nlohmann::ordered_json(*error) : nlohmann::ordered_json();
  j["fallback"] = fallback;
  j["no_candidates"] = no_candidates;
  auto values = nlohmann::ordered_json::array();
  for (const auto& v : answers.values) values.push_back({{"id", v.id}, {"label", v.label}});
  j["answers"] = std::move(values);
  j["count"] = answers.count ? nlohmann::ordered_json(*answers.count) : nlohmann::ordered_json();
  j["probe_count"] = probe_count;
  j["tokens"] = {{"input", usage.input_tokens}, {"output", usage.output_tokens}};
  if (with_timings) {
    nlohmann::ordered_json t;
    for (const auto& [stage, s] : timings) t[stage] = s;
    j["timings"] = std::move(t);
  }
  return j;
}

std::string build_prompt(const std::vector<Demonstration>& demos, std::string_view nlq,
                         const std::vector<std::string>& entity_surfaces) {
  std::string p =
      "You are a powerful model for generating PyQL queries to answer natural language questions.\n"
      "Here are some exemplars:\n";
  for (const auto& d : demos) {
    p += "###Question\n" + d.question + "\n###PyQL\n" + d.logic_form + "\n\n";
  }
  p += "Please follow the format of exemplars and output PyQL query for the following question. "
       "No explanation or questioning allowed.\n\n";
  p += "Entity List: " + quoted_list(entity_surfaces) + "\n\n";
  p += "###Question\n" + std::string(nlq) + "\n###PyQL";
  return p;
}

AnswerRecord answer_question(std::string_view nlq, const std::optional<EntityLinks>& links,
                             const KnowledgeGraph& graph, const EngineOptions& options,
                             const Providers& providers, const DemoTransform& transform) {
  ExecutionScope scope;
  AnswerRecord rec;
  rec.question = std::string(nlq);
  StageClock clock(rec.timings);

  const auto entities = link_entities(nlq, links, graph);
  std::vector<std::string> surfaces;
  EntityMap entity_map;
  for (const auto& e : entities.entries) {
    const auto& label = graph.label(e.node);
    surfaces.push_back(text::spaced(label));
    entity_map.add(label, graph.node_key(e.node));
    entity_map.add(e.surface, graph.node_key(e.node));
    rec.entities.push_back(graph.node_key(e.node));
  }
  const auto relations = retrieve_relations(nlq, graph, options.k_relations, *providers.relations);
  std::vector<std::string> relation_names;
  for (const auto& r : relations) relation_names.push_back(r.relation);
  rec.relations = relation_names;
  clock.lap("linking");

  const auto pool = synthesize(nlq, entities.refs(graph), relation_names, graph, options.synthesis);
  rec.pool_size = pool.size();
  rec.pool_truncated = pool.truncated;
  rec.no_candidates = pool.empty();
  clock.lap("construction");

  const auto ranked = hierarchical_rank(pool, nlq, *providers.rerank, options.n_per_parent);
  rec.demonstrations =
      select_demonstrations(ranked, options.m_demos, providers.training, providers.rerank, nlq);
  if (transform) transform(rec.demonstrations);
  clock.lap("ranking");

  if (rec.demonstrations.empty()) {
    rec.probe_count = scope.count();
    clock.lap("answering");
    return rec;
  }

  rec.prompt = build_prompt(rec.demonstrations, nlq, surfaces);
  const auto completion = providers.completion->complete(rec.prompt);
  rec.completion = completion.text;
  rec.usage = completion.usage;
  clock.lap("completion");

  try {
    const auto lf = parse_logic_form(rec.completion, entity_map);
    rec.logic_form = print_logic_form(lf);
    const auto q = to_executable(lf);
    rec.sparql = to_sparql(q, graph.type_relation());
    rec.answers = answers_from(execute(q, graph, ExecMode::Full), q.answer, graph);
  } catch (const Error& e) {
    rec.error = e.what();
    spdlog::debug("completion unusable for \"{}\": {}", nlq, e.what());
    if (!ranked.entries.empty()) {
      const auto& top = ranked.entries.front().query;
      rec.fallback = true;
      rec.answers = answers_from(execute(top, graph, ExecMode::Full), top.answer, graph);
    }
  }
  clock.lap("execution");
  rec.probe_count = scope.count();
  return rec;
}

}  // namespace targa
