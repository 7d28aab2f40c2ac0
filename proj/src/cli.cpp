#include "targa/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "targa/config.hpp"
#include "targa/error.hpp"
#include "targa/eval.hpp"
#include "targa/logic_form.hpp"
#include "targa/textify.hpp"

namespace targa {

namespace {

namespace fs = std::filesystem;

struct Session {
  Config config;
  KnowledgeGraph graph;
  std::unique_ptr<Scorer> similarity;
  std::unique_ptr<Scorer> reranker;
  std::unique_ptr<CompletionProvider> completion;
  std::vector<TrainingExample> training;

  Providers providers() const {
    return {similarity.get(), reranker.get(), completion.get(), training.empty() ? nullptr : &training};
  }
};

KnowledgeGraph load_graph(const Config& c) {
  if (c.triples.empty()) throw ConfigError("no triple file given (--triples or graph.triples)");
  auto opt = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<fs::path>(s); };
  return KnowledgeGraph::load_files(c.triples, opt(c.labels), opt(c.aliases), LoadOptions{c.type_relation});
}

Session open_session(const Config& c) {
  Session s{c, load_graph(c), make_similarity(c.similarity), make_reranker(c.rerank),
            make_completion(c.completion), {}};
  if (!c.training_pool.empty()) s.training = load_training_pool(c.training_pool);
  return s;
}

fs::path prepare_out_dir(const Config& c) {
  fs::path dir(c.out_dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << content;
}

std::optional<EntityLinks> parse_entity_flags(const std::vector<std::string>& flags) {
  if (flags.empty()) return std::nullopt;
  EntityLinks links;
  for (const auto& f : flags) {
    const auto eq = f.rfind('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == f.size()) {
      throw ConfigError("--entity expects surface=id, got \"" + f + "\"");
    }
    links.emplace_back(f.substr(0, eq), f.substr(eq + 1));
  }
  return links;
}

nlohmann::ordered_json candidate_json(const Candidate& c) {
  nlohmann::ordered_json j;
  j["key"] = c.key;
  j["layer"] = c.query.layer.str();
  j["parent"] = c.query.parent ? nlohmann::ordered_json(*c.query.parent) : nlohmann::ordered_json();
  j["edges"] = c.query.edge_count();
  j["decorated"] = c.query.has_decorations();
  j["question"] = textify(c.query);
  j["logic_form"] = print_logic_form(from_query(c.query));
  return j;
}

void print_answers(std::ostream& out, const AnswerRecord& rec) {
  if (rec.no_candidates) out << "no candidates\n";
  if (rec.answers.count) {
    out << "count\t" << *rec.answers.count << "\n";
    return;
  }
  for (const auto& v : rec.answers.values) out << v.id << "\t" << v.label << "\n";
  if (rec.answers.values.empty() && !rec.no_candidates) out << "(empty answer)\n";
}

void print_report(std::ostream& out, const EvalReport& report) {
  const auto f = report.mean_f1();
  out << std::fixed << std::setprecision(4);
  out << "items           " << report.items.size() << "\n";
  out << "F1              " << (f ? std::to_string(*f) : std::string("undefined (empty dataset)")) << "\n";
  out << "QPQ             " << report.mean_qpq() << "\n";
  out << "TPQ (s)         " << report.mean_tpq() << "\n";
  out << "mean pool size  " << report.mean_pool_size() << "\n";
  out << "hard failures   " << report.hard_failures() << "\n";
  const auto tags = report.per_tag();
  if (!tags.empty()) {
    out << "tag             items  F1\n";
    for (const auto& [tag, v] : tags) {
      out << std::left << std::setw(16) << tag << std::setw(7) << v.second << v.first << "\n";
    }
  }
  out.unsetf(std::ios::floatfield);
}

int write_eval(const Session& s, const EvalReport& report, std::ostream& out) {
  const auto dir = prepare_out_dir(s.config);
  write_file(dir / "report.json", report.report_json().dump(2) + "\n");
  write_file(dir / "timing.json", report.timing_json().dump(2) + "\n");
  std::string records;
  for (const auto& item : report.items) {
    auto j = item.record.to_json();
    j["f1"] = item.f1;
    records += j.dump() + "\n";
  }
  write_file(dir / "records.jsonl", records);
  print_report(out, report);
  out << "wrote " << (dir / "report.json").string() << "\n";
  return report.hard_failures() > 0 ? 1 : 0;
}

void add_common(CLI::App* cmd, std::optional<std::string>& config_file, ConfigOverrides& o) {
  cmd->add_option("--config", config_file, "JSON configuration file");
  cmd->add_option("--triples", o.triples, "triple file (TSV or N-Triples)");
  cmd->add_option("--labels", o.labels, "label file (id<TAB>label)");
  cmd->add_option("--aliases", o.aliases, "alias file (id<TAB>alias)");
  cmd->add_option("--type-relation", o.type_relation, "relation used by type constraints");
  cmd->add_option("--max-hops", o.max_hops, "longest chain from an entity (default 3)");
  cmd->add_option("--max-edges", o.max_edges, "largest query in edges (default 5)");
  cmd->add_option("--probe-budget", o.probe_budget, "probes per layer before truncation (default 5000)");
  cmd->add_option("--k-relations", o.k_relations, "candidate relations per question (default 20)");
  cmd->add_option("--n-per-parent", o.n_per_parent, "candidates kept per parent when ranking (default 3)");
  cmd->add_option("--m-demos", o.m_demos, "demonstrations per prompt (default 10)");
  cmd->add_option("--jobs", o.jobs, "questions evaluated in parallel (default 1)");
  cmd->add_option("--seed", o.seed, "seed for corruption draws");
  cmd->add_option("--out-dir", o.out_dir, "directory for output files");
  cmd->add_option("--training-pool", o.training_pool, "JSON lines of {question, logic_form} for mixed prompts");
  cmd->add_option("--similarity", o.similarity_mode, "relation retrieval scorer: local or remote");
  cmd->add_option("--rerank", o.rerank_mode, "candidate scorer: local or remote");
  cmd->add_option("--completion", o.completion_mode, "completion provider: echo or remote");
  cmd->add_option_function<std::string>(
         "--decorations",
         [&o](const std::string& v) { o.decorations = (v == "on"); },
         "decoration post-pass: on or off")
      ->check(CLI::IsMember({"on", "off"}));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"targa: question answering over knowledge graphs with synthesized demonstrations"};
  app.require_subcommand(1);
  std::optional<std::string> config_file;
  ConfigOverrides flags;
  std::string question;
  std::vector<std::string> entity_flags;
  std::string dataset;
  std::size_t level = 0;
  std::string mode = "relation";
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  auto* load_check = app.add_subcommand("load-check", "load a graph and report its size");
  auto* synth = app.add_subcommand("synthesize", "dump candidate queries and demonstrations");
  auto* answer = app.add_subcommand("answer", "answer one question");
  auto* eval = app.add_subcommand("eval", "evaluate a dataset");
  auto* attack = app.add_subcommand("attack", "evaluate with corrupted demonstrations");
  for (auto* cmd : {load_check, synth, answer, eval, attack}) add_common(cmd, config_file, flags);
  for (auto* cmd : {synth, answer}) {
    cmd->add_option("--question,-q", question, "question text");
    cmd->add_option("--entity,-e", entity_flags, "linked entity as surface=id (repeatable)");
  }
  synth->add_option("--dataset", dataset, "JSON-lines dataset instead of a single question");
  answer->get_option("--question")->required();
  eval->add_option("--dataset", dataset, "JSON-lines dataset")->required();
  attack->add_option("--dataset", dataset, "JSON-lines dataset")->required();
  attack->add_option("--level", level, "demonstrations corrupted per question")->required();
  attack->add_option("--mode", mode, "relation or entity")->check(CLI::IsMember({"relation", "entity"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    const auto config = resolve_config(config_file ? std::optional<fs::path>(*config_file) : std::nullopt, flags);

    if (*load_check) {
      const auto g = load_graph(config);
      out << "triples   " << g.triple_count() << "\n";
      out << "nodes     " << g.node_count() << "\n";
      out << "entities  " << g.entity_count() << "\n";
      out << "relations " << g.relation_count() << "\n";
      out << "indices   " << (g.indices_consistent() ? "consistent" : "INCONSISTENT") << "\n";
      return g.indices_consistent() ? 0 : 1;
    }

    const auto session = open_session(config);
    const auto& graph = session.graph;

    if (*synth) {
      std::vector<DatasetItem> items;
      if (!dataset.empty()) {
        items = load_dataset_file(dataset);
      } else if (!question.empty()) {
        items.push_back({"0", question, parse_entity_flags(entity_flags), {}, {}, {}});
      } else {
        throw ConfigError("synthesize needs --question or --dataset");
      }
      std::string pool_lines;
      std::string demo_lines;
      std::size_t total = 0;
      for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& item = items[i];
        const auto entities = link_entities(item.question, item.links, graph);
        std::vector<std::string> relations;
        for (const auto& r : retrieve_relations(item.question, graph, config.engine.k_relations, *session.similarity)) {
          relations.push_back(r.relation);
        }
        const auto pool = synthesize(item.question, entities.refs(graph), relations, graph, config.engine.synthesis);
        total += pool.size();
        for (const auto& c : pool.entries) {
          auto j = candidate_json(c);
          j["item"] = item.id;
          pool_lines += j.dump() + "\n";
        }
        const auto ranked = hierarchical_rank(pool, item.question, *session.reranker, config.engine.n_per_parent);
        const auto demos = select_demonstrations(ranked, config.engine.m_demos,
                                                 session.training.empty() ? nullptr : &session.training,
                                                 session.reranker.get(), item.question);
        for (const auto& d : demos) {
          nlohmann::ordered_json j{{"item", item.id}, {"question", d.question}, {"logic_form", d.logic_form},
                                   {"score", d.score}};
          demo_lines += j.dump() + "\n";
        }
        out << item.id << "\tcandidates " << pool.size() << (pool.truncated ? " (truncated)" : "")
            << "\tdemonstrations " << demos.size() << "\n";
      }
      const auto dir = prepare_out_dir(config);
      write_file(dir / "pool.jsonl", pool_lines);
      write_file(dir / "demos.jsonl", demo_lines);
      out << "total candidates " << total << "\n";
      return 0;
    }

    if (*answer) {
      const auto rec = answer_question(question, parse_entity_flags(entity_flags), graph, config.engine,
                                       session.providers());
      print_answers(out, rec);
      const auto dir = prepare_out_dir(config);
      write_file(dir / "record.json", rec.to_json(true).dump(2) + "\n");
      return 0;
    }

    const auto items = load_dataset_file(dataset);
    BenchmarkOptions bench{config.engine, config.jobs, config.seed, std::nullopt};
    if (*attack) bench.attack = AttackOptions{level, *parse_corruption_mode(mode)};
    const auto report = run_benchmark(items, graph, bench, session.providers());
    auto run = config.to_json();
    run["command"] = *attack ? "attack" : "eval";
    run["dataset"] = dataset;
    if (*attack) run["attack"] = {{"level", level}, {"mode", mode}};
    const int code = write_eval(session, report, out);
    write_file(prepare_out_dir(config) / "run.json", run.dump(2) + "\n");
    return code;
  } catch (const ProviderError& e) {
    err << "provider error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace targa
