// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "targa/cli.hpp"
#include "targa/completion.hpp"
#include "targa/construction.hpp"
#include "targa/error.hpp"
#include "targa/eval.hpp"
#include "targa/logic_form.hpp"
#include "targa/qa_engine.hpp"
#include "targa/rerank.hpp"
#include "targa/scoring.hpp"
#include "targa/textify.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace targa;

namespace {

struct Check {
  std::vector<std::string> problems;
  std::string note;

  void expect(bool ok, const std::string& what) {
    if (!ok && problems.size() < 5) problems.push_back(what);
    if (!ok) ++failures;
  }
  std::size_t failures = 0;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class TableScorer final : public Scorer {
 public:
  explicit TableScorer(std::map<std::string, double> table, double scale = 1.0)
      : table_(std::move(table)), scale_(scale) {}
  std::vector<double> score(std::string_view, const std::vector<std::string>& docs) override {
    std::vector<double> out;
    for (const auto& d : docs) out.push_back(scale_ * table_.at(d));
    return out;
  }
  std::string name() const override { return "table"; }

 private:
  std::map<std::string, double> table_;
  double scale_;
};

struct LocalProviders {
  TrigramScorer relations;
  TokenF1Scorer rerank;
  EchoProvider echo;
  Providers get() { return {&relations, &rerank, &echo, nullptr}; }
};

const EntityLinks kCaseLinks{{"jpeg (exif 2.21)", "m.03h4lt3"}, {"canon", "m.01bvx1"}};

// 1. Synthesis equals the brute-force oracle on random graphs.
void completeness(Check& c) {
  std::mt19937_64 rng(20240601);
  using clock = std::chrono::steady_clock;
  double synth_secs = 0;
  double oracle_secs = 0;
  std::size_t total = 0;
  for (int round = 0; round < 20; ++round) {
    const int nodes = 10 + static_cast<int>(rng() % 41);
    const int relations = 2 + static_cast<int>(rng() % 9);
    const int edges = nodes + static_cast<int>(rng() % nodes);
    const auto shape = testing::random_graph(rng, nodes, relations, edges);
    const auto g = testing::graph_from(shape.triples, shape.labels);
    std::vector<EntityRef> entities;
    const int anchors = 1 + static_cast<int>(rng() % 2);
    for (int a = 0; a < anchors; ++a) {
      const auto id = "n" + std::to_string(rng() % nodes);
      if (entities.empty() || entities.front().id != id) entities.push_back({id, "node " + id.substr(1)});
    }
    SynthesisOptions opts;
    opts.decorations = false;
    const auto t0 = clock::now();
    const auto pool = synthesize("which node", entities, shape.relation_names, g, opts);
    const auto t1 = clock::now();
    const auto oracle = brute_force_enumerate(entities, shape.relation_names, g, opts.limits);
    synth_secs += std::chrono::duration<double>(t1 - t0).count();
    oracle_secs += std::chrono::duration<double>(clock::now() - t1).count();
    std::set<std::string> keys;
    for (const auto& e : pool.entries) keys.insert(e.key);
    total += keys.size();
    c.expect(!pool.truncated, "round " + std::to_string(round) + " truncated");
    c.expect(keys == oracle, "round " + std::to_string(round) + ": pool " + std::to_string(keys.size()) +
                                 " vs oracle " + std::to_string(oracle.size()));
  }
  c.expect(synth_secs < 10.0, "synthesis took " + std::to_string(synth_secs) + " s");
  std::ostringstream note;
  note << std::fixed << std::setprecision(2) << total << " queries over 20 graphs, synthesis " << synth_secs
       << " s, oracle " << oracle_secs << " s";
  c.note = note.str();
}

// 2. Every pool query, decorated or not, is non-empty when probed again.
void soundness(Check& c) {
  const auto g = testing::case_study_graph();
  const auto pool = synthesize(testing::kCaseStudyQuestion, {testing::jpeg(), testing::canon()}, g.relation_names(), g);
  for (const auto& e : pool.entries) {
    c.expect(!execute(e.query, g, ExecMode::Probe).empty(), "empty: " + e.key);
    c.expect(naive_nonempty(e.query.triples, g), "naive scan empty: " + e.key);
  }
  const auto films = testing::films_graph();
  for (const auto& item : load_dataset_file(testing::fixture("films/dataset.jsonl"))) {
    std::vector<EntityRef> refs;
    for (const auto& [surface, id] : *item.links) refs.push_back({id, surface});
    const auto p = synthesize(item.question, refs, films.relation_names(), films);
    for (const auto& e : p.entries) c.expect(!execute(e.query, films, ExecMode::Probe).empty(), "empty: " + e.key);
  }
  c.note = std::to_string(pool.size()) + " case-study queries";
}

// 3. Textification goldens.
void textify_goldens(Check& c) {
  QueryGraph mass;
  mass.triples = {{Var{0}, "measurement_unit.mass_unit.weightmass_in_kilograms", Var{1}}};
  mass.decorations = {ArgMin{1}};
  c.expect(textify(mass) ==
               "what mass_unit, mass_unit has weightmass_in_kilograms, when weightmass_in_kilograms is the smallest",
           "mass unit: " + textify(mass));

  QueryGraph rocket;
  rocket.triples = {{Var{0}, "spaceflight.rocket_engine.designed_by", EntityRef{"m.rocketdyne", "rocketdyne"}},
                    {Var{0}, "spaceflight.rocket_engine.isp_sea_level", Var{1}}};
  rocket.decorations = {Filter{1, CompareOp::LessEqual, Literal::parse("260.0")}};
  c.expect(textify(rocket) == "what rocket_engine, rocket_engine has rocketdyne, rocket_engine has isp_sea_level, "
                              "when isp_sea_level no more than 260.0",
           "rocket engine: " + textify(rocket));

  c.expect(textify(testing::case_study_query56()) ==
               "what viewfinder_type, jpeg ( exif 2.21 ) has cameras, cameras has viewfinder_type, canon has cameras",
           "query 56: " + textify(testing::case_study_query56()));
}

// 4. Case study: pool contents, ranking, prompt and answer.
void case_study(Check& c) {
  const auto g = testing::case_study_graph();
  QueryGraph q1;
  q1.triples = {{testing::jpeg(), "digicams.camera_compressed_format.cameras", Var{0}}};
  QueryGraph q2 = q1;
  q2.triples.push_back({Var{0}, "digicams.digital_camera.viewfinder_type", Var{1}});
  q2.answer = 1;
  const auto q56 = canonicalize(testing::case_study_query56());

  const auto pool = synthesize(testing::kCaseStudyQuestion, {testing::jpeg(), testing::canon()}, g.relation_names(), g);
  c.expect(pool.find(canonicalize(q1)) != nullptr, "query 1 missing");
  c.expect(pool.find(canonicalize(q2)) != nullptr, "query 2 missing");
  c.expect(pool.find(q56) != nullptr, "query 56 missing");

  TokenF1Scorer scorer;
  const auto ranked = hierarchical_rank(pool, testing::kCaseStudyQuestion, scorer, 3);
  c.expect(!ranked.entries.empty() && ranked.entries.front().key == q56, "query 56 not ranked first");

  LocalProviders p;
  const auto rec = answer_question(testing::kCaseStudyQuestion, kCaseLinks, g, EngineOptions{}, p.get());
  c.expect(rec.demonstrations.size() == 10, "demonstrations: " + std::to_string(rec.demonstrations.size()));
  c.expect(rec.prompt == slurp(testing::fixture("case_study/prompt.golden.txt")), "prompt differs from golden");
  c.expect(rec.prompt.rfind("###Question\n" + std::string(testing::kCaseStudyQuestion) + "\n###PyQL") ==
               rec.prompt.size() - std::string(testing::kCaseStudyQuestion).size() - 20,
           "prompt does not end with the question");
  c.expect(f1(rec.answers.keys(), {"m.01xrg1f", "m.01xrg6z"}) == 1.0, "echo answer F1 below 1");
  c.note = "pool " + std::to_string(rec.pool_size) + ", top-1 query 56";
}

Candidate single(int rel, std::optional<std::string> parent) {
  QueryGraph q;
  q.triples = {{EntityRef{"m.e", "e"}, "d.t.rel" + std::to_string(rel), Var{0}}};
  q.parent = std::move(parent);
  return {canonicalize(q), q};
}

// 5. Hierarchical ranking: group caps, no better member dropped, scale invariance.
void ranking(Check& c) {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 200; ++round) {
    CandidatePool pool;
    std::map<std::string, double> table;
    std::map<std::string, std::string> group_of;
    const int size = 1 + static_cast<int>(rng() % 40);
    const int parents = 1 + static_cast<int>(rng() % 5);
    for (int r = 0; r < size; ++r) {
      const int p = static_cast<int>(rng() % (parents + 1));
      auto cand = single(r, p == parents ? std::nullopt : std::optional<std::string>("P" + std::to_string(p)));
      table[textify(cand.query)] = static_cast<double>(rng() % 10) / 10.0;
      group_of[cand.key] = cand.query.parent.value_or("root");
      pool.entries.push_back(std::move(cand));
    }
    const std::size_t n = 1 + rng() % 4;
    TableScorer scorer(table);
    const auto ranked = hierarchical_rank(pool, "q", scorer, n);
    std::map<std::string, std::size_t> per_group;
    std::map<std::string, double> worst_kept;
    std::set<std::string> kept;
    for (std::size_t i = 0; i < ranked.entries.size(); ++i) {
      const auto& e = ranked.entries[i];
      const auto& grp = group_of.at(e.key);
      ++per_group[grp];
      kept.insert(e.key);
      worst_kept[grp] = worst_kept.count(grp) ? std::min(worst_kept[grp], e.score) : e.score;
      if (i) c.expect(ranked.entries[i - 1].score >= e.score, "not sorted by score");
    }
    for (const auto& [grp, count] : per_group) c.expect(count <= n, "group " + grp + " over cap");
    for (const auto& e : pool.entries) {
      if (kept.count(e.key)) continue;
      const auto& grp = group_of.at(e.key);
      c.expect(per_group[grp] == n, "dropped below cap in " + grp);
      c.expect(worst_kept[grp] >= table.at(textify(e.query)), "better member dropped in " + grp);
    }
    TableScorer scaled(table, 2.5);
    const auto again = hierarchical_rank(pool, "q", scaled, n);
    bool same = again.entries.size() == ranked.entries.size();
    for (std::size_t i = 0; same && i < again.entries.size(); ++i) same = again.entries[i].key == ranked.entries[i].key;
    c.expect(same, "order changed under positive scaling");

    const auto demos = select_demonstrations(ranked, 10);
    for (std::size_t i = 1; i < demos.size(); ++i) c.expect(demos[i - 1].score <= demos[i].score, "demos not ascending");
  }
}

LogicForm random_program(std::mt19937_64& rng, const std::vector<std::pair<std::string, std::string>>& ents,
                         const std::vector<std::string>& relations) {
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  LogicForm lf;
  int vars = 1;
  const std::size_t triples = 1 + pick(4);
  for (std::size_t i = 0; i < triples; ++i) {
    const Term anchor = Var{static_cast<int>(pick(static_cast<std::size_t>(vars)))};
    Term other;
    if (pick(3) == 0) {
      const auto& e = ents[pick(ents.size())];
      other = EntityRef{e.second, e.first};
    } else {
      other = Var{vars++};
    }
    const auto& rel = relations[pick(relations.size())];
    lf.statements.push_back(pick(2) == 0 ? Triplet{anchor, rel, other} : Triplet{other, rel, anchor});
  }
  std::vector<int> bound;
  for (const auto& s : lf.statements) {
    const auto& t = std::get<Triplet>(s);
    for (const Term* x : {&t.subject, &t.object})
      if (is_var(*x) && std::find(bound.begin(), bound.end(), var_of(*x)) == bound.end()) bound.push_back(var_of(*x));
  }
  auto some_var = [&] { return bound[pick(bound.size())]; };
  const int mod = static_cast<int>(pick(4));
  if (mod == 1) lf.statements.push_back(ArgMax{some_var()});
  if (mod == 2) lf.statements.push_back(Filter{some_var(), static_cast<CompareOp>(pick(4)),
                                               Literal::number(static_cast<double>(pick(12)))});
  if (pick(4) == 0) {
    lf.statements.push_back(Count{some_var()});
  } else {
    lf.statements.push_back(Answer{some_var()});
  }
  return lf;
}

// 6. Logic forms survive print/parse, and execute_lf agrees with execute.
void logic_forms(Check& c) {
  std::mt19937_64 rng(77);
  const auto shape = testing::random_graph(rng, 30, 5, 90, 40);
  const auto g = testing::graph_from(shape.triples, shape.labels);
  std::vector<std::pair<std::string, std::string>> ents;
  for (int n = 0; n < 30; n += 3) ents.push_back({"node " + std::to_string(n), "n" + std::to_string(n)});
  ents.push_back({"new york, ny", "n1"});
  ents.push_back({"o'neil", "n2"});
  EntityMap map;
  for (const auto& [surface, id] : ents) map.add(surface, id);
  auto relations = shape.relation_names;
  relations.push_back("d.t.size");

  std::size_t non_empty = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto lf = random_program(rng, ents, relations);
    const auto text = print_logic_form(lf);
    try {
      const auto back = parse_logic_form(text, map);
      c.expect(back == lf, "round trip changed:\n" + text);
      c.expect(print_logic_form(back) == text, "reprint changed:\n" + text);
      const auto direct = execute_lf(lf, g);
      const auto q = to_executable(lf);
      const auto via = answers_from(execute(q, g, ExecMode::Full), q.answer, g);
      c.expect(direct.keys() == via.keys(), "execution differs:\n" + text);
      non_empty += !direct.empty();
    } catch (const Error& e) {
      c.expect(false, std::string(e.what()) + ":\n" + text);
    }
  }
  c.note = "1000 programs, " + std::to_string(non_empty) + " with answers";
}

// 7. Answer F1.
void answer_f1(Check& c) {
  c.expect(f1({"a", "b"}, {"a", "b"}) == 1.0, "exact match");
  c.expect(std::abs(f1({"a"}, {"a", "b"}) - 2.0 / 3.0) < 1e-12, "partial match");
  c.expect(f1({}, {"a"}) == 0.0, "empty prediction");
  c.expect(f1({}, {}) == 1.0, "both empty");
  c.expect(f1({"113"}, {"113.0"}) == 1.0, "numeral normalization");
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::string> a, b;
    for (std::size_t k = rng() % 6; k > 0; --k) a.push_back("e" + std::to_string(rng() % 8));
    for (std::size_t k = rng() % 6; k > 0; --k) b.push_back("e" + std::to_string(rng() % 8));
    const double ab = f1(a, b);
    c.expect(ab == f1(b, a), "asymmetric");
    c.expect(ab >= 0.0 && ab <= 1.0, "out of range");
  }
}

// 8. Corruption alters exactly `level` demonstrations; level 0 equals plain eval.
void corruption(Check& c) {
  const auto g = testing::case_study_graph();
  const auto pool = synthesize(testing::kCaseStudyQuestion, {testing::jpeg(), testing::canon()}, g.relation_names(), g);
  TokenF1Scorer scorer;
  const auto demos = select_demonstrations(hierarchical_rank(pool, testing::kCaseStudyQuestion, scorer, 3), 10);
  c.expect(demos.size() == 10, "need 10 demonstrations");
  for (auto mode : {CorruptionMode::Relation, CorruptionMode::Entity}) {
    for (std::size_t level = 0; level <= demos.size(); ++level) {
      const auto out = corrupt_demonstrations(demos, level, mode, g, 1000 + level);
      std::size_t altered = 0;
      for (std::size_t i = 0; i < out.size(); ++i) {
        const bool changed = out[i].logic_form != demos[i].logic_form;
        altered += changed;
        c.expect(changed == out[i].corrupted, "corrupted flag mismatch");
      }
      c.expect(altered == level, "level " + std::to_string(level) + " altered " + std::to_string(altered));
    }
  }
  const auto films = testing::films_graph();
  const auto items = load_dataset_file(testing::fixture("films/dataset.jsonl"));
  LocalProviders p;
  BenchmarkOptions plain;
  plain.seed = 9;
  BenchmarkOptions attacked = plain;
  attacked.attack = AttackOptions{0, CorruptionMode::Entity};
  c.expect(run_benchmark(items, films, plain, p.get()).report_json().dump() ==
               run_benchmark(items, films, attacked, p.get()).report_json().dump(),
           "level 0 attack differs from eval");
}

// 9. QPQ is the store's execution-counter delta; pool size is reported.
void cost_accounting(Check& c) {
  const auto g = testing::case_study_graph();
  LocalProviders p;
  const auto before = g.execution_count();
  const auto rec = answer_question(testing::kCaseStudyQuestion, kCaseLinks, g, EngineOptions{}, p.get());
  c.expect(rec.probe_count == g.execution_count() - before, "probe count is not the counter delta");
  c.expect(rec.probe_count > 0, "no probes counted");
  c.expect(rec.to_json().contains("pool_size") && rec.pool_size > 0, "pool size missing");

  const auto films = testing::films_graph();
  const auto items = load_dataset_file(testing::fixture("films/dataset.jsonl"));
  const auto report = run_benchmark(items, films, BenchmarkOptions{}, p.get());
  double qpq = 0, pool = 0;
  for (const auto& item : report.items) {
    qpq += static_cast<double>(item.record.probe_count);
    pool += static_cast<double>(item.record.pool_size);
  }
  qpq /= static_cast<double>(report.items.size());
  pool /= static_cast<double>(report.items.size());
  c.expect(std::abs(report.mean_qpq() - qpq) < 1e-9, "mean QPQ differs from per-item counts");
  c.expect(std::abs(report.mean_pool_size() - pool) < 1e-9, "mean pool size differs");
  const auto j = report.report_json();
  c.expect(j.dump().find("pool") != std::string::npos, "report lacks pool size");
  std::ostringstream note;
  note << "case study " << rec.probe_count << " probes; films QPQ " << qpq << ", pool " << pool;
  c.note = note.str();
}

// 10. Same seed, same report.
void reproducibility(Check& c) {
  const auto dir = fs::temp_directory_path() / ("targa-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  const auto config = testing::fixture("films/config.json").string();
  const auto dataset = testing::fixture("films/dataset.jsonl").string();
  for (const char* run : {"a", "b"}) {
    std::ostringstream out, err;
    const int code = run_cli({"eval", "--config", config, "--dataset", dataset, "--out-dir", (dir / run).string()},
                             out, err);
    c.expect(code == 0, std::string("run ") + run + " exit " + std::to_string(code) + ": " + err.str());
  }
  const auto a = slurp(dir / "a/report.json");
  c.expect(!a.empty(), "no report written");
  c.expect(a == slurp(dir / "b/report.json"), "reports differ");
  const auto report = nlohmann::json::parse(a.empty() ? "{}" : a);
  if (report.contains("f1")) c.note = "F1 " + report["f1"].dump();
  fs::remove_all(dir);
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::off);
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"synthesis matches brute-force oracle on 20 random graphs", completeness},
      {"every synthesized query is non-empty", soundness},
      {"textification goldens", textify_goldens},
      {"case study pool, ranking, prompt and answer", case_study},
      {"hierarchical ranking properties", ranking},
      {"logic-form round trip and execution equivalence", logic_forms},
      {"answer F1 examples and symmetry", answer_f1},
      {"demonstration corruption levels", corruption},
      {"query cost accounting", cost_accounting},
      {"reproducible evaluation report", reproducibility},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const bool ok = c.failures == 0;
    failed += !ok;
    std::cout << (ok ? "PASS" : "FAIL") << "  criterion " << (i + 1) << ": " << criteria[i].first;
    if (!c.note.empty()) std::cout << " (" << c.note << ")";
    std::cout << "\n";
    for (const auto& p : c.problems) std::cout << "        " << p << "\n";
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
