#include <gtest/gtest.h>

#include <limits>
#include <map>
#include <random>

#include "targa/construction.hpp"
#include "targa/rerank.hpp"
#include "targa/scoring.hpp"
#include "targa/textify.hpp"
#include "test_support.hpp"

namespace targa {
namespace {

// Scores fixed per document text, optionally scaled.
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

Candidate single(int rel, std::optional<std::string> parent) {
  QueryGraph q;
  q.triples = {{EntityRef{"m.e", "e"}, "d.t.rel" + std::to_string(rel), Var{0}}};
  q.parent = std::move(parent);
  return {canonicalize(q), q};
}

TEST(HierarchicalRank, HandComputedGroups) {
  // Seven queries: parent "A" holds relations 0-3, parent "B" holds 4-5, relation 6 is a root.
  CandidatePool pool;
  for (int r = 0; r < 7; ++r) pool.entries.push_back(single(r, r < 4 ? std::optional<std::string>("A") : r < 6 ? std::optional<std::string>("B") : std::nullopt));
  // Token F1 against "rel0 rel1 rel4": exact-token hits only on rel0, rel1, rel4.
  TokenF1Scorer scorer;
  const auto ranked = hierarchical_rank(pool, "rel0 rel1 rel4", scorer, 2);
  std::set<std::string> kept;
  for (const auto& c : ranked.entries) kept.insert(c.key);
  // Group A keeps rel0 and rel1; group B keeps rel4 and rel5; the root keeps rel6.
  EXPECT_EQ(kept, (std::set<std::string>{pool.entries[0].key, pool.entries[1].key, pool.entries[4].key,
                                         pool.entries[5].key, pool.entries[6].key}));
  EXPECT_EQ(ranked.entries.size(), 5u);
  EXPECT_EQ(ranked.per_parent, 2u);
}

TEST(HierarchicalRank, UnboundedKeepsWholePoolSorted) {
  const auto g = testing::case_study_graph();
  const std::vector<std::string> rels{"digicams.camera_compressed_format.cameras", "digicams.digital_camera.viewfinder_type",
                                      "digicams.camera_sensor_manufacturer.cameras"};
  const auto pool = synthesize(testing::kCaseStudyQuestion, {testing::jpeg(), testing::canon()}, rels, g);
  TokenF1Scorer scorer;
  const auto ranked = hierarchical_rank(pool, testing::kCaseStudyQuestion, scorer, std::numeric_limits<std::size_t>::max());
  ASSERT_EQ(ranked.entries.size(), pool.size());
  for (std::size_t i = 1; i < ranked.entries.size(); ++i) {
    const auto& a = ranked.entries[i - 1];
    const auto& b = ranked.entries[i];
    EXPECT_TRUE(a.score > b.score || (a.score == b.score && a.key < b.key));
  }
}

TEST(HierarchicalRank, CaseStudyTopTwo) {
  const auto g = testing::case_study_graph();
  TrigramScorer relations;
  std::vector<std::string> rels;
  for (const auto& r : g.relation_names()) rels.push_back(r);
  const auto pool = synthesize(testing::kCaseStudyQuestion, {testing::jpeg(), testing::canon()}, rels, g);
  TokenF1Scorer scorer;
  const auto ranked = hierarchical_rank(pool, testing::kCaseStudyQuestion, scorer, 3);
  ASSERT_GE(ranked.entries.size(), 2u);
  EXPECT_EQ(ranked.entries[0].key, canonicalize(testing::case_study_query56()));
  auto variant = testing::case_study_query56();
  variant.triples[2].relation = "digicams.digital_camera_manufacturer.cameras";
  EXPECT_EQ(ranked.entries[1].key, canonicalize(variant));
  EXPECT_EQ(ranked.entries[0].text, ranked.entries[1].text);
}

TEST(HierarchicalRank, RandomizedProperties) {
  std::mt19937_64 rng(5);
  for (int round = 0; round < 50; ++round) {
    CandidatePool pool;
    std::map<std::string, double> table;
    const int size = 1 + static_cast<int>(rng() % 40);
    const int parents = 1 + static_cast<int>(rng() % 5);
    std::map<std::string, std::string> parent_of;
    for (int r = 0; r < size; ++r) {
      const int p = static_cast<int>(rng() % (parents + 1));
      auto c = single(r, p == parents ? std::nullopt : std::optional<std::string>("P" + std::to_string(p)));
      table[textify(c.query)] = static_cast<double>(rng() % 10) / 10.0;
      parent_of[c.key] = c.query.parent.value_or("root");
      pool.entries.push_back(std::move(c));
    }
    const std::size_t n = 1 + rng() % 4;
    TableScorer scorer(table);
    const auto ranked = hierarchical_rank(pool, "q", scorer, n);

    std::map<std::string, std::size_t> per_group;
    std::map<std::string, double> min_kept;
    std::set<std::string> kept;
    for (const auto& c : ranked.entries) {
      const auto& grp = parent_of.at(c.key);
      ++per_group[grp];
      kept.insert(c.key);
      min_kept[grp] = min_kept.count(grp) ? std::min(min_kept[grp], c.score) : c.score;
    }
    for (const auto& [grp, count] : per_group) EXPECT_LE(count, n);
    for (const auto& c : pool.entries) {
      if (kept.count(c.key)) continue;
      const auto& grp = parent_of.at(c.key);
      EXPECT_EQ(per_group[grp], n) << "a group dropped members while below n";
      EXPECT_GE(min_kept[grp], table.at(textify(c.query)));
    }

    TableScorer scaled(table, 3.5);
    const auto again = hierarchical_rank(pool, "q", scaled, n);
    ASSERT_EQ(again.entries.size(), ranked.entries.size());
    for (std::size_t i = 0; i < again.entries.size(); ++i) EXPECT_EQ(again.entries[i].key, ranked.entries[i].key);
  }
}

RankedCandidates ranked_of(int count) {
  RankedCandidates r;
  for (int i = 0; i < count; ++i) {
    auto c = single(i, std::nullopt);
    r.entries.push_back({c.key, c.query, textify(c.query), 1.0 - 0.1 * i});
  }
  return r;
}

TEST(SelectDemonstrations, BestLastAndTruncation) {
  const auto ranked = ranked_of(12);
  const auto demos = select_demonstrations(ranked, 10);
  ASSERT_EQ(demos.size(), 10u);
  EXPECT_EQ(demos.back().question, ranked.entries[0].text);
  for (std::size_t i = 1; i < demos.size(); ++i) EXPECT_LE(demos[i - 1].score, demos[i].score);
  for (const auto& d : demos) ASSERT_TRUE(d.query);

  const auto one = select_demonstrations(ranked, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].question, ranked.entries[0].text);

  EXPECT_EQ(select_demonstrations(ranked_of(4), 10).size(), 4u);
  EXPECT_TRUE(select_demonstrations(ranked_of(4), 0).empty());
}

TEST(SelectDemonstrations, TrainingExamplesFirst) {
  const auto ranked = ranked_of(6);
  const std::vector<TrainingExample> training{
      {"what rel3 does e have", "triplet([e], d.t.rel3, ?v0)\nanswer(?v0)"},
      {"unrelated words", "triplet([x], d.t.other, ?v0)\nanswer(?v0)"},
      {"what rel0 of e", print_logic_form(from_query(ranked.entries[0].query))}};
  TokenF1Scorer scorer;
  const auto demos = select_demonstrations(ranked, 4, &training, &scorer, "what rel0 of e");
  ASSERT_EQ(demos.size(), 4u);
  EXPECT_FALSE(demos[0].query);
  EXPECT_FALSE(demos[1].query);
  EXPECT_EQ(demos[1].question, "what rel0 of e");
  EXPECT_TRUE(demos[2].query);
  // The top synthetic candidate duplicates a chosen training logic form and is skipped.
  for (std::size_t i = 2; i < demos.size(); ++i) EXPECT_NE(demos[i].logic_form, training[2].logic_form);
  EXPECT_EQ(demos.back().question, ranked.entries[1].text);
}

}  // namespace
}  // namespace targa
