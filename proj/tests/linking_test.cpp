#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "loopback_server.hpp"
#include "targa/error.hpp"
#include "targa/linking.hpp"
#include "targa/scoring.hpp"
#include "test_support.hpp"

namespace targa {
namespace {

TEST(LinkEntities, ProvidedLinksKeptInOrder) {
  const auto g = testing::case_study_graph();
  const EntityLinks links{{"canon", "m.01bvx1"}, {"jpeg (exif 2.21)", "m.03h4lt3"}};
  const auto c = link_entities(testing::kCaseStudyQuestion, links, g);
  ASSERT_EQ(c.entries.size(), 2u);
  EXPECT_EQ(c.source, EntityCandidates::Source::Dataset);
  EXPECT_EQ(c.entries[0].surface, "canon");
  EXPECT_EQ(g.node_key(c.entries[0].node), "m.01bvx1");
  EXPECT_EQ(g.node_key(c.entries[1].node), "m.03h4lt3");
  const auto refs = c.refs(g);
  EXPECT_EQ(refs[1].label, "jpeg (exif 2.21)");
}

TEST(LinkEntities, UnknownProvidedIdDropped) {
  const auto g = testing::case_study_graph();
  const EntityLinks links{{"nikon", "m.nikon"}, {"canon", "m.01bvx1"}};
  const auto c = link_entities("nikon or canon", links, g);
  ASSERT_EQ(c.entries.size(), 1u);
  EXPECT_EQ(c.entries[0].surface, "canon");
}

TEST(LinkEntities, EmptyQuestionWithoutLinks) {
  const auto g = testing::case_study_graph();
  EXPECT_TRUE(link_entities("", std::nullopt, g).empty());
}

TEST(LinkEntities, LabelScan) {
  const auto g = testing::case_study_graph();
  const auto c = link_entities("where is canon hq", std::nullopt, g);
  ASSERT_EQ(c.entries.size(), 1u);
  EXPECT_EQ(c.source, EntityCandidates::Source::LabelMatch);
  EXPECT_EQ(g.node_key(c.entries[0].node), "m.01bvx1");
}

TEST(LinkEntities, LongestMatchAndAliases) {
  const std::string triples = "m.ny\tr.x.p\tm.nyc\nm.nyc\tr.x.p\tm.y\n";
  std::istringstream t(triples);
  std::istringstream l("m.ny\tNew York\nm.nyc\tNew York City\nm.y\tYork\n");
  std::istringstream a("m.nyc\tNYC\n");
  const auto g = KnowledgeGraph::load(t, &l, &a);
  auto c = link_entities("museums in new york city", std::nullopt, g);
  ASSERT_EQ(c.entries.size(), 1u);
  EXPECT_EQ(g.node_key(c.entries[0].node), "m.nyc");
  c = link_entities("bars in nyc and york", std::nullopt, g);
  ASSERT_EQ(c.entries.size(), 2u);
  EXPECT_EQ(g.node_key(c.entries[0].node), "m.nyc");
  EXPECT_EQ(g.node_key(c.entries[1].node), "m.y");
}

TEST(RetrieveRelations, CaseStudyHead) {
  const auto g = testing::case_study_graph();
  TrigramScorer scorer;
  const auto rels = retrieve_relations(testing::kCaseStudyQuestion, g, 20, scorer);
  ASSERT_GE(rels.size(), 5u);
  EXPECT_EQ(rels[0].relation, "digicams.camera_compressed_format.cameras");
  EXPECT_EQ(rels[1].relation, "digicams.digital_camera.viewfinder_type");
  std::set<std::string> head;
  for (std::size_t i = 0; i < 5; ++i) head.insert(rels[i].relation);
  EXPECT_TRUE(head.count("digicams.digital_camera.viewfinder_type"));
  EXPECT_TRUE(head.count("digicams.camera_compressed_format.cameras"));
  EXPECT_TRUE(head.count("digicams.camera_sensor_manufacturer.cameras"));
  for (std::size_t i = 1; i < rels.size(); ++i) EXPECT_GE(rels[i - 1].score, rels[i].score);
}

TEST(RetrieveRelations, ZeroK) {
  const auto g = testing::case_study_graph();
  TrigramScorer scorer;
  EXPECT_TRUE(retrieve_relations(testing::kCaseStudyQuestion, g, 0, scorer).empty());
}

TEST(RetrieveRelations, ColorBeforeHeight) {
  const auto g = testing::graph_from("m.a\ta.b.color\tm.red\nm.a\ta.b.height\t3\n");
  TrigramScorer scorer;
  const auto rels = retrieve_relations("what color", g, 2, scorer);
  ASSERT_EQ(rels.size(), 2u);
  EXPECT_EQ(rels[0].relation, "a.b.color");
  EXPECT_GT(rels[0].score, rels[1].score);
}

TEST(RetrieveRelations, TiesBrokenByName) {
  const auto g = testing::graph_from("m.a\tz.z.zeta\tm.b\nm.a\ty.y.yotta\tm.b\n");
  TrigramScorer scorer;
  const auto rels = retrieve_relations("qqq", g, 2, scorer);
  ASSERT_EQ(rels.size(), 2u);
  EXPECT_EQ(rels[0].relation, "y.y.yotta");
}

TEST(TrigramScorer, HandComputedCosine) {
  // Query "ab" has trigrams " ab", "ab "; doc "ab" matches exactly, doc "cd" shares nothing.
  TrigramScorer scorer;
  const auto s = scorer.score("ab", {"ab", "cd"});
  EXPECT_NEAR(s[0], 1.0, 1e-12);
  EXPECT_NEAR(s[1], 0.0, 1e-12);
}

TEST(TrigramScorer, SymmetricAndSelfMaximal) {
  const std::vector<std::string> texts{"viewfinder type", "camera sensor manufacturer", "compressed format cameras",
                                       "sensor resolution", "what viewfinder does the canon camera use"};
  for (const auto& a : texts) {
    const double self = TrigramScorer::similarity(a, a);
    for (const auto& b : texts) {
      const double ab = TrigramScorer::similarity(a, b);
      EXPECT_DOUBLE_EQ(ab, TrigramScorer::similarity(b, a));
      EXPECT_GE(self + 1e-12, ab);
      EXPECT_TRUE(std::isfinite(ab));
    }
  }
}

TEST(TokenF1Scorer, FoldsPluralsAndDropsFunctionWords) {
  TokenF1Scorer scorer;
  const auto s = scorer.score("the cameras", {"camera", "the the", "camera of the"});
  EXPECT_NEAR(s[0], 1.0, 1e-12);
  EXPECT_NEAR(s[1], 0.0, 1e-12);
  EXPECT_NEAR(s[2], 1.0, 1e-12);
}

TEST(TokenF1Scorer, ClippedOverlap) {
  // Query content {red, car}; candidate {red, red, bus}: one clipped match, p = 1/3, r = 1/2.
  TokenF1Scorer scorer;
  const auto s = scorer.score("red car", {"red red bus"});
  EXPECT_NEAR(s[0], 2 * (1.0 / 3) * 0.5 / (1.0 / 3 + 0.5), 1e-12);
}

TEST(TokenF1Scorer, AnswerFocusBonus) {
  TokenF1Scorer scorer;
  const auto s = scorer.score("which viewfinder does it use", {"what viewfinder_type, x has viewfinder_type",
                                                                "what x, x has viewfinder_type"});
  EXPECT_GT(s[0], s[1]);
  const auto none = scorer.score("viewfinder", {"what viewfinder"});
  EXPECT_NEAR(none[0], 1.0, 1e-12);
}

TEST(EmbeddingScorer, CosineOfReturnedVectors) {
  testing::LoopbackServer server("/v1/embeddings", [](const nlohmann::json& body) {
    nlohmann::json data = nlohmann::json::array();
    const auto& input = body.at("input");
    for (std::size_t i = 0; i < input.size(); ++i) {
      const auto text = input[i].get<std::string>();
      const std::vector<double> v = text == "q" ? std::vector<double>{1, 0} : text == "same" ? std::vector<double>{2, 0}
                                                                                              : std::vector<double>{0, 3};
      data.push_back({{"index", i}, {"embedding", v}});
    }
    return std::make_pair(200, nlohmann::json{{"data", data}}.dump());
  });
  ::setenv("TARGA_TEST_TOKEN", "secret", 1);
  EmbeddingScorer scorer(Endpoint{server.url(), "embed-small", "TARGA_TEST_TOKEN", 5, 0});
  const auto s = scorer.score("q", {"same", "other"});
  EXPECT_NEAR(s[0], 1.0, 1e-12);
  EXPECT_NEAR(s[1], 0.0, 1e-12);
  EXPECT_EQ(server.last_authorization(), "Bearer secret");
}

TEST(CrossEncoderScorer, ResultsForm) {
  testing::LoopbackServer server("/rerank", [](const nlohmann::json& body) {
    nlohmann::json results = nlohmann::json::array();
    const auto n = body.at("documents").size();
    for (std::size_t i = 0; i < n; ++i) results.push_back({{"index", n - 1 - i}, {"relevance_score", 0.5 + i}});
    return std::make_pair(200, nlohmann::json{{"results", results}}.dump());
  });
  CrossEncoderScorer scorer(Endpoint{server.url(), "", "", 5, 0});
  const auto s = scorer.score("q", {"a", "b"});
  EXPECT_EQ(s, (std::vector<double>{1.5, 0.5}));
}

TEST(RemoteScorer, ServerErrorsRetriedThenReported) {
  testing::LoopbackServer server("/rerank", [](const nlohmann::json&) { return std::make_pair(503, std::string("{}")); });
  CrossEncoderScorer scorer(Endpoint{server.url(), "", "", 5, 2});
  try {
    scorer.score("q", {"a"});
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.endpoint(), server.url());
    EXPECT_NE(std::string(e.what()).find("503"), std::string::npos);
  }
  EXPECT_EQ(server.hits(), 3);
}

TEST(RemoteScorer, ClientErrorNotRetried) {
  testing::LoopbackServer server("/rerank", [](const nlohmann::json&) { return std::make_pair(401, std::string("{}")); });
  CrossEncoderScorer scorer(Endpoint{server.url(), "", "", 5, 2});
  EXPECT_THROW(scorer.score("q", {"a"}), ProviderError);
  EXPECT_EQ(server.hits(), 1);
}

TEST(RemoteScorer, MissingTokenVariable) {
  ::unsetenv("TARGA_TEST_MISSING");
  EmbeddingScorer scorer(Endpoint{"http://127.0.0.1:9/v1", "", "TARGA_TEST_MISSING", 1, 0});
  EXPECT_THROW(scorer.score("q", {"a"}), ProviderError);
}

}  // namespace
}  // namespace targa
