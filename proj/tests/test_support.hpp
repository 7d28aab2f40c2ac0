#pragma once
// Shared fixtures for the unit and acceptance tests.

#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "targa/kg_store.hpp"
#include "targa/logic_form.hpp"
#include "targa/query_graph.hpp"

namespace targa::testing {

inline std::filesystem::path fixture(const std::string& rel) {
  return std::filesystem::path(TARGA_FIXTURE_DIR) / rel;
}

inline KnowledgeGraph case_study_graph() {
  return KnowledgeGraph::load_files(fixture("case_study/triples.tsv"), fixture("case_study/labels.tsv"));
}

inline KnowledgeGraph films_graph() {
  return KnowledgeGraph::load_files(fixture("films/triples.tsv"), fixture("films/labels.tsv"));
}

inline KnowledgeGraph graph_from(const std::string& triples, const std::string& labels = "") {
  std::istringstream t(triples);
  std::istringstream l(labels);
  return KnowledgeGraph::load(t, labels.empty() ? nullptr : &l);
}

inline const char* const kCaseStudyQuestion =
    "the camera with a sensor from canon and a compression format of jpeg (exif 2.21) uses which viewfinder?";

inline const char* const kCaseStudyLogicForm =
    "triplet([jpeg ( exif 2.21 )], digicams.camera_compressed_format.cameras, ?v0)\n"
    "triplet(?v0, digicams.digital_camera.viewfinder_type, ?v1)\n"
    "triplet([canon], digicams.camera_sensor_manufacturer.cameras, ?v0)\n"
    "answer(?v1)";

inline EntityMap case_study_entities() {
  EntityMap m;
  m.add("jpeg (exif 2.21)", "m.03h4lt3");
  m.add("canon", "m.01bvx1");
  return m;
}

inline EntityRef jpeg() { return {"m.03h4lt3", "jpeg (exif 2.21)"}; }
inline EntityRef canon() { return {"m.01bvx1", "canon"}; }

/// Executable query for a logic form over the given surface map.
inline QueryGraph query_of(const std::string& lf, const EntityMap& entities) {
  return to_executable(parse_logic_form(lf, entities));
}

inline QueryGraph case_study_query56() { return query_of(kCaseStudyLogicForm, case_study_entities()); }

/// Random graph over `nodes` entities and `relations` relations. Node ids are
/// "n0".."n{nodes-1}", relation names "d.t.r0".. and every node gets a label.
struct RandomGraph {
  std::string triples;
  std::string labels;
  std::vector<std::string> relation_names;
};

inline RandomGraph random_graph(std::mt19937_64& rng, int nodes, int relations, int edges,
                                int literal_values = 0) {
  RandomGraph g;
  for (int r = 0; r < relations; ++r) g.relation_names.push_back("d.t.r" + std::to_string(r));
  std::uniform_int_distribution<int> node(0, nodes - 1);
  std::uniform_int_distribution<int> rel(0, relations - 1);
  for (int e = 0; e < edges; ++e) {
    const int s = node(rng);
    int o = node(rng);
    if (o == s) o = (o + 1) % nodes;
    g.triples += "n" + std::to_string(s) + "\t" + g.relation_names[rel(rng)] + "\tn" + std::to_string(o) + "\n";
  }
  std::uniform_int_distribution<int> value(1, 9);
  for (int e = 0; e < literal_values; ++e) {
    g.triples += "n" + std::to_string(node(rng)) + "\td.t.size\t" + std::to_string(value(rng)) + "\n";
  }
  for (int n = 0; n < nodes; ++n) g.labels += "n" + std::to_string(n) + "\tnode " + std::to_string(n) + "\n";
  return g;
}

}  // namespace targa::testing
