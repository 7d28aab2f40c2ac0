#pragma once
// Candidate query synthesis: layer-wise expansion from single-triple seeds,
// cross-layer combination at shared variables, and a decoration post-pass.
//
// Every structure is probed against the graph before it is kept, and probe
// results are cached by structure key, so each distinct structure costs at
// most one execution. The probe log records every execution the synthesizer
// performs.

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "targa/kg_store.hpp"
#include "targa/query_graph.hpp"

namespace targa {

struct Limits {
  int max_hops = 3;
  int max_edges = 5;
  /// Probes allowed per layer (and per combination size) before truncation.
  std::size_t probe_budget = 5000;
  /// Row cap for the value sets used to pre-filter combinations.
  std::size_t value_cap = kDefaultRowCap;

  /// Throws ConfigError unless 1 <= max_hops <= max_edges.
  void check() const;
};

struct ProbeRecord {
  std::string key;
  /// "L1", "L2", ... for expansion, "C2" ... "C5" for combination by edge
  /// count, "decorate", or "values" for full executions behind value sets.
  std::string stage;
  /// Structure keys this probe was derived from; empty for seeds.
  std::vector<std::string> sources;
  bool valid = false;
  ExecMode mode = ExecMode::Probe;
};

struct Candidate {
  std::string key;
  QueryGraph query;
};

struct CandidatePool {
  std::vector<Candidate> entries;
  std::vector<ProbeRecord> probe_log;
  bool truncated = false;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  const Candidate* find(std::string_view key) const;
  /// Entry counts per layer tag; decorated entries are counted under "decorated".
  std::map<std::string, std::size_t> stats() const;
  /// Keys of entries without decorations.
  std::set<std::string> structure_keys() const;
};

struct SynthesisOptions {
  Limits limits;
  bool decorations = true;
};

/// Single-triple seeds in both orientations, each kept iff its probe is
/// non-empty. Returned queries are normalized and tagged L1.
std::vector<QueryGraph> build_layer1(const std::vector<EntityRef>& entities,
                                     const std::vector<std::string>& relations,
                                     const KnowledgeGraph& graph);

/// Adds one edge to a fresh variable at every variable of every query in
/// `prev`. Each valid child appears with the new variable as answer and with
/// the inherited answer. A child's parent is the smallest-key query it was
/// derived from.
std::vector<QueryGraph> expand_layer(const std::vector<QueryGraph>& prev,
                                     const std::vector<std::string>& relations,
                                     const KnowledgeGraph& graph, const Limits& limits);

/// Combinations of the expansion-layer queries in `pool`, smallest first,
/// with every answer placement of every valid merged structure.
std::vector<QueryGraph> combine(const std::vector<QueryGraph>& pool, const KnowledgeGraph& graph,
                                const Limits& limits);

/// Superlative, comparison and count variants of `q` that execute non-empty.
std::vector<QueryGraph> decorate(const QueryGraph& q, std::string_view nlq,
                                 const KnowledgeGraph& graph);

CandidatePool synthesize(std::string_view nlq, const std::vector<EntityRef>& entities,
                         const std::vector<std::string>& relations, const KnowledgeGraph& graph,
                         const SynthesisOptions& options = {});

}  // namespace targa
