#include "targa/rerank.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "targa/logic_form.hpp"
#include "targa/textify.hpp"

namespace targa {

namespace {

bool ranks_before(const RankedCandidate& a, const RankedCandidate& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.key < b.key;
}

Demonstration demo_of(const RankedCandidate& c) {
  return Demonstration{c.text, print_logic_form(from_query(c.query)), c.query, c.score, false};
}

}  // namespace

RankedCandidates hierarchical_rank(const CandidatePool& pool, std::string_view nlq, Scorer& scorer,
                                   std::size_t n) {
  RankedCandidates out;
  out.per_parent = n;
  if (pool.empty()) return out;

  std::vector<std::string> texts;
  texts.reserve(pool.size());
  for (const auto& c : pool.entries) texts.push_back(textify(c.query));
  const auto scores = scorer.score(nlq, texts);

  std::map<std::string, std::vector<RankedCandidate>> groups;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& c = pool.entries[i];
    groups[c.query.parent.value_or("root")].push_back({c.key, c.query, texts[i], scores.at(i)});
  }
  for (auto& [parent, members] : groups) {
    std::sort(members.begin(), members.end(), ranks_before);
    if (members.size() > n) members.resize(n);
    for (auto& m : members) out.entries.push_back(std::move(m));
  }
  std::sort(out.entries.begin(), out.entries.end(), ranks_before);
  return out;
}

std::vector<Demonstration> select_demonstrations(const RankedCandidates& ranked, std::size_t m,
                                                 const std::vector<TrainingExample>* training,
                                                 Scorer* scorer, std::string_view nlq) {
  std::vector<Demonstration> chosen_training;
  std::set<std::string> taken;
  if (training != nullptr && !training->empty() && scorer != nullptr && m > 0) {
    std::vector<std::string> questions;
    for (const auto& t : *training) questions.push_back(t.question);
    const auto scores = scorer->score(nlq, questions);
    std::vector<std::size_t> order(training->size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    const std::size_t want = std::min((m + 1) / 2, order.size());
    for (std::size_t i = 0; i < want; ++i) {
      const auto& t = (*training)[order[i]];
      chosen_training.push_back({t.question, t.logic_form, std::nullopt, scores[order[i]], false});
      taken.insert(t.logic_form);
    }
  }

  std::vector<Demonstration> synthetic;
  for (const auto& c : ranked.entries) {
    if (chosen_training.size() + synthetic.size() >= m) break;
    auto d = demo_of(c);
    if (taken.count(d.logic_form)) continue;
    synthetic.push_back(std::move(d));
  }

  std::reverse(chosen_training.begin(), chosen_training.end());
  std::reverse(synthetic.begin(), synthetic.end());
  std::vector<Demonstration> out = std::move(chosen_training);
  out.insert(out.end(), std::make_move_iterator(synthetic.begin()), std::make_move_iterator(synthetic.end()));
  return out;
}

}  // namespace targa
