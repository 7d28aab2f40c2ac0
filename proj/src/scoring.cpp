#include "targa/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <map>
#include <set>
#include <unordered_map>

#include "targa/error.hpp"
#include "targa/text.hpp"

namespace targa {

namespace {

using TermCounts = std::map<std::string, double>;

const std::set<std::string, std::less<>> kFunctionWords = {
    "a",    "an",    "and",  "are",  "as",   "at",    "be",   "by",   "did",   "do",
    "does", "for",   "from", "had",  "has",  "have",  "how",  "in",   "is",    "it",
    "its",  "many",  "much", "of",   "on",   "or",    "that", "the",  "these", "this",
    "those", "to",   "use",  "uses", "was",  "were",  "what", "when", "where", "which",
    "who",  "whom",  "whose", "with"};

const std::set<std::string, std::less<>> kWhWords = {"what", "which", "who",  "whom",
                                                     "whose", "where", "when", "how"};

std::string fold_plural(std::string t) {
  if (t.size() > 3 && t.back() == 's' && t[t.size() - 2] != 's') t.pop_back();
  return t;
}

std::vector<std::string> content_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : text::scoring_tokens(text))
    if (!kFunctionWords.count(t)) out.push_back(fold_plural(std::move(t)));
  return out;
}

std::optional<std::string> query_focus(std::string_view text) {
  const auto toks = text::scoring_tokens(text);
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (!kWhWords.count(toks[i])) continue;
    for (std::size_t j = i + 1; j < toks.size(); ++j)
      if (!kFunctionWords.count(toks[j])) return fold_plural(toks[j]);
    return std::nullopt;
  }
  return std::nullopt;
}

TermCounts trigrams(std::string_view text) {
  TermCounts out;
  for (const auto& tok : text::tokenize(text, true)) {
    if (!text::is_word_token(tok)) continue;
    const std::string padded = " " + tok + " ";
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) out[padded.substr(i, 3)] += 1.0;
  }
  return out;
}

std::vector<double> tfidf_cosines(const TermCounts& query, const std::vector<TermCounts>& docs,
                                  const std::vector<TermCounts>& fit) {
  std::unordered_map<std::string, double> df;
  for (const auto& d : fit) {
    for (const auto& [term, n] : d) df[term] += 1.0;
  }
  const double total = static_cast<double>(fit.size());
  auto idf = [&](const std::string& term) {
    auto it = df.find(term);
    const double f = it == df.end() ? 0.0 : it->second;
    return std::log((1.0 + total) / (1.0 + f)) + 1.0;
  };
  auto weigh = [&](const TermCounts& tc) {
    TermCounts w;
    double norm = 0;
    for (const auto& [term, n] : tc) {
      const double v = n * idf(term);
      w[term] = v;
      norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm > 0) {
      for (auto& [term, v] : w) v /= norm;
    }
    return w;
  };
  const auto q = weigh(query);
  std::vector<double> out;
  out.reserve(docs.size());
  for (const auto& d : docs) {
    const auto w = weigh(d);
    double dot = 0;
    for (const auto& [term, v] : q) {
      if (auto it = w.find(term); it != w.end()) dot += v * it->second;
    }
    out.push_back(dot);
  }
  return out;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ProviderError("embedding dimensions differ", "");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / std::sqrt(na * nb);
}

}  // namespace

std::vector<double> TrigramScorer::score(std::string_view query, const std::vector<std::string>& documents) {
  std::vector<TermCounts> docs;
  docs.reserve(documents.size());
  for (const auto& d : documents) docs.push_back(trigrams(d));
  return tfidf_cosines(trigrams(query), docs, docs);
}

double TrigramScorer::similarity(std::string_view a, std::string_view b) {
  const auto ta = trigrams(a);
  const auto tb = trigrams(b);
  return tfidf_cosines(ta, {tb}, {ta, tb}).front();
}

std::vector<double> TokenF1Scorer::score(std::string_view query, const std::vector<std::string>& documents) {
  const auto q = content_tokens(query);
  const auto focus = query_focus(query);
  std::map<std::string, std::size_t> qcounts;
  for (const auto& t : q) ++qcounts[t];
  std::vector<double> out;
  out.reserve(documents.size());
  for (const auto& doc : documents) {
    const auto c = content_tokens(doc);
    double f1 = 0.0;
    if (!c.empty() && !q.empty()) {
      std::map<std::string, std::size_t> ccounts;
      for (const auto& t : c) ++ccounts[t];
      std::size_t common = 0;
      for (const auto& [t, n] : ccounts) {
        const auto it = qcounts.find(t);
        if (it != qcounts.end()) common += std::min(n, it->second);
      }
      const double p = static_cast<double>(common) / static_cast<double>(c.size());
      const double r = static_cast<double>(common) / static_cast<double>(q.size());
      f1 = common > 0 ? 2 * p * r / (p + r) : 0.0;
    }
    if (focus) {
      const auto head = content_tokens(std::string_view(doc).substr(0, doc.find(',')));
      if (std::find(head.begin(), head.end(), *focus) != head.end()) f1 += focus_weight;
    }
    out.push_back(f1);
  }
  return out;
}

std::vector<double> EmbeddingScorer::score(std::string_view query, const std::vector<std::string>& documents) {
  if (documents.empty()) return {};
  nlohmann::json input = nlohmann::json::array();
  input.push_back(std::string(query));
  for (const auto& d : documents) input.push_back(d);
  nlohmann::json body{{"input", input}};
  if (!endpoint_.model.empty()) body["model"] = endpoint_.model;
  const auto res = post_json(endpoint_, body);
  std::vector<std::vector<double>> vectors(input.size());
  try {
    const auto& data = res.at("data");
    if (data.size() != input.size()) throw ProviderError("embedding count mismatch", endpoint_.url);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto idx = data[i].value("index", i);
      if (idx >= vectors.size()) throw ProviderError("embedding index out of range", endpoint_.url);
      vectors[idx] = data[i].at("embedding").get<std::vector<double>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(std::string("unexpected embedding response: ") + e.what(), endpoint_.url);
  }
  std::vector<double> out;
  for (std::size_t i = 1; i < vectors.size(); ++i) out.push_back(cosine(vectors[0], vectors[i]));
  return out;
}

std::vector<double> CrossEncoderScorer::score(std::string_view query, const std::vector<std::string>& documents) {
  if (documents.empty()) return {};
  nlohmann::json body{{"query", std::string(query)}, {"documents", documents}};
  if (!endpoint_.model.empty()) body["model"] = endpoint_.model;
  const auto res = post_json(endpoint_, body);
  std::vector<double> out(documents.size(), 0.0);
  try {
    if (res.contains("scores")) {
      out = res.at("scores").get<std::vector<double>>();
    } else {
      std::vector<bool> seen(documents.size(), false);
      for (const auto& r : res.at("results")) {
        const auto idx = r.at("index").get<std::size_t>();
        if (idx >= out.size()) throw ProviderError("result index out of range", endpoint_.url);
        out[idx] = r.at("relevance_score").get<double>();
        seen[idx] = true;
      }
      for (bool s : seen) {
        if (!s) throw ProviderError("missing scores in rerank response", endpoint_.url);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(std::string("unexpected rerank response: ") + e.what(), endpoint_.url);
  }
  if (out.size() != documents.size()) throw ProviderError("score count mismatch", endpoint_.url);
  for (double s : out) {
    if (!std::isfinite(s)) throw ProviderError("non-finite score", endpoint_.url);
  }
  return out;
}

}  // namespace targa
