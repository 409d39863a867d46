#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "dret/common.hpp"
#include "dret/corpus.hpp"
#include "dret/lexindex.hpp"
#include "dret/stopwords.hpp"

namespace dret {

enum class KeywordMethod { tfidf, textrank, rake, keybert };

inline const char* to_string(KeywordMethod m) {
  switch (m) {
    case KeywordMethod::tfidf: return "tfidf";
    case KeywordMethod::textrank: return "textrank";
    case KeywordMethod::rake: return "rake";
    case KeywordMethod::keybert: return "keybert";
  }
  return "?";
}

struct KeywordList {
  std::vector<std::pair<std::string, double>> items;  // score non-increasing
  KeywordMethod method = KeywordMethod::tfidf;
  std::string source_doc;
};

// Undirected weighted co-occurrence graph over candidate tokens.
struct CooccurrenceGraph {
  std::vector<std::string> nodes;  // sorted, distinct
  // adjacency: node ordinal -> (neighbor ordinal -> weight), symmetric
  std::vector<std::map<uint32_t, double>> adj;

  size_t node_index(const std::string& t) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), t);
    if (it == nodes.end() || *it != t) throw InputError("unknown node: " + t);
    return static_cast<size_t>(it - nodes.begin());
  }
};

namespace detail {

// Keep the top V (term, score) pairs: score descending, then term ascending.
inline std::vector<std::pair<std::string, double>> top_v(
    std::vector<std::pair<std::string, double>> items, size_t v) {
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (items.size() > v) items.resize(v);
  return items;
}

}  // namespace detail

inline KeywordList tfidf_keywords(const Document& doc,
                                  const InvertedIndex& index, size_t v,
                                  const StopwordSet& stopwords) {
  if (v < 1) throw ConfigError("tfidf_keywords: V must be >= 1");
  std::map<std::string, uint32_t> tf;
  for (const auto& t : doc.tokens)
    if (!stopwords.contains(t)) ++tf[t];
  std::vector<std::pair<std::string, double>> scored;
  scored.reserve(tf.size());
  for (const auto& [term, freq] : tf)
    scored.emplace_back(term, static_cast<double>(freq) * idf(index, term));
  KeywordList out;
  out.method = KeywordMethod::tfidf;
  out.source_doc = doc.id;
  out.items = detail::top_v(std::move(scored), v);
  return out;
}

// Nodes are distinct non-stopword tokens; every candidate pair whose
// positions in the original token sequence are less than `window` apart
// gets its edge weight incremented.
inline CooccurrenceGraph build_cooccurrence_graph(const Document& doc,
                                                  size_t window,
                                                  const StopwordSet& stopwords) {
  if (window < 2) throw ConfigError("cooccurrence window must be >= 2");
  CooccurrenceGraph g;
  for (const auto& t : doc.tokens)
    if (!stopwords.contains(t)) g.nodes.push_back(t);
  std::sort(g.nodes.begin(), g.nodes.end());
  g.nodes.erase(std::unique(g.nodes.begin(), g.nodes.end()), g.nodes.end());
  g.adj.resize(g.nodes.size());

  const auto& toks = doc.tokens;
  for (size_t i = 0; i < toks.size(); ++i) {
    if (stopwords.contains(toks[i])) continue;
    size_t hi = std::min(toks.size(), i + window);
    for (size_t j = i + 1; j < hi; ++j) {
      if (stopwords.contains(toks[j]) || toks[i] == toks[j]) continue;
      uint32_t a = static_cast<uint32_t>(g.node_index(toks[i]));
      uint32_t b = static_cast<uint32_t>(g.node_index(toks[j]));
      g.adj[a][b] += 1.0;
      g.adj[b][a] += 1.0;
    }
  }
  return g;
}

// Weighted PageRank on the undirected graph, uniform start, L1 stopping
// rule. Isolated nodes only receive teleport mass; the final vector is
// renormalized so scores sum to 1 even in their presence.
inline std::vector<double> pagerank(const CooccurrenceGraph& graph,
                                    double damping = 0.85, double tol = 1e-6,
                                    size_t max_iter = 100) {
  size_t n = graph.nodes.size();
  if (n == 0) throw InputError("pagerank: empty graph");
  if (!(damping > 0.0 && damping < 1.0))
    throw ConfigError("pagerank damping must be in (0,1)");

  std::vector<double> wdeg(n, 0.0);
  bool any_edge = false;
  for (size_t u = 0; u < n; ++u)
    for (const auto& [v, w] : graph.adj[u]) {
      wdeg[u] += w;
      any_edge = true;
    }
  if (!any_edge) return std::vector<double>(n, 1.0 / static_cast<double>(n));

  std::vector<double> p(n, 1.0 / static_cast<double>(n)), next(n);
  for (size_t it = 0; it < max_iter; ++it) {
    double teleport = (1.0 - damping) / static_cast<double>(n);
    for (size_t u = 0; u < n; ++u) {
      double s = 0.0;
      for (const auto& [v, w] : graph.adj[u]) s += w / wdeg[v] * p[v];
      next[u] = teleport + damping * s;
    }
    double delta = 0.0;
    for (size_t u = 0; u < n; ++u) delta += std::fabs(next[u] - p[u]);
    p.swap(next);
    if (delta < tol) break;
  }
  double sum = 0.0;
  for (double x : p) sum += x;
  for (double& x : p) x /= sum;
  return p;
}

inline KeywordList textrank_keywords(const Document& doc, size_t v,
                                     size_t window, const StopwordSet& stopwords,
                                     double damping = 0.85, double tol = 1e-6,
                                     size_t max_iter = 100) {
  if (v < 1) throw ConfigError("textrank_keywords: V must be >= 1");
  KeywordList out;
  out.method = KeywordMethod::textrank;
  out.source_doc = doc.id;
  CooccurrenceGraph g = build_cooccurrence_graph(doc, window, stopwords);
  if (g.nodes.empty()) return out;
  std::vector<double> scores = pagerank(g, damping, tol, max_iter);
  std::vector<std::pair<std::string, double>> scored;
  for (size_t i = 0; i < g.nodes.size(); ++i)
    scored.emplace_back(g.nodes[i], scores[i]);
  out.items = detail::top_v(std::move(scored), v);
  return out;
}

// RAKE: candidate phrases are maximal stopword-free runs; word score is
// deg(w)/freq(w) with deg(w) = sum of lengths of phrase occurrences
// containing w; a phrase scores the sum of its member word scores.
inline KeywordList rake_keywords(const Document& doc, size_t v,
                                 const StopwordSet& stopwords) {
  if (v < 1) throw ConfigError("rake_keywords: V must be >= 1");
  std::vector<std::vector<std::string>> phrases;
  std::vector<std::string> cur;
  for (const auto& t : doc.tokens) {
    if (stopwords.contains(t)) {
      if (!cur.empty()) phrases.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(t);
    }
  }
  if (!cur.empty()) phrases.push_back(std::move(cur));

  std::unordered_map<std::string, double> deg, freq;
  for (const auto& phrase : phrases)
    for (const auto& w : phrase) {
      deg[w] += static_cast<double>(phrase.size());
      freq[w] += 1.0;
    }

  std::vector<std::pair<std::string, double>> scored;
  std::unordered_map<std::string, bool> seen;
  for (const auto& phrase : phrases) {
    std::string text;
    double score = 0.0;
    for (const auto& w : phrase) {
      if (!text.empty()) text.push_back(' ');
      text += w;
      score += deg[w] / freq[w];
    }
    if (seen.emplace(text, true).second) scored.emplace_back(text, score);
  }
  KeywordList out;
  out.method = KeywordMethod::rake;
  out.source_doc = doc.id;
  out.items = detail::top_v(std::move(scored), v);
  return out;
}

}  // namespace dret
