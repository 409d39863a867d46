#pragma once

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "dret/common.hpp"
#include "dret/corpus.hpp"
#include "dret/extract.hpp"
#include "dret/stopwords.hpp"

namespace dret {

inline double cosine(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.size() != v.size())
    throw InputError("cosine: vector length mismatch");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual size_t dim() const = 0;
  // Text embedding = L2-normalized mean of token vectors; empty or
  // all-unknown input gives the zero vector.
  virtual std::vector<double> embed(const std::vector<std::string>& tokens) const = 0;
};

// Deterministic stand-in for a neural encoder: each token maps to a unit
// vector drawn from a stream keyed by (seed, token string).
class HashEmbedder : public Embedder {
 public:
  explicit HashEmbedder(size_t dim = 64, uint64_t seed = 7)
      : dim_(dim), seed_(seed) {
    if (dim_ < 1) throw ConfigError("embedder dim must be >= 1");
  }

  size_t dim() const override { return dim_; }

  std::vector<double> token_vector(const std::string& token) const {
    Rng rng(seed_, token);
    std::vector<double> v(dim_);
    double norm = 0.0;
    for (double& x : v) {
      x = rng.next_double(-1.0, 1.0);
      norm += x * x;
    }
    norm = std::sqrt(norm);
    if (norm > 0.0)
      for (double& x : v) x /= norm;
    return v;
  }

  std::vector<double> embed(const std::vector<std::string>& tokens) const override {
    std::vector<double> sum(dim_, 0.0);
    for (const auto& t : tokens) {
      auto v = token_vector(t);
      for (size_t i = 0; i < dim_; ++i) sum[i] += v[i];
    }
    normalize(sum);
    return sum;
  }

 private:
  static void normalize(std::vector<double>& v) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0.0)
      for (double& x : v) x /= norm;
  }

  size_t dim_;
  uint64_t seed_;
};

// Backend over a precomputed table: token TAB space-separated floats.
// Dimension is inferred from the first line; unknown tokens are skipped.
class TsvEmbedder : public Embedder {
 public:
  explicit TsvEmbedder(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open embedding file: " + path);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      size_t tab = line.find('\t');
      if (tab == std::string::npos)
        throw InputError(path + ":" + std::to_string(lineno) +
                         ": expected token TAB floats");
      std::string token = line.substr(0, tab);
      std::istringstream rest(line.substr(tab + 1));
      std::vector<double> v;
      double x;
      while (rest >> x) v.push_back(x);
      if (dim_ == 0) dim_ = v.size();
      if (v.size() != dim_ || dim_ == 0)
        throw InputError(path + ":" + std::to_string(lineno) +
                         ": dimension mismatch");
      table_.emplace(std::move(token), std::move(v));
    }
    if (table_.empty()) throw InputError("empty embedding file: " + path);
  }

  size_t dim() const override { return dim_; }

  std::vector<double> embed(const std::vector<std::string>& tokens) const override {
    std::vector<double> sum(dim_, 0.0);
    for (const auto& t : tokens) {
      auto it = table_.find(t);
      if (it == table_.end()) continue;
      for (size_t i = 0; i < dim_; ++i) sum[i] += it->second[i];
    }
    double norm = 0.0;
    for (double x : sum) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0.0)
      for (double& x : sum) x /= norm;
    return sum;
  }

 private:
  size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> table_;
};

// KeyBERT-style extraction: candidates are contiguous n-grams inside
// stopword-free runs, scored by cosine to the whole-document embedding.
inline KeywordList embed_keywords(const Document& doc, size_t v,
                                  size_t ngram_max, const Embedder& embedder,
                                  const StopwordSet& stopwords) {
  if (v < 1) throw ConfigError("embed_keywords: V must be >= 1");
  if (ngram_max < 1) throw ConfigError("embed_keywords: ngram_max must be >= 1");
  KeywordList out;
  out.method = KeywordMethod::keybert;
  out.source_doc = doc.id;
  if (doc.tokens.empty()) return out;

  std::vector<std::vector<std::string>> runs;
  std::vector<std::string> cur;
  for (const auto& t : doc.tokens) {
    if (stopwords.contains(t)) {
      if (!cur.empty()) runs.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(t);
    }
  }
  if (!cur.empty()) runs.push_back(std::move(cur));

  std::vector<double> doc_vec = embedder.embed(doc.tokens);
  std::vector<std::pair<std::string, double>> scored;
  std::unordered_map<std::string, bool> seen;
  for (const auto& run : runs)
    for (size_t n = 1; n <= ngram_max; ++n)
      for (size_t i = 0; i + n <= run.size(); ++i) {
        std::vector<std::string> gram(run.begin() + i, run.begin() + i + n);
        std::string text;
        for (const auto& t : gram) {
          if (!text.empty()) text.push_back(' ');
          text += t;
        }
        if (!seen.emplace(text, true).second) continue;
        scored.emplace_back(text, cosine(embedder.embed(gram), doc_vec));
      }
  out.items = detail::top_v(std::move(scored), v);
  return out;
}

}  // namespace dret
