#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "dret/common.hpp"
#include "dret/corpus.hpp"

namespace dret {

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;
  size_t rank = 0;  // 1-based
};

struct Posting {
  uint32_t doc = 0;  // ordinal
  uint32_t tf = 0;
};

// Okapi BM25 inverted index. Immutable once built.
struct InvertedIndex {
  std::unordered_map<std::string, std::vector<Posting>> postings;
  std::vector<uint32_t> doc_lengths;
  std::vector<std::string> doc_ids;
  std::unordered_map<std::string, uint32_t> ordinals;
  double avgdl = 0.0;
  double k1 = 1.2;
  double b = 0.75;

  size_t num_docs() const { return doc_ids.size(); }

  size_t df(const std::string& term) const {
    auto it = postings.find(term);
    return it == postings.end() ? 0 : it->second.size();
  }
};

inline InvertedIndex build_index(const std::vector<Document>& docs,
                                 double k1 = 1.2, double b = 0.75) {
  if (docs.empty()) throw InputError("cannot index an empty corpus");
  if (!(k1 > 0.0)) throw ConfigError("bm25 k1 must be > 0");
  if (b < 0.0 || b > 1.0) throw ConfigError("bm25 b must be in [0,1]");

  InvertedIndex index;
  index.k1 = k1;
  index.b = b;
  index.doc_ids.reserve(docs.size());
  index.doc_lengths.reserve(docs.size());
  uint64_t total_len = 0;
  for (const auto& doc : docs) {
    uint32_t ord = static_cast<uint32_t>(index.doc_ids.size());
    if (!index.ordinals.emplace(doc.id, ord).second)
      throw InputError("duplicate document id: " + doc.id);
    index.doc_ids.push_back(doc.id);
    index.doc_lengths.push_back(static_cast<uint32_t>(doc.tokens.size()));
    total_len += doc.tokens.size();

    std::map<std::string, uint32_t> tf;  // ordered for determinism
    for (const auto& t : doc.tokens) ++tf[t];
    for (const auto& [term, freq] : tf)
      index.postings[term].push_back({ord, freq});
  }
  index.avgdl = static_cast<double>(total_len) / static_cast<double>(docs.size());
  return index;
}

// Smoothed non-negative idf: ln(1 + (N - df + 0.5)/(df + 0.5)).
inline double idf(const InvertedIndex& index, const std::string& term) {
  double n = static_cast<double>(index.num_docs());
  double d = static_cast<double>(index.df(term));
  return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

namespace detail {

inline double bm25_term(const InvertedIndex& index, double term_idf,
                        uint32_t tf, uint32_t dl) {
  if (tf == 0) return 0.0;
  double norm = index.k1 * (1.0 - index.b +
                            index.b * static_cast<double>(dl) / index.avgdl);
  return term_idf * static_cast<double>(tf) * (index.k1 + 1.0) /
         (static_cast<double>(tf) + norm);
}

// Repeated query terms count once.
inline std::vector<std::string> distinct_sorted(
    const std::vector<std::string>& tokens) {
  std::vector<std::string> terms(tokens);
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  return terms;
}

}  // namespace detail

inline double bm25_score(const InvertedIndex& index,
                         const std::vector<std::string>& query_tokens,
                         uint32_t doc) {
  if (doc >= index.num_docs()) throw InputError("document ordinal out of range");
  double score = 0.0;
  for (const auto& term : detail::distinct_sorted(query_tokens)) {
    auto it = index.postings.find(term);
    if (it == index.postings.end()) continue;
    const auto& list = it->second;
    auto pos = std::lower_bound(list.begin(), list.end(), doc,
                                [](const Posting& p, uint32_t d) { return p.doc < d; });
    if (pos == list.end() || pos->doc != doc) continue;
    score += detail::bm25_term(index, idf(index, term), pos->tf,
                               index.doc_lengths[doc]);
  }
  return score;
}

// Top-k by score, ties broken by ascending doc id; zero-score docs excluded.
inline std::vector<ScoredDoc> bm25_search(
    const InvertedIndex& index, const std::vector<std::string>& query_tokens,
    size_t k) {
  if (k < 1) throw ConfigError("bm25_search: k must be >= 1");
  std::unordered_map<uint32_t, double> acc;
  for (const auto& term : detail::distinct_sorted(query_tokens)) {
    auto it = index.postings.find(term);
    if (it == index.postings.end()) continue;
    double term_idf = idf(index, term);
    for (const auto& p : it->second)
      acc[p.doc] += detail::bm25_term(index, term_idf, p.tf,
                                      index.doc_lengths[p.doc]);
  }
  std::vector<ScoredDoc> hits;
  hits.reserve(acc.size());
  for (const auto& [ord, score] : acc)
    if (score > 0.0) hits.push_back({index.doc_ids[ord], score, 0});
  std::sort(hits.begin(), hits.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  });
  if (hits.size() > k) hits.resize(k);
  for (size_t i = 0; i < hits.size(); ++i) hits[i].rank = i + 1;
  return hits;
}

// ---- snapshot format "DLIX1" ------------------------------------------
// magic, then little-endian u64 counts, length-prefixed strings, and
// 64-bit doubles. Loaders reject anything but this exact version.

namespace detail {

inline void put_u64(std::ostream& out, uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

inline uint64_t get_u64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  if (!in) throw InputError("truncated file");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(buf[i]) << (8 * i);
  return v;
}

inline void put_f64(std::ostream& out, double d) {
  uint64_t bits;
  static_assert(sizeof(bits) == sizeof(d));
  std::memcpy(&bits, &d, 8);
  put_u64(out, bits);
}

inline double get_f64(std::istream& in) {
  uint64_t bits = get_u64(in);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

inline void put_str(std::ostream& out, const std::string& s) {
  put_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_str(std::istream& in) {
  uint64_t n = get_u64(in);
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw InputError("truncated file");
  return s;
}

}  // namespace detail

inline void save_index(const InvertedIndex& index, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write index file: " + path);
  out.write("DLIX1", 5);
  detail::put_u64(out, index.num_docs());
  for (const auto& id : index.doc_ids) detail::put_str(out, id);
  for (uint32_t len : index.doc_lengths) detail::put_u64(out, len);
  detail::put_f64(out, index.avgdl);
  detail::put_f64(out, index.k1);
  detail::put_f64(out, index.b);
  std::vector<const std::string*> terms;
  terms.reserve(index.postings.size());
  for (const auto& [term, _] : index.postings) terms.push_back(&term);
  std::sort(terms.begin(), terms.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });
  detail::put_u64(out, terms.size());
  for (const auto* term : terms) {
    detail::put_str(out, *term);
    const auto& list = index.postings.at(*term);
    detail::put_u64(out, list.size());
    for (const auto& p : list) {
      detail::put_u64(out, p.doc);
      detail::put_u64(out, p.tf);
    }
  }
  if (!out) throw InputError("write failed: " + path);
}

inline InvertedIndex load_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open index file: " + path);
  char magic[5];
  in.read(magic, 5);
  if (!in || std::string_view(magic, 5) != "DLIX1")
    throw InputError("not a DLIX1 index file: " + path);
  InvertedIndex index;
  uint64_t n = detail::get_u64(in);
  index.doc_ids.reserve(n);
  for (uint64_t i = 0; i < n; ++i) {
    index.doc_ids.push_back(detail::get_str(in));
    index.ordinals.emplace(index.doc_ids.back(), static_cast<uint32_t>(i));
  }
  index.doc_lengths.reserve(n);
  for (uint64_t i = 0; i < n; ++i)
    index.doc_lengths.push_back(static_cast<uint32_t>(detail::get_u64(in)));
  index.avgdl = detail::get_f64(in);
  index.k1 = detail::get_f64(in);
  index.b = detail::get_f64(in);
  uint64_t nterms = detail::get_u64(in);
  for (uint64_t i = 0; i < nterms; ++i) {
    std::string term = detail::get_str(in);
    uint64_t len = detail::get_u64(in);
    auto& list = index.postings[term];
    list.reserve(len);
    for (uint64_t j = 0; j < len; ++j) {
      uint32_t doc = static_cast<uint32_t>(detail::get_u64(in));
      uint32_t tf = static_cast<uint32_t>(detail::get_u64(in));
      list.push_back({doc, tf});
    }
  }
  return index;
}

}  // namespace dret
