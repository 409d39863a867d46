#pragma once

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "dret/common.hpp"
#include "dret/corpus.hpp"
#include "dret/extract.hpp"
#include "dret/lexindex.hpp"

namespace dret {

enum class PosMethod { pseudo_label, tfidf, textrank, rake, keybert };
enum class NegMethod { random, bm25 };
enum class Bm25NegMode { after_top, tail };

inline const char* to_string(PosMethod m) {
  switch (m) {
    case PosMethod::pseudo_label: return "pseudo_label";
    case PosMethod::tfidf: return "tfidf";
    case PosMethod::textrank: return "textrank";
    case PosMethod::rake: return "rake";
    case PosMethod::keybert: return "keybert";
  }
  return "?";
}

inline const char* to_string(NegMethod m) {
  return m == NegMethod::random ? "random" : "bm25";
}

inline PosMethod pos_method_from_string(const std::string& s) {
  if (s == "pseudo_label") return PosMethod::pseudo_label;
  if (s == "tfidf") return PosMethod::tfidf;
  if (s == "textrank") return PosMethod::textrank;
  if (s == "rake") return PosMethod::rake;
  if (s == "keybert") return PosMethod::keybert;
  throw ConfigError("unknown positive sampling method: " + s);
}

inline NegMethod neg_method_from_string(const std::string& s) {
  if (s == "random") return NegMethod::random;
  if (s == "bm25") return NegMethod::bm25;
  throw ConfigError("unknown negative sampling method: " + s);
}

struct SamplerConfig {
  size_t U = 5;  // pseudo-label depth
  size_t V = 5;  // keywords per synthetic query
  size_t m = 7;  // negatives per instance
  PosMethod pos_method = PosMethod::textrank;
  NegMethod neg_method = NegMethod::random;
  Bm25NegMode bm25_neg_mode = Bm25NegMode::after_top;
  uint64_t seed = 1;

  void validate() const {
    if (U < 1 || V < 1 || m < 1)
      throw ConfigError("sampler: U, V and m must all be >= 1");
  }
};

struct Provenance {
  std::string pos_method;
  std::string neg_method;
  std::string source;  // query id (pseudo-label) or doc id (PRF/keywords)

  bool operator==(const Provenance&) const = default;
};

struct TrainingInstance {
  std::vector<std::string> query_tokens;
  std::string positive_doc;
  std::vector<std::string> negative_docs;
  Provenance provenance;
  size_t m = 0;          // requested negative count
  bool short_set = false;  // fewer than m negatives were available

  bool operator==(const TrainingInstance&) const = default;
};

struct PositivePair {
  std::vector<std::string> query_tokens;
  std::string doc_id;
  std::string source;  // query id or doc id
};

// One positive pair per (query, top-U retrieved doc); queries whose
// retrieval comes back empty are skipped.
inline std::vector<PositivePair> pseudo_label_positives(
    const std::vector<Query>& queries,
    const std::function<std::vector<ScoredDoc>(const Query&)>& retriever,
    size_t u) {
  if (u < 1) throw ConfigError("pseudo_label_positives: U must be >= 1");
  std::vector<PositivePair> pairs;
  for (const auto& q : queries) {
    auto hits = retriever(q);
    for (size_t i = 0; i < hits.size() && i < u; ++i)
      pairs.push_back({q.tokens, hits[i].doc_id, q.id});
  }
  return pairs;
}

// One pair per document: synthetic query = flattened keyword terms in
// score order, truncated to query_max_tokens. Documents with an empty
// extraction are skipped; *skipped counts them when non-null.
inline std::vector<PositivePair> prf_positives(
    const std::vector<Document>& docs,
    const std::function<KeywordList(const Document&)>& extractor,
    size_t query_max_tokens, size_t* skipped = nullptr) {
  std::vector<PositivePair> pairs;
  if (skipped) *skipped = 0;
  for (const auto& doc : docs) {
    KeywordList kw = extractor(doc);
    std::vector<std::string> tokens;
    for (const auto& [text, score] : kw.items) {
      // a multi-token phrase flattens to its tokens in order
      for (const auto& t : tokenize(text, query_max_tokens))
        if (tokens.size() < query_max_tokens) tokens.push_back(t);
      if (tokens.size() >= query_max_tokens) break;
    }
    if (tokens.empty()) {
      if (skipped) ++*skipped;
      continue;
    }
    pairs.push_back({std::move(tokens), doc.id, doc.id});
  }
  return pairs;
}

// m distinct ids drawn without replacement from corpus_ids \ exclude.
// The RNG is keyed by (seed, instance_key) so the draw does not depend
// on generation order. Short draws return everything available and set
// *short_set.
inline std::vector<std::string> random_negatives(
    const std::vector<std::string>& corpus_ids, size_t m,
    const std::set<std::string>& exclude, uint64_t seed,
    const std::string& instance_key, bool* short_set = nullptr) {
  std::vector<std::string> pool;
  pool.reserve(corpus_ids.size());
  for (const auto& id : corpus_ids)
    if (!exclude.count(id)) pool.push_back(id);
  std::sort(pool.begin(), pool.end());
  if (pool.empty()) throw InputError("random_negatives: no candidates left");

  Rng rng(seed, instance_key);
  rng.shuffle(pool);
  if (short_set) *short_set = pool.size() < m;
  if (pool.size() > m) pool.resize(m);
  return pool;
}

// BM25 hard negatives: retrieve deep, drop excluded ids, then slice.
// after_top takes the m ranks just below the assumed-relevant top-U;
// tail takes the last m of the retrieved list. Short slices are padded
// with random negatives.
inline std::vector<std::string> bm25_negatives(
    const InvertedIndex& index, const std::vector<std::string>& query_tokens,
    size_t m, const std::set<std::string>& exclude, Bm25NegMode mode, size_t u,
    const std::vector<std::string>& corpus_ids, uint64_t seed,
    const std::string& instance_key, bool* short_set = nullptr) {
  size_t depth = std::max<size_t>(1000, u + m);
  std::vector<ScoredDoc> hits = bm25_search(index, query_tokens, depth);
  std::vector<std::string> filtered;
  for (const auto& h : hits)
    if (!exclude.count(h.doc_id)) filtered.push_back(h.doc_id);

  std::vector<std::string> negs;
  if (mode == Bm25NegMode::after_top) {
    for (size_t i = u; i < filtered.size() && negs.size() < m; ++i)
      negs.push_back(filtered[i]);
  } else {
    size_t start = filtered.size() > m ? filtered.size() - m : 0;
    for (size_t i = start; i < filtered.size(); ++i) negs.push_back(filtered[i]);
  }
  if (short_set) *short_set = false;
  if (negs.size() < m) {
    std::set<std::string> used(exclude);
    used.insert(negs.begin(), negs.end());
    bool pad_short = false;
    auto pad = random_negatives(corpus_ids, m - negs.size(), used, seed,
                                instance_key, &pad_short);
    negs.insert(negs.end(), pad.begin(), pad.end());
    if (short_set) *short_set = true;
  }
  return negs;
}

// One TrainingInstance per positive pair, in input order. The positive
// document is always excluded from its own negatives.
inline std::vector<TrainingInstance> assemble_dataset(
    const std::vector<PositivePair>& positives, const SamplerConfig& config,
    const InvertedIndex& index, const std::vector<std::string>& corpus_ids) {
  config.validate();
  if (positives.empty()) throw InputError("assemble_dataset: no positive pairs");
  std::vector<TrainingInstance> instances;
  instances.reserve(positives.size());
  for (const auto& pos : positives) {
    TrainingInstance inst;
    inst.query_tokens = pos.query_tokens;
    inst.positive_doc = pos.doc_id;
    inst.provenance = {to_string(config.pos_method),
                       to_string(config.neg_method), pos.source};
    inst.m = config.m;
    std::set<std::string> exclude{pos.doc_id};
    std::string key = pos.source + "|" + pos.doc_id;
    if (config.neg_method == NegMethod::random) {
      inst.negative_docs = random_negatives(corpus_ids, config.m, exclude,
                                            config.seed, key, &inst.short_set);
    } else {
      inst.negative_docs = bm25_negatives(
          index, pos.query_tokens, config.m, exclude, config.bm25_neg_mode,
          config.U, corpus_ids, config.seed, key, &inst.short_set);
    }
    instances.push_back(std::move(inst));
  }
  return instances;
}

// ---- pair file: JSONL, one instance per line ---------------------------

inline void serialize_pairs(const std::vector<TrainingInstance>& instances,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write pair file: " + path);
  for (const auto& inst : instances) {
    nlohmann::json obj{
        {"query", inst.query_tokens},
        {"positive", inst.positive_doc},
        {"negatives", inst.negative_docs},
        {"provenance",
         {{"pos_method", inst.provenance.pos_method},
          {"neg_method", inst.provenance.neg_method},
          {"source", inst.provenance.source}}},
        {"m", inst.m},
    };
    if (inst.short_set) obj["short"] = true;
    out << obj.dump() << "\n";
  }
  if (!out) throw InputError("write failed: " + path);
}

inline std::vector<TrainingInstance> parse_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open pair file: " + path);
  std::vector<TrainingInstance> instances;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path + ":" + std::to_string(lineno) +
                       ": malformed JSON: " + e.what());
    }
    try {
      TrainingInstance inst;
      inst.query_tokens = obj.at("query").get<std::vector<std::string>>();
      inst.positive_doc = obj.at("positive").get<std::string>();
      inst.negative_docs = obj.at("negatives").get<std::vector<std::string>>();
      const auto& prov = obj.at("provenance");
      inst.provenance = {prov.at("pos_method").get<std::string>(),
                         prov.at("neg_method").get<std::string>(),
                         prov.at("source").get<std::string>()};
      inst.m = obj.at("m").get<size_t>();
      inst.short_set = obj.value("short", false);
      if (inst.negative_docs.size() != inst.m && !inst.short_set)
        throw InputError(path + ":" + std::to_string(lineno) +
                         ": negatives length does not match m");
      for (const auto& n : inst.negative_docs)
        if (n == inst.positive_doc)
          throw InputError(path + ":" + std::to_string(lineno) +
                           ": positive appears among negatives");
      instances.push_back(std::move(inst));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path + ":" + std::to_string(lineno) +
                       ": bad instance: " + e.what());
    }
  }
  return instances;
}

}  // namespace dret
