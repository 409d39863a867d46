#pragma once

#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "dret/common.hpp"
#include "dret/corpus.hpp"
#include "dret/embed.hpp"
#include "dret/eval.hpp"
#include "dret/extract.hpp"
#include "dret/lexindex.hpp"
#include "dret/ranker.hpp"
#include "dret/sampler.hpp"

namespace dret {

inline std::unordered_map<std::string, std::vector<std::string>> doc_token_map(
    const std::vector<Document>& docs) {
  std::unordered_map<std::string, std::vector<std::string>> map;
  map.reserve(docs.size());
  for (const auto& doc : docs) map.emplace(doc.id, doc.tokens);
  return map;
}

inline std::vector<std::string> doc_id_list(const std::vector<Document>& docs) {
  std::vector<std::string> ids;
  ids.reserve(docs.size());
  for (const auto& doc : docs) ids.push_back(doc.id);
  return ids;
}

struct ExtractorOptions {
  size_t window = 4;       // textrank co-occurrence window
  size_t ngram_max = 2;    // keybert candidate n-gram cap
  size_t embed_dim = 64;
  uint64_t embed_seed = 7;
  std::string embedding_tsv;  // optional external table
  double damping = 0.85;
  double tol = 1e-6;
  size_t max_iter = 100;
};

inline std::function<KeywordList(const Document&)> make_extractor(
    PosMethod method, const InvertedIndex& index, const StopwordSet& stopwords,
    size_t v, const ExtractorOptions& opts,
    std::shared_ptr<const Embedder> embedder = nullptr) {
  switch (method) {
    case PosMethod::tfidf:
      return [&index, &stopwords, v](const Document& d) {
        return tfidf_keywords(d, index, v, stopwords);
      };
    case PosMethod::textrank:
      return [&stopwords, v, opts](const Document& d) {
        return textrank_keywords(d, v, opts.window, stopwords, opts.damping,
                                 opts.tol, opts.max_iter);
      };
    case PosMethod::rake:
      return [&stopwords, v](const Document& d) {
        return rake_keywords(d, v, stopwords);
      };
    case PosMethod::keybert: {
      if (!embedder) {
        embedder = opts.embedding_tsv.empty()
                       ? std::shared_ptr<const Embedder>(std::make_shared<HashEmbedder>(
                             opts.embed_dim, opts.embed_seed))
                       : std::make_shared<TsvEmbedder>(opts.embedding_tsv);
      }
      return [&stopwords, v, opts, embedder](const Document& d) {
        return embed_keywords(d, v, opts.ngram_max, *embedder, stopwords);
      };
    }
    case PosMethod::pseudo_label:
      throw ConfigError("pseudo_label has no per-document extractor");
  }
  throw ConfigError("unknown extractor");
}

// Full pair generation for one sampler configuration. For pseudo_label,
// positives come from BM25 retrieval of the D* queries; otherwise from
// per-document keyword extraction over D*.
inline std::vector<TrainingInstance> generate_pairs(
    const std::vector<Document>& dstar_docs,
    const std::vector<Query>& dstar_queries, const SamplerConfig& config,
    const CorpusConfig& corpus_config, const StopwordSet& stopwords,
    const InvertedIndex& index, const ExtractorOptions& opts = {}) {
  config.validate();
  std::vector<PositivePair> positives;
  if (config.pos_method == PosMethod::pseudo_label) {
    if (dstar_queries.empty())
      throw InputError("pseudo_label positives need a D* query file");
    positives = pseudo_label_positives(
        dstar_queries,
        [&](const Query& q) { return bm25_search(index, q.tokens, config.U); },
        config.U);
  } else {
    auto extractor = make_extractor(config.pos_method, index, stopwords,
                                    config.V, opts);
    positives = prf_positives(dstar_docs, extractor,
                              corpus_config.query_max_tokens);
  }
  return assemble_dataset(positives, config, index, doc_id_list(dstar_docs));
}

enum class SearchMode { bm25, direct, adapted };

inline SearchMode search_mode_from_string(const std::string& s) {
  if (s == "bm25") return SearchMode::bm25;
  if (s == "direct") return SearchMode::direct;
  if (s == "adapted") return SearchMode::adapted;
  throw ConfigError("unknown search mode: " + s);
}

// BM25 retrieval, optionally reranked by a model (direct/adapted modes
// share the mechanics; they differ only in which model file is passed).
inline Run run_search(
    const InvertedIndex& index, const std::vector<Query>& queries,
    SearchMode mode, const MiniCoilModel* model,
    const std::unordered_map<std::string, std::vector<std::string>>& doc_tokens,
    size_t k, size_t candidate_depth, const std::string& tag) {
  if (mode != SearchMode::bm25 && model == nullptr)
    throw ConfigError("model-backed search modes need a model");
  Run run;
  run.tag = tag;
  for (const auto& q : queries) {
    std::vector<ScoredDoc> hits;
    if (mode == SearchMode::bm25) {
      hits = bm25_search(index, q.tokens, k);
    } else {
      auto candidates = bm25_search(index, q.tokens, candidate_depth);
      hits = rerank(*model, q.tokens, candidates, doc_tokens, k);
    }
    auto& docs = run.rankings[q.id];
    for (const auto& h : hits) docs.push_back(h.doc_id);
  }
  return run;
}

inline void write_run_file(
    const InvertedIndex& index, const std::vector<Query>& queries,
    SearchMode mode, const MiniCoilModel* model,
    const std::unordered_map<std::string, std::vector<std::string>>& doc_tokens,
    size_t k, size_t candidate_depth, const std::string& tag,
    const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write run file: " + path);
  char buf[64];
  for (const auto& q : queries) {
    std::vector<ScoredDoc> hits;
    if (mode == SearchMode::bm25) {
      hits = bm25_search(index, q.tokens, k);
    } else {
      auto candidates = bm25_search(index, q.tokens, candidate_depth);
      hits = rerank(*model, q.tokens, candidates, doc_tokens, k);
    }
    for (const auto& h : hits) {
      std::snprintf(buf, sizeof buf, "%.6f", h.score);
      out << q.id << " Q0 " << h.doc_id << " " << h.rank << " " << buf << " "
          << tag << "\n";
    }
  }
  if (!out) throw InputError("write failed: " + path);
}

inline std::string format_score(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

// Per-topic CSV plus a mean-summary CSV for a set of metric results.
inline void write_eval_csv(const std::vector<MetricResult>& results,
                           const std::string& per_topic_path,
                           const std::string& summary_path) {
  std::ofstream topics(per_topic_path, std::ios::binary);
  if (!topics) throw InputError("cannot write " + per_topic_path);
  topics << "topic";
  for (const auto& r : results) topics << "," << to_string(r.metric) << "@" << r.k;
  topics << "\n";
  if (!results.empty()) {
    for (const auto& [topic, _] : results[0].per_topic) {
      topics << topic;
      for (const auto& r : results)
        topics << "," << format_score(r.per_topic.at(topic));
      topics << "\n";
    }
  }

  std::ofstream summary(summary_path, std::ios::binary);
  if (!summary) throw InputError("cannot write " + summary_path);
  summary << "metric,k,mean,topics,excluded_topics\n";
  for (const auto& r : results)
    summary << to_string(r.metric) << "," << r.k << "," << format_score(r.mean)
            << "," << r.per_topic.size() << "," << r.excluded_topics << "\n";
}

// ---- manifests --------------------------------------------------------

inline std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file for digest: " + path);
  uint64_t h = 1469598103934665603ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    h = fnv1a64(std::string_view(buf, static_cast<size_t>(in.gcount())), h);
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

// Every subcommand records enough to re-execute it exactly: the resolved
// config, its hash, all seeds, and digests of every input file.
inline void write_manifest(const std::string& path,
                           const std::string& subcommand,
                           const nlohmann::json& config,
                           const std::vector<std::string>& inputs,
                           const std::vector<std::string>& outputs) {
  nlohmann::json manifest;
  manifest["subcommand"] = subcommand;
  manifest["config"] = config;
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(fnv1a64(config.dump())));
  manifest["config_hash"] = hex;
  auto& in_digests = manifest["inputs"] = nlohmann::json::object();
  for (const auto& p : inputs) in_digests[p] = file_digest(p);
  manifest["outputs"] = outputs;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write manifest: " + path);
  out << manifest.dump(2) << "\n";
}

}  // namespace dret
