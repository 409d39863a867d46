#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dret/common.hpp"

namespace dret {

struct SynthBenchmark {
  std::string corpus_d;       // target corpus D (JSONL)
  std::string corpus_dstar;   // augmentation corpus D* (JSONL)
  std::string queries;        // TSV
  std::string qrels;          // TREC qrels
};

namespace detail {

// Pronounceable pseudo-words so the corpora read like text.
inline std::string synth_word(uint64_t id) {
  static const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m",
                                  "n", "p", "r", "s", "t", "v", "z"};
  static const char* kVowels[] = {"a", "e", "i", "o", "u"};
  std::string w;
  uint64_t x = id;
  for (int syll = 0; syll < 3; ++syll) {
    w += kOnsets[x % 14];
    x /= 14;
    w += kVowels[x % 5];
    x /= 5;
  }
  return w;
}

}  // namespace detail

// Seeded two-domain benchmark: a general vocabulary shared by every
// document plus per-topic domain terms. Relevance is planted lexically:
// a doc judged for topic t carries between 1 and 4 of t's terms, grade 2
// for >= 3 planted terms and grade 1 otherwise. Every topic gets at
// least one grade-2 document. D* follows the same topic vocabulary but
// carries no judgments.
inline SynthBenchmark synth_benchmark(const std::string& out_dir, uint64_t seed,
                                      size_t n_docs, size_t n_topics) {
  if (n_docs < 50) throw ConfigError("synth: need at least 50 documents");
  if (n_topics < 5) throw ConfigError("synth: need at least 5 topics");

  const size_t kGeneralVocab = 120;
  const size_t kTermsPerTopic = 4;
  Rng rng(seed);

  std::vector<std::string> general;
  for (size_t i = 0; i < kGeneralVocab; ++i)
    general.push_back(detail::synth_word(1000 + i));
  std::vector<std::vector<std::string>> topic_terms(n_topics);
  for (size_t t = 0; t < n_topics; ++t)
    for (size_t j = 0; j < kTermsPerTopic; ++j)
      topic_terms[t].push_back(detail::synth_word(90000 + t * kTermsPerTopic + j));

  SynthBenchmark paths;
  paths.corpus_d = out_dir + "/corpus_d.jsonl";
  paths.corpus_dstar = out_dir + "/corpus_dstar.jsonl";
  paths.queries = out_dir + "/queries.tsv";
  paths.qrels = out_dir + "/qrels.txt";

  auto make_doc_text = [&](size_t topic, size_t planted, Rng& r) {
    std::vector<std::string> words;
    if (planted > 0) {
      std::vector<std::string> terms = topic_terms[topic];
      r.shuffle(terms);
      terms.resize(planted);
      words = terms;
    }
    size_t filler = 20 + r.next_below(20);
    for (size_t i = 0; i < filler; ++i)
      words.push_back(general[r.next_below(kGeneralVocab)]);
    r.shuffle(words);
    std::string text;
    for (const auto& w : words) {
      if (!text.empty()) text.push_back(' ');
      text += w;
    }
    return text;
  };

  struct Judged {
    std::string topic, doc;
    int grade;
  };
  std::vector<Judged> judgments;

  auto write_corpus = [&](const std::string& path, const std::string& prefix,
                          bool judged) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    for (size_t i = 0; i < n_docs; ++i) {
      char idbuf[32];
      std::snprintf(idbuf, sizeof idbuf, "%s%04zu", prefix.c_str(), i);
      std::string id = idbuf;
      Rng doc_rng(seed, prefix + ":" + id);
      size_t topic = i % n_topics;
      size_t round = i / n_topics;
      size_t planted;
      if (round == 0) {
        planted = kTermsPerTopic;  // guarantees a grade-2 doc per topic
      } else if (round < 4) {
        planted = 1 + doc_rng.next_below(kTermsPerTopic);
      } else {
        planted = doc_rng.next_below(3);  // mostly background
      }
      std::string text = make_doc_text(topic, planted, doc_rng);
      nlohmann::json obj{{"id", id}, {"text", text}};
      out << obj.dump() << "\n";
      if (judged && planted > 0) {
        char topicbuf[16];
        std::snprintf(topicbuf, sizeof topicbuf, "t%03zu", topic);
        judgments.push_back({topicbuf, id, planted >= 3 ? 2 : 1});
      }
    }
  };
  write_corpus(paths.corpus_d, "d", true);
  write_corpus(paths.corpus_dstar, "x", false);

  {
    std::ofstream out(paths.queries, std::ios::binary);
    if (!out) throw InputError("cannot write " + paths.queries);
    for (size_t t = 0; t < n_topics; ++t) {
      char topicbuf[16];
      std::snprintf(topicbuf, sizeof topicbuf, "t%03zu", t);
      Rng qrng(seed, std::string("query:") + topicbuf);
      std::vector<std::string> terms = topic_terms[t];
      qrng.shuffle(terms);
      out << topicbuf << "\t" << terms[0] << " " << terms[1] << "\n";
    }
  }
  {
    std::ofstream out(paths.qrels, std::ios::binary);
    if (!out) throw InputError("cannot write " + paths.qrels);
    for (const auto& j : judgments)
      out << j.topic << " 0 " << j.doc << " " << j.grade << "\n";
  }
  return paths;
}

}  // namespace dret
