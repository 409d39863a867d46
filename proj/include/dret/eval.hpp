#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "dret/common.hpp"

namespace dret {

struct Qrels {
  // topic id -> (doc id -> grade)
  std::map<std::string, std::unordered_map<std::string, int>> judgments;
  int max_grade = 0;
};

struct Run {
  // topic id -> ranked doc ids (scores non-increasing, ties by doc id)
  std::map<std::string, std::vector<std::string>> rankings;
  std::string tag;
};

enum class MetricKind { ndcg, q, nerr, irbu };

inline const char* to_string(MetricKind m) {
  switch (m) {
    case MetricKind::ndcg: return "ndcg";
    case MetricKind::q: return "q";
    case MetricKind::nerr: return "nerr";
    case MetricKind::irbu: return "irbu";
  }
  return "?";
}

inline MetricKind metric_from_string(const std::string& s) {
  if (s == "ndcg") return MetricKind::ndcg;
  if (s == "q") return MetricKind::q;
  if (s == "nerr") return MetricKind::nerr;
  if (s == "irbu") return MetricKind::irbu;
  throw ConfigError("unknown metric: " + s);
}

struct MetricResult {
  MetricKind metric = MetricKind::ndcg;
  size_t k = 10;
  std::map<std::string, double> per_topic;
  double mean = 0.0;
  size_t excluded_topics = 0;  // topics without any relevant document
};

// qrels lines: topic 0 docid grade
inline Qrels parse_qrels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open qrels file: " + path);
  Qrels qrels;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string topic, iter, doc;
    long grade = -1;
    if (!(ss >> topic >> iter >> doc >> grade) || grade < 0)
      throw InputError(path + ":" + std::to_string(lineno) +
                       ": expected 'topic 0 docid grade'");
    auto& topic_map = qrels.judgments[topic];
    if (!topic_map.emplace(doc, static_cast<int>(grade)).second)
      throw InputError(path + ":" + std::to_string(lineno) +
                       ": duplicate judgment for (" + topic + "," + doc + ")");
    qrels.max_grade = std::max(qrels.max_grade, static_cast<int>(grade));
  }
  return qrels;
}

// run lines: topic Q0 docid rank score tag
inline Run parse_run(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open run file: " + path);
  struct Entry {
    std::string doc;
    double score;
  };
  std::map<std::string, std::vector<Entry>> raw;
  Run run;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string topic, q0, doc, tag;
    long rank;
    double score;
    if (!(ss >> topic >> q0 >> doc >> rank >> score >> tag))
      throw InputError(path + ":" + std::to_string(lineno) +
                       ": expected 'topic Q0 docid rank score tag'");
    raw[topic].push_back({doc, score});
    run.tag = tag;
  }
  for (auto& [topic, entries] : raw) {
    std::set<std::string> seen;
    for (const auto& e : entries)
      if (!seen.insert(e.doc).second)
        throw InputError(path + ": duplicate document " + e.doc + " in topic " +
                         topic);
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) {
                       if (a.score != b.score) return a.score > b.score;
                       return a.doc < b.doc;
                     });
    auto& docs = run.rankings[topic];
    docs.reserve(entries.size());
    for (const auto& e : entries) docs.push_back(e.doc);
  }
  return run;
}

namespace detail {

inline int grade_of(const std::unordered_map<std::string, int>& topic_qrels,
                    const std::string& doc) {
  auto it = topic_qrels.find(doc);
  return it == topic_qrels.end() ? 0 : it->second;
}

// Grades of the ideal ranking, descending.
inline std::vector<int> ideal_grades(
    const std::unordered_map<std::string, int>& topic_qrels) {
  std::vector<int> grades;
  for (const auto& [doc, g] : topic_qrels)
    if (g > 0) grades.push_back(g);
  std::sort(grades.rbegin(), grades.rend());
  return grades;
}

}  // namespace detail

// nDCG@k with exponential gains 2^g - 1. Topics without relevant
// documents are the caller's responsibility (evaluate_run excludes them).
inline double ndcg_at_k(const std::unordered_map<std::string, int>& topic_qrels,
                        const std::vector<std::string>& ranking, size_t k) {
  if (k < 1) throw ConfigError("metric cutoff k must be >= 1");
  auto gain = [](int g) { return std::pow(2.0, g) - 1.0; };
  double dcg = 0.0;
  for (size_t r = 0; r < ranking.size() && r < k; ++r)
    dcg += gain(detail::grade_of(topic_qrels, ranking[r])) /
           std::log2(static_cast<double>(r) + 2.0);
  double idcg = 0.0;
  auto ideal = detail::ideal_grades(topic_qrels);
  for (size_t r = 0; r < ideal.size() && r < k; ++r)
    idcg += gain(ideal[r]) / std::log2(static_cast<double>(r) + 2.0);
  return idcg > 0.0 ? dcg / idcg : 0.0;
}

// Q-measure@k with linear gains and beta = 1.
inline double q_measure_at_k(
    const std::unordered_map<std::string, int>& topic_qrels,
    const std::vector<std::string>& ranking, size_t k) {
  if (k < 1) throw ConfigError("metric cutoff k must be >= 1");
  auto ideal = detail::ideal_grades(topic_qrels);
  size_t total_relevant = ideal.size();
  if (total_relevant == 0) return 0.0;

  double sum = 0.0;
  size_t rel_count = 0;
  double cg = 0.0, cg_ideal = 0.0;
  for (size_t r = 0; r < ranking.size() && r < k; ++r) {
    int g = detail::grade_of(topic_qrels, ranking[r]);
    cg += g;
    cg_ideal += r < ideal.size() ? ideal[r] : 0;
    if (g > 0) {
      ++rel_count;
      double br = (static_cast<double>(rel_count) + cg) /
                  (static_cast<double>(r + 1) + cg_ideal);
      sum += br;
    }
  }
  return sum / static_cast<double>(std::min(total_relevant, k));
}

// nERR@k; stop probability (2^g - 1)/2^gmax with gmax the qrels-file
// global maximum grade.
inline double nerr_at_k(const std::unordered_map<std::string, int>& topic_qrels,
                        const std::vector<std::string>& ranking, size_t k,
                        int max_grade) {
  if (k < 1) throw ConfigError("metric cutoff k must be >= 1");
  if (max_grade < 1) return 0.0;
  double denom = std::pow(2.0, max_grade);
  auto err = [&](auto grade_at, size_t len) {
    double value = 0.0, cont = 1.0;
    for (size_t r = 0; r < len && r < k; ++r) {
      double stop = (std::pow(2.0, grade_at(r)) - 1.0) / denom;
      value += cont * stop / static_cast<double>(r + 1);
      cont *= 1.0 - stop;
    }
    return value;
  };
  double observed = err(
      [&](size_t r) { return detail::grade_of(topic_qrels, ranking[r]); },
      ranking.size());
  auto ideal = detail::ideal_grades(topic_qrels);
  double best = err([&](size_t r) { return ideal[r]; }, ideal.size());
  return best > 0.0 ? observed / best : 0.0;
}

// Rank-biased utility, graded single-intent form:
//   iRBU@k = 1 - prod_{r=1..k} (1 - p^(r-1) * g_r / g_max)
// with persistence p (default 0.99). Empty rankings score 0 and the
// ideal ranking maximizes the value. The golden fixtures in the test
// suite were frozen from an independent high-precision evaluation of
// this same closed form.
inline double irbu_at_k(const std::unordered_map<std::string, int>& topic_qrels,
                        const std::vector<std::string>& ranking, size_t k,
                        int max_grade, double p = 0.99) {
  if (k < 1) throw ConfigError("metric cutoff k must be >= 1");
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("irbu persistence must be in (0,1)");
  if (max_grade < 1) return 0.0;
  double miss = 1.0;
  double decay = 1.0;
  for (size_t r = 0; r < ranking.size() && r < k; ++r) {
    double rel = static_cast<double>(detail::grade_of(topic_qrels, ranking[r])) /
                 static_cast<double>(max_grade);
    miss *= 1.0 - decay * rel;
    decay *= p;
  }
  return 1.0 - miss;
}

// Per-topic scores and their mean over topics that have at least one
// relevant document; topics missing from the run score 0.
inline MetricResult evaluate_run(const Qrels& qrels, const Run& run,
                                 MetricKind metric, size_t k,
                                 double irbu_p = 0.99) {
  MetricResult result;
  result.metric = metric;
  result.k = k;
  static const std::vector<std::string> kEmpty;
  size_t shared = 0;
  for (const auto& [topic, topic_qrels] : qrels.judgments) {
    if (run.rankings.count(topic)) ++shared;
    if (detail::ideal_grades(topic_qrels).empty()) {
      ++result.excluded_topics;
      continue;
    }
    auto it = run.rankings.find(topic);
    const auto& ranking = it == run.rankings.end() ? kEmpty : it->second;
    double score = 0.0;
    switch (metric) {
      case MetricKind::ndcg: score = ndcg_at_k(topic_qrels, ranking, k); break;
      case MetricKind::q: score = q_measure_at_k(topic_qrels, ranking, k); break;
      case MetricKind::nerr:
        score = nerr_at_k(topic_qrels, ranking, k, qrels.max_grade);
        break;
      case MetricKind::irbu:
        score = irbu_at_k(topic_qrels, ranking, k, qrels.max_grade, irbu_p);
        break;
    }
    result.per_topic[topic] = score;
  }
  if (shared == 0) throw InputError("run and qrels share no topics");
  if (!result.per_topic.empty()) {
    double sum = 0.0;
    for (const auto& [_, s] : result.per_topic) sum += s;
    result.mean = sum / static_cast<double>(result.per_topic.size());
  }
  return result;
}

// Randomized Tukey HSD over a runs x topics score matrix. Each round
// permutes the run labels independently within every topic; the test
// statistic is the max over run pairs of |mean difference|.
// p(i,j) = (#{max >= observed(i,j)} + 1) / (B + 1), diagonal 1.
inline std::vector<std::vector<double>> randomized_tukey_hsd(
    const std::vector<std::vector<double>>& scores, size_t permutations,
    uint64_t seed) {
  size_t n_runs = scores.size();
  if (n_runs < 2) throw InputError("tukey hsd: need at least 2 runs");
  size_t n_topics = scores[0].size();
  if (n_topics < 2) throw InputError("tukey hsd: need at least 2 topics");
  for (const auto& row : scores)
    if (row.size() != n_topics)
      throw InputError("tukey hsd: ragged score matrix");
  if (permutations < 1) throw ConfigError("tukey hsd: B must be >= 1");

  auto means = [&](const std::vector<std::vector<double>>& mat) {
    std::vector<double> m(n_runs, 0.0);
    for (size_t i = 0; i < n_runs; ++i) {
      for (double x : mat[i]) m[i] += x;
      m[i] /= static_cast<double>(n_topics);
    }
    return m;
  };

  std::vector<double> observed_means = means(scores);
  std::vector<std::vector<double>> observed(n_runs,
                                            std::vector<double>(n_runs, 0.0));
  for (size_t i = 0; i < n_runs; ++i)
    for (size_t j = 0; j < n_runs; ++j)
      observed[i][j] = std::fabs(observed_means[i] - observed_means[j]);

  std::vector<std::vector<size_t>> exceed(n_runs,
                                          std::vector<size_t>(n_runs, 0));
  std::vector<std::vector<double>> permuted = scores;
  std::vector<size_t> labels(n_runs);
  for (size_t round = 0; round < permutations; ++round) {
    Rng rng(seed, "hsd-round:" + std::to_string(round));
    for (size_t t = 0; t < n_topics; ++t) {
      for (size_t i = 0; i < n_runs; ++i) labels[i] = i;
      rng.shuffle(labels);
      for (size_t i = 0; i < n_runs; ++i) permuted[i][t] = scores[labels[i]][t];
    }
    std::vector<double> m = means(permuted);
    double max_diff = *std::max_element(m.begin(), m.end()) -
                      *std::min_element(m.begin(), m.end());
    for (size_t i = 0; i < n_runs; ++i)
      for (size_t j = 0; j < n_runs; ++j)
        if (max_diff >= observed[i][j]) ++exceed[i][j];
  }

  std::vector<std::vector<double>> p(n_runs, std::vector<double>(n_runs, 1.0));
  for (size_t i = 0; i < n_runs; ++i)
    for (size_t j = 0; j < n_runs; ++j)
      p[i][j] = i == j ? 1.0
                       : static_cast<double>(exceed[i][j] + 1) /
                             static_cast<double>(permutations + 1);
  return p;
}

}  // namespace dret
