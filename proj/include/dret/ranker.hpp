#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dret/common.hpp"
#include "dret/lexindex.hpp"
#include "dret/sampler.hpp"

namespace dret {

// Static dual-table stand-in for a contextualized lexical-match ranker:
// separate query-side and document-side token tables plus CLS tables.
struct MiniCoilModel {
  std::vector<std::string> vocab_list;  // ordinal -> token, sorted
  std::unordered_map<std::string, uint32_t> vocab;
  size_t n_t = 32;  // token-vector dim
  size_t n_c = 32;  // CLS-vector dim
  // |vocab| x dim, row-major
  std::vector<double> q_tok, d_tok, q_cls, d_cls;

  const double* row(const std::vector<double>& table, uint32_t ord,
                    size_t dim) const {
    return table.data() + static_cast<size_t>(ord) * dim;
  }
};

struct ScoreBreakdown {
  double cls_product = 0.0;
  double match_score = 0.0;
  double total = 0.0;
};

struct TrainConfig {
  double lr = 1e-2;  // desk-scale default; the reference setup uses 2e-6
  double warmup_ratio = 0.1;
  size_t epochs = 1;
  uint64_t seed = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;

  void validate() const {
    if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
    if (warmup_ratio < 0.0 || warmup_ratio > 1.0)
      throw ConfigError("warmup_ratio must be in [0,1]");
  }
};

inline MiniCoilModel init_model(const std::vector<std::string>& vocab,
                                size_t n_t, size_t n_c, uint64_t seed) {
  if (vocab.empty()) throw InputError("init_model: empty vocabulary");
  if (n_t < 1 || n_c < 1) throw ConfigError("embedding dims must be >= 1");
  MiniCoilModel model;
  model.vocab_list = vocab;
  std::sort(model.vocab_list.begin(), model.vocab_list.end());
  model.vocab_list.erase(
      std::unique(model.vocab_list.begin(), model.vocab_list.end()),
      model.vocab_list.end());
  for (uint32_t i = 0; i < model.vocab_list.size(); ++i)
    model.vocab.emplace(model.vocab_list[i], i);
  model.n_t = n_t;
  model.n_c = n_c;
  Rng rng(seed);
  auto fill = [&](std::vector<double>& table, size_t dim) {
    table.resize(model.vocab_list.size() * dim);
    for (double& x : table) x = rng.next_double(-0.05, 0.05);
  };
  fill(model.q_tok, n_t);
  fill(model.d_tok, n_t);
  fill(model.q_cls, n_c);
  fill(model.d_cls, n_c);
  return model;
}

enum class Side { query, doc };

// Mean of the side's CLS rows over token occurrences; unknown tokens are
// skipped, and an empty or all-unknown input gives the zero vector.
inline std::vector<double> cls_vector(const MiniCoilModel& model,
                                      const std::vector<std::string>& tokens,
                                      Side side) {
  const auto& table = side == Side::query ? model.q_cls : model.d_cls;
  std::vector<double> v(model.n_c, 0.0);
  size_t known = 0;
  for (const auto& t : tokens) {
    auto it = model.vocab.find(t);
    if (it == model.vocab.end()) continue;
    const double* r = model.row(table, it->second, model.n_c);
    for (size_t i = 0; i < model.n_c; ++i) v[i] += r[i];
    ++known;
  }
  if (known > 0)
    for (double& x : v) x /= static_cast<double>(known);
  return v;
}

// s(q,d) = CLS product + exact-match token score. Each distinct query
// token present in the document contributes the dot product of its
// query-side and document-side token vectors (max over occurrences is
// trivial under static tables but the lookup structure mirrors an
// inverted-list scorer).
inline ScoreBreakdown score(const MiniCoilModel& model,
                            const std::vector<std::string>& query_tokens,
                            const std::vector<std::string>& doc_tokens) {
  ScoreBreakdown out;
  std::vector<double> cq = cls_vector(model, query_tokens, Side::query);
  std::vector<double> cd = cls_vector(model, doc_tokens, Side::doc);
  for (size_t i = 0; i < model.n_c; ++i) out.cls_product += cq[i] * cd[i];

  std::unordered_set<std::string> doc_set(doc_tokens.begin(), doc_tokens.end());
  for (const auto& term : detail::distinct_sorted(query_tokens)) {
    auto it = model.vocab.find(term);
    if (it == model.vocab.end() || !doc_set.count(term)) continue;
    const double* q = model.row(model.q_tok, it->second, model.n_t);
    const double* d = model.row(model.d_tok, it->second, model.n_t);
    double dot = 0.0;
    for (size_t i = 0; i < model.n_t; ++i) dot += q[i] * d[i];
    out.match_score += dot;
  }
  out.total = out.cls_product + out.match_score;
  return out;
}

// -log softmax of the positive score against the negatives, computed
// with max-subtraction.
inline double contrastive_loss(double pos_score,
                               const std::vector<double>& neg_scores) {
  if (neg_scores.empty()) throw ConfigError("contrastive_loss: m must be >= 1");
  if (!std::isfinite(pos_score))
    throw InputError("contrastive_loss: non-finite score");
  double mx = pos_score;
  for (double s : neg_scores) {
    if (!std::isfinite(s)) throw InputError("contrastive_loss: non-finite score");
    mx = std::max(mx, s);
  }
  double sum = std::exp(pos_score - mx);
  for (double s : neg_scores) sum += std::exp(s - mx);
  return std::log(sum) - (pos_score - mx);
}

// Sparse gradients, one map per table: touched row ordinal -> d(loss)/d(row).
struct Gradients {
  std::unordered_map<uint32_t, std::vector<double>> q_tok, d_tok, q_cls, d_cls;

  bool empty() const {
    return q_tok.empty() && d_tok.empty() && q_cls.empty() && d_cls.empty();
  }
};

namespace detail {

// Accumulate coeff * d s(q,d) / d(params) into grads.
inline void accumulate_score_grad(const MiniCoilModel& model,
                                  const std::vector<std::string>& query_tokens,
                                  const std::vector<std::string>& doc_tokens,
                                  double coeff, Gradients& grads) {
  auto touch = [&](std::unordered_map<uint32_t, std::vector<double>>& table,
                   uint32_t ord, size_t dim) -> std::vector<double>& {
    auto [it, inserted] = table.try_emplace(ord);
    if (inserted) it->second.assign(dim, 0.0);
    return it->second;
  };

  // CLS term: d(cq.cd)/d q_cls[t] = count(t)/known_q * cd, and symmetrically.
  std::vector<double> cq = cls_vector(model, query_tokens, Side::query);
  std::vector<double> cd = cls_vector(model, doc_tokens, Side::doc);
  std::unordered_map<uint32_t, size_t> q_counts, d_counts;
  size_t known_q = 0, known_d = 0;
  for (const auto& t : query_tokens) {
    auto it = model.vocab.find(t);
    if (it == model.vocab.end()) continue;
    ++q_counts[it->second];
    ++known_q;
  }
  for (const auto& t : doc_tokens) {
    auto it = model.vocab.find(t);
    if (it == model.vocab.end()) continue;
    ++d_counts[it->second];
    ++known_d;
  }
  for (const auto& [ord, count] : q_counts) {
    double w = coeff * static_cast<double>(count) / static_cast<double>(known_q);
    auto& g = touch(grads.q_cls, ord, model.n_c);
    for (size_t i = 0; i < model.n_c; ++i) g[i] += w * cd[i];
  }
  for (const auto& [ord, count] : d_counts) {
    double w = coeff * static_cast<double>(count) / static_cast<double>(known_d);
    auto& g = touch(grads.d_cls, ord, model.n_c);
    for (size_t i = 0; i < model.n_c; ++i) g[i] += w * cq[i];
  }

  // Match term: bilinear in the two token rows of each overlapping term.
  std::unordered_set<std::string> doc_set(doc_tokens.begin(), doc_tokens.end());
  for (const auto& term : distinct_sorted(query_tokens)) {
    auto it = model.vocab.find(term);
    if (it == model.vocab.end() || !doc_set.count(term)) continue;
    uint32_t ord = it->second;
    const double* q = model.row(model.q_tok, ord, model.n_t);
    const double* d = model.row(model.d_tok, ord, model.n_t);
    auto& gq = touch(grads.q_tok, ord, model.n_t);
    auto& gd = touch(grads.d_tok, ord, model.n_t);
    for (size_t i = 0; i < model.n_t; ++i) {
      gq[i] += coeff * d[i];
      gd[i] += coeff * q[i];
    }
  }
}

}  // namespace detail

// Analytic gradient of contrastive_loss(score(q,d+), {score(q,dj-)}):
// dL/ds+ = p+ - 1 and dL/dsj- = pj, chained through the bilinear score.
inline Gradients loss_gradients(
    const MiniCoilModel& model, const std::vector<std::string>& query_tokens,
    const std::vector<std::string>& pos_tokens,
    const std::vector<std::vector<std::string>>& neg_tokens,
    double* loss_out = nullptr) {
  if (neg_tokens.empty()) throw ConfigError("loss_gradients: m must be >= 1");
  double s_pos = score(model, query_tokens, pos_tokens).total;
  std::vector<double> s_neg;
  s_neg.reserve(neg_tokens.size());
  for (const auto& d : neg_tokens)
    s_neg.push_back(score(model, query_tokens, d).total);
  if (loss_out) *loss_out = contrastive_loss(s_pos, s_neg);

  double mx = s_pos;
  for (double s : s_neg) mx = std::max(mx, s);
  double z = std::exp(s_pos - mx);
  for (double s : s_neg) z += std::exp(s - mx);
  double p_pos = std::exp(s_pos - mx) / z;

  Gradients grads;
  detail::accumulate_score_grad(model, query_tokens, pos_tokens, p_pos - 1.0,
                                grads);
  for (size_t j = 0; j < neg_tokens.size(); ++j) {
    double p_j = std::exp(s_neg[j] - mx) / z;
    detail::accumulate_score_grad(model, query_tokens, neg_tokens[j], p_j,
                                  grads);
  }
  return grads;
}

struct AdamState {
  struct Moments {
    std::vector<double> m, v;
  };
  std::unordered_map<uint32_t, Moments> q_tok, d_tok, q_cls, d_cls;
  size_t step = 0;
};

// Warmup then linear decay; t is 1-based, T the total step count.
inline double lr_schedule(double base_lr, size_t t, size_t total_steps,
                          double warmup_ratio) {
  if (total_steps == 0) return 0.0;
  double tw = warmup_ratio * static_cast<double>(total_steps);
  double td = static_cast<double>(t);
  if (tw >= 1.0 && td <= tw) return base_lr * td / tw;
  double denom = static_cast<double>(total_steps) - tw;
  if (denom <= 0.0) return base_lr;
  return base_lr * (static_cast<double>(total_steps) - td) / denom;
}

// AdamW with decoupled weight decay, applied only to touched rows; bias
// correction uses the global step count.
inline void adamw_step(MiniCoilModel& model, AdamState& state,
                       const Gradients& grads, size_t total_steps,
                       const TrainConfig& config) {
  config.validate();
  ++state.step;
  double lr =
      lr_schedule(config.lr, state.step, total_steps, config.warmup_ratio);
  double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));

  auto update = [&](std::vector<double>& table, size_t dim,
                    const std::unordered_map<uint32_t, std::vector<double>>& g,
                    std::unordered_map<uint32_t, AdamState::Moments>& mom) {
    for (const auto& [ord, grad] : g) {
      auto [it, inserted] = mom.try_emplace(ord);
      if (inserted) {
        it->second.m.assign(dim, 0.0);
        it->second.v.assign(dim, 0.0);
      }
      auto& m = it->second.m;
      auto& v = it->second.v;
      double* row = table.data() + static_cast<size_t>(ord) * dim;
      for (size_t i = 0; i < dim; ++i) {
        m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grad[i];
        v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
        double mhat = m[i] / bc1;
        double vhat = v[i] / bc2;
        row[i] -= lr * (mhat / (std::sqrt(vhat) + config.eps) +
                        config.weight_decay * row[i]);
      }
    }
  };
  update(model.q_tok, model.n_t, grads.q_tok, state.q_tok);
  update(model.d_tok, model.n_t, grads.d_tok, state.d_tok);
  update(model.q_cls, model.n_c, grads.q_cls, state.q_cls);
  update(model.d_cls, model.n_c, grads.d_cls, state.d_cls);
}

// One optimizer step per instance, seeded-shuffle visit order per epoch.
// Returns the per-epoch mean loss trace.
inline std::vector<double> train(
    MiniCoilModel& model, const std::vector<TrainingInstance>& dataset,
    const std::unordered_map<std::string, std::vector<std::string>>& doc_tokens,
    const TrainConfig& config) {
  config.validate();
  if (dataset.empty()) throw InputError("train: empty dataset");
  auto tokens_of = [&](const std::string& id)
      -> const std::vector<std::string>& {
    auto it = doc_tokens.find(id);
    if (it == doc_tokens.end())
      throw InputError("train: unknown document id in dataset: " + id);
    return it->second;
  };

  AdamState state;
  size_t total_steps = config.epochs * dataset.size();
  std::vector<double> trace;
  for (size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<size_t> order(dataset.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(config.seed, "epoch:" + std::to_string(epoch));
    rng.shuffle(order);

    double loss_sum = 0.0;
    for (size_t idx : order) {
      const auto& inst = dataset[idx];
      std::vector<std::vector<std::string>> negs;
      negs.reserve(inst.negative_docs.size());
      for (const auto& id : inst.negative_docs) negs.push_back(tokens_of(id));
      double loss = 0.0;
      Gradients grads = loss_gradients(model, inst.query_tokens,
                                       tokens_of(inst.positive_doc), negs, &loss);
      adamw_step(model, state, grads, total_steps, config);
      loss_sum += loss;
    }
    trace.push_back(loss_sum / static_cast<double>(dataset.size()));
  }
  return trace;
}

// Rescore candidates with the model; descending total, ties by doc id.
inline std::vector<ScoredDoc> rerank(
    const MiniCoilModel& model, const std::vector<std::string>& query_tokens,
    const std::vector<ScoredDoc>& candidates,
    const std::unordered_map<std::string, std::vector<std::string>>& doc_tokens,
    size_t k) {
  std::vector<ScoredDoc> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    auto it = doc_tokens.find(c.doc_id);
    if (it == doc_tokens.end())
      throw InputError("rerank: unknown candidate id: " + c.doc_id);
    out.push_back({c.doc_id, score(model, query_tokens, it->second).total, 0});
  }
  std::sort(out.begin(), out.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  });
  if (out.size() > k) out.resize(k);
  for (size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
  return out;
}

// ---- model file "DLMC1": dims, vocab, tables at full 64-bit precision --

inline void save_model(const MiniCoilModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write model file: " + path);
  out.write("DLMC1", 5);
  detail::put_u64(out, model.vocab_list.size());
  detail::put_u64(out, model.n_t);
  detail::put_u64(out, model.n_c);
  for (const auto& t : model.vocab_list) detail::put_str(out, t);
  for (const auto* table : {&model.q_tok, &model.d_tok, &model.q_cls, &model.d_cls})
    for (double x : *table) detail::put_f64(out, x);
  if (!out) throw InputError("write failed: " + path);
}

inline MiniCoilModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open model file: " + path);
  char magic[5];
  in.read(magic, 5);
  if (!in || std::string_view(magic, 5) != "DLMC1")
    throw InputError("not a DLMC1 model file: " + path);
  MiniCoilModel model;
  uint64_t n = detail::get_u64(in);
  model.n_t = detail::get_u64(in);
  model.n_c = detail::get_u64(in);
  model.vocab_list.reserve(n);
  for (uint64_t i = 0; i < n; ++i) {
    model.vocab_list.push_back(detail::get_str(in));
    model.vocab.emplace(model.vocab_list.back(), static_cast<uint32_t>(i));
  }
  for (auto* table : {&model.q_tok, &model.d_tok}) {
    table->resize(n * model.n_t);
    for (double& x : *table) x = detail::get_f64(in);
  }
  for (auto* table : {&model.q_cls, &model.d_cls}) {
    table->resize(n * model.n_c);
    for (double& x : *table) x = detail::get_f64(in);
  }
  return model;
}

}  // namespace dret
