// dret: unsupervised domain-adaptation toolkit for lexical-match dense
// retrieval. Subcommands cover the full pipeline: synth, index, extract,
// genpairs, train, search, eval, hsd, sweep.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dret/corpus.hpp"
#include "dret/embed.hpp"
#include "dret/eval.hpp"
#include "dret/extract.hpp"
#include "dret/lexindex.hpp"
#include "dret/pipeline.hpp"
#include "dret/ranker.hpp"
#include "dret/sampler.hpp"
#include "dret/synth.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInput = 3;
constexpr int kExitInternal = 4;

struct CorpusOpts {
  size_t doc_max_tokens = 128;
  size_t query_max_tokens = 16;
  std::string stopword_path;

  void attach(CLI::App& app) {
    app.add_option("--doc-max-tokens", doc_max_tokens,
                   "Document truncation length");
    app.add_option("--query-max-tokens", query_max_tokens,
                   "Query truncation length");
    app.add_option("--stopwords", stopword_path,
                   "Stopword file (one word per line); bundled list if unset");
  }

  dret::CorpusConfig config() const {
    dret::CorpusConfig c;
    c.doc_max_tokens = doc_max_tokens;
    c.query_max_tokens = query_max_tokens;
    if (!stopword_path.empty()) c.stopword_path = stopword_path;
    return c;
  }
};

struct Bm25Opts {
  double k1 = 1.2;
  double b = 0.75;

  void attach(CLI::App& app) {
    app.add_option("--k1", k1, "BM25 k1");
    app.add_option("--b", b, "BM25 b");
  }
};

struct ExtractOpts {
  std::string method = "textrank";
  size_t v = 5;
  dret::ExtractorOptions opts;

  void attach(CLI::App& app) {
    app.add_option("--method", method,
                   "Keyword method: tfidf|textrank|rake|keybert");
    app.add_option("--V", v, "Keywords per document");
    app.add_option("--window", opts.window, "TextRank co-occurrence window");
    app.add_option("--ngram-max", opts.ngram_max, "KeyBERT max n-gram length");
    app.add_option("--embed-dim", opts.embed_dim, "Builtin embedder dimension");
    app.add_option("--embed-seed", opts.embed_seed, "Builtin embedder seed");
    app.add_option("--embeddings", opts.embedding_tsv,
                   "External embedding TSV (token TAB floats)");
  }
};

nlohmann::json config_json(const CLI::App& app) {
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto* opt : app.get_options()) {
    if (opt->get_name() == "--help" || opt->get_name() == "--config") continue;
    if (!opt->get_name().empty() && opt->count() >= 0) {
      auto results = opt->results();
      if (results.size() == 1)
        cfg[opt->get_name()] = results[0];
      else if (!results.empty())
        cfg[opt->get_name()] = results;
      else if (!opt->get_default_str().empty())
        cfg[opt->get_name()] = opt->get_default_str();
    }
  }
  return cfg;
}

void warn_vocab_coverage(const dret::MiniCoilModel& model,
                         const std::vector<dret::Document>& docs) {
  size_t known = 0, total = 0;
  for (const auto& d : docs)
    for (const auto& t : d.tokens) {
      ++total;
      if (model.vocab.count(t)) ++known;
    }
  if (total > 0 && known * 2 < total)
    std::cerr << "warning: model vocabulary covers only " << known << "/"
              << total << " corpus tokens; unknown tokens score 0\n";
}

std::vector<dret::MetricKind> parse_metrics(const std::string& csv_list) {
  std::vector<dret::MetricKind> metrics;
  std::stringstream ss(csv_list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) metrics.push_back(dret::metric_from_string(item));
  if (metrics.empty()) throw dret::ConfigError("no metrics requested");
  return metrics;
}

std::vector<size_t> parse_size_list(const std::string& csv_list) {
  std::vector<size_t> values;
  std::stringstream ss(csv_list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) values.push_back(static_cast<size_t>(std::stoull(item)));
  if (values.empty()) throw dret::ConfigError("empty value list");
  return values;
}

// Shared by `train` and `sweep`: vocabulary is the union of corpus and
// pair-query tokens so every trainable surface token has a row.
dret::MiniCoilModel make_or_load_model(
    const std::string& model_in, const std::vector<dret::Document>& docs,
    const std::vector<dret::TrainingInstance>& dataset, size_t n_t, size_t n_c,
    uint64_t seed) {
  if (!model_in.empty()) return dret::load_model(model_in);
  std::vector<std::string> vocab;
  for (const auto& d : docs)
    vocab.insert(vocab.end(), d.tokens.begin(), d.tokens.end());
  for (const auto& inst : dataset)
    vocab.insert(vocab.end(), inst.query_tokens.begin(),
                 inst.query_tokens.end());
  return dret::init_model(vocab, n_t, n_c, seed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consistency-filtering-free domain adaptation toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file; flags override it");
  app.allow_config_extras(CLI::config_extras_mode::ignore_all);

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "Generate the seeded two-domain benchmark");
  std::string synth_out = "bench";
  uint64_t synth_seed = 42;
  size_t synth_docs = 200, synth_topics = 20;
  synth->add_option("--out", synth_out, "Output directory (created if missing)");
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--docs", synth_docs, "Documents per corpus")->check(CLI::Range(50, 1000000));
  synth->add_option("--topics", synth_topics, "Topic count")->check(CLI::Range(5, 100000));

  // ---- index ----
  auto* index_cmd = app.add_subcommand("index", "Build and save a BM25 index");
  std::string index_corpus, index_out = "index.dlix";
  CorpusOpts index_corpus_opts;
  Bm25Opts index_bm25;
  index_cmd->add_option("--corpus", index_corpus, "Corpus JSONL")->required();
  index_cmd->add_option("--out", index_out, "Index snapshot path");
  index_corpus_opts.attach(*index_cmd);
  index_bm25.attach(*index_cmd);

  // ---- extract ----
  auto* extract_cmd = app.add_subcommand("extract", "Extract keywords per document");
  std::string extract_corpus, extract_out = "keywords.tsv";
  CorpusOpts extract_corpus_opts;
  Bm25Opts extract_bm25;
  ExtractOpts extract_opts;
  extract_cmd->add_option("--corpus", extract_corpus, "Corpus JSONL")->required();
  extract_cmd->add_option("--out", extract_out, "Output TSV: doc, keyword, score");
  extract_corpus_opts.attach(*extract_cmd);
  extract_bm25.attach(*extract_cmd);
  extract_opts.attach(*extract_cmd);

  // ---- genpairs ----
  auto* genpairs = app.add_subcommand("genpairs", "Generate synthetic training pairs");
  std::string gp_dstar, gp_queries, gp_out = "pairs.jsonl";
  std::string gp_pos = "textrank", gp_neg = "random", gp_neg_mode = "after_top";
  size_t gp_u = 5, gp_m = 7;
  uint64_t gp_seed = 1;
  CorpusOpts gp_corpus_opts;
  Bm25Opts gp_bm25;
  ExtractOpts gp_extract;
  genpairs->add_option("--dstar", gp_dstar, "Augmentation corpus D* JSONL")->required();
  genpairs->add_option("--dstar-queries", gp_queries, "D* query TSV (pseudo_label only)");
  genpairs->add_option("--pos-method", gp_pos,
                       "pseudo_label|tfidf|textrank|rake|keybert");
  genpairs->add_option("--neg-method", gp_neg, "random|bm25");
  genpairs->add_option("--bm25-neg-mode", gp_neg_mode, "after_top|tail");
  genpairs->add_option("--U", gp_u, "Pseudo-label depth");
  genpairs->add_option("--m", gp_m, "Negatives per instance");
  genpairs->add_option("--seed", gp_seed, "Sampling seed");
  genpairs->add_option("--out", gp_out, "Pair file path");
  gp_corpus_opts.attach(*genpairs);
  gp_bm25.attach(*genpairs);
  gp_extract.attach(*genpairs);

  // ---- train ----
  auto* train_cmd = app.add_subcommand("train", "Train the ranker on a pair file");
  std::string tr_pairs, tr_corpus, tr_model_in, tr_model_out = "model.dlmc";
  std::string tr_trace = "loss_trace.csv";
  size_t tr_epochs = 5, tr_nt = 32, tr_nc = 32;
  double tr_lr = 1e-2, tr_warmup = 0.1;
  uint64_t tr_seed = 1;
  CorpusOpts tr_corpus_opts;
  train_cmd->add_option("--pairs", tr_pairs, "Training pair JSONL")->required();
  train_cmd->add_option("--corpus", tr_corpus, "Corpus JSONL the pairs reference")->required();
  train_cmd->add_option("--model-in", tr_model_in, "Continue from this model");
  train_cmd->add_option("--model-out", tr_model_out, "Trained model path");
  train_cmd->add_option("--loss-trace", tr_trace, "Per-epoch mean loss CSV");
  train_cmd->add_option("--epochs", tr_epochs, "Training epochs");
  train_cmd->add_option("--lr", tr_lr, "Base learning rate");
  train_cmd->add_option("--warmup-ratio", tr_warmup, "Warmup fraction of steps");
  train_cmd->add_option("--seed", tr_seed, "Shuffle/init seed");
  train_cmd->add_option("--n-t", tr_nt, "Token embedding dim");
  train_cmd->add_option("--n-c", tr_nc, "CLS embedding dim");
  tr_corpus_opts.attach(*train_cmd);

  // ---- search ----
  auto* search_cmd = app.add_subcommand("search", "Retrieve a TREC-format run");
  std::string se_corpus, se_queries, se_model, se_mode = "bm25";
  std::string se_out = "run.txt", se_tag;
  size_t se_k = 10, se_depth = 1000;
  CorpusOpts se_corpus_opts;
  Bm25Opts se_bm25;
  search_cmd->add_option("--corpus", se_corpus, "Target corpus D JSONL")->required();
  search_cmd->add_option("--queries", se_queries, "Query TSV")->required();
  search_cmd->add_option("--mode", se_mode,
                         "bm25 (no neural stage) | direct (Stage-I model) | "
                         "adapted (Stage-II model)");
  search_cmd->add_option("--model", se_model, "Model file for direct/adapted");
  search_cmd->add_option("--k", se_k, "Result depth");
  search_cmd->add_option("--depth", se_depth, "BM25 candidate depth for reranking");
  search_cmd->add_option("--tag", se_tag, "Run tag (defaults to the mode)");
  search_cmd->add_option("--out", se_out, "Run file path");
  se_corpus_opts.attach(*search_cmd);
  se_bm25.attach(*search_cmd);

  // ---- eval ----
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a run against qrels");
  std::string ev_run, ev_qrels, ev_metrics = "ndcg,q,nerr,irbu";
  std::string ev_prefix = "eval";
  size_t ev_k = 10;
  double ev_irbu_p = 0.99;
  eval_cmd->add_option("--run", ev_run, "Run file")->required();
  eval_cmd->add_option("--qrels", ev_qrels, "Qrels file")->required();
  eval_cmd->add_option("--metrics", ev_metrics, "Comma list of ndcg,q,nerr,irbu");
  eval_cmd->add_option("--k", ev_k, "Metric cutoff");
  eval_cmd->add_option("--irbu-p", ev_irbu_p, "iRBU persistence");
  eval_cmd->add_option("--out-prefix", ev_prefix,
                       "Writes <prefix>.topics.csv and <prefix>.summary.csv");

  // ---- hsd ----
  auto* hsd_cmd = app.add_subcommand("hsd", "Randomized Tukey HSD over runs");
  std::vector<std::string> hsd_runs;
  std::string hsd_qrels, hsd_metric = "ndcg", hsd_out = "hsd.csv";
  size_t hsd_k = 10, hsd_b = 5000;
  uint64_t hsd_seed = 1;
  hsd_cmd->add_option("--run", hsd_runs, "Run files (repeatable, >= 2)")
      ->required()
      ->expected(2, -1);
  hsd_cmd->add_option("--qrels", hsd_qrels, "Qrels file")->required();
  hsd_cmd->add_option("--metric", hsd_metric, "Metric for per-topic scores");
  hsd_cmd->add_option("--k", hsd_k, "Metric cutoff");
  hsd_cmd->add_option("--B", hsd_b, "Permutation rounds");
  hsd_cmd->add_option("--seed", hsd_seed, "Permutation seed");
  hsd_cmd->add_option("--out", hsd_out, "p-value matrix CSV");

  // ---- sweep ----
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Run the full Stage-II pipeline over a list of U or V values");
  std::string sw_param = "U", sw_values = "1,5,10,20,50";
  std::string sw_corpus, sw_dstar, sw_queries, sw_dstar_queries, sw_qrels;
  std::string sw_pos = "textrank", sw_neg = "random", sw_neg_mode = "after_top";
  std::string sw_out = "sweep.csv";
  size_t sw_m = 7, sw_epochs = 5, sw_nt = 32, sw_nc = 32, sw_k = 10,
         sw_depth = 1000;
  double sw_lr = 1e-2, sw_warmup = 0.1, sw_irbu_p = 0.99;
  uint64_t sw_seed = 1;
  size_t sw_u = 5;
  CorpusOpts sw_corpus_opts;
  Bm25Opts sw_bm25;
  ExtractOpts sw_extract;
  sweep_cmd->add_option("--param", sw_param, "Swept parameter: U or V");
  sweep_cmd->add_option("--values", sw_values, "Comma list of values");
  sweep_cmd->add_option("--corpus", sw_corpus, "Target corpus D JSONL")->required();
  sweep_cmd->add_option("--dstar", sw_dstar, "Augmentation corpus D* JSONL")->required();
  sweep_cmd->add_option("--queries", sw_queries, "D query TSV")->required();
  sweep_cmd->add_option("--dstar-queries", sw_dstar_queries,
                        "D* query TSV (pseudo_label only)");
  sweep_cmd->add_option("--qrels", sw_qrels, "Qrels file")->required();
  sweep_cmd->add_option("--pos-method", sw_pos, "Positive sampling method");
  sweep_cmd->add_option("--neg-method", sw_neg, "Negative sampling method");
  sweep_cmd->add_option("--bm25-neg-mode", sw_neg_mode, "after_top|tail");
  sweep_cmd->add_option("--U", sw_u, "Pseudo-label depth when not swept");
  sweep_cmd->add_option("--m", sw_m, "Negatives per instance");
  sweep_cmd->add_option("--epochs", sw_epochs, "Training epochs");
  sweep_cmd->add_option("--lr", sw_lr, "Base learning rate");
  sweep_cmd->add_option("--warmup-ratio", sw_warmup, "Warmup fraction");
  sweep_cmd->add_option("--n-t", sw_nt, "Token embedding dim");
  sweep_cmd->add_option("--n-c", sw_nc, "CLS embedding dim");
  sweep_cmd->add_option("--k", sw_k, "Metric cutoff / result depth");
  sweep_cmd->add_option("--depth", sw_depth, "Rerank candidate depth");
  sweep_cmd->add_option("--irbu-p", sw_irbu_p, "iRBU persistence");
  sweep_cmd->add_option("--seed", sw_seed, "Seed for sampling, init and shuffling");
  sweep_cmd->add_option("--out", sw_out, "Per-config metric CSV");
  sw_corpus_opts.attach(*sweep_cmd);
  sw_bm25.attach(*sweep_cmd);
  sw_extract.attach(*sweep_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (synth->parsed()) {
      std::filesystem::create_directories(synth_out);
      auto paths = dret::synth_benchmark(synth_out, synth_seed, synth_docs,
                                         synth_topics);
      dret::write_manifest(synth_out + "/synth.manifest.json", "synth",
                           config_json(*synth), {},
                           {paths.corpus_d, paths.corpus_dstar, paths.queries,
                            paths.qrels});
      std::cout << "wrote " << paths.corpus_d << ", " << paths.corpus_dstar
                << ", " << paths.queries << ", " << paths.qrels << "\n";
    } else if (index_cmd->parsed()) {
      auto docs = dret::load_corpus(index_corpus, index_corpus_opts.config());
      auto index = dret::build_index(docs, index_bm25.k1, index_bm25.b);
      dret::save_index(index, index_out);
      dret::write_manifest(index_out + ".manifest.json", "index",
                           config_json(*index_cmd), {index_corpus}, {index_out});
      std::cout << "indexed " << index.num_docs() << " documents, "
                << index.postings.size() << " terms -> " << index_out << "\n";
    } else if (extract_cmd->parsed()) {
      auto cfg = extract_corpus_opts.config();
      auto docs = dret::load_corpus(extract_corpus, cfg);
      auto stopwords = cfg.stopwords();
      auto index = dret::build_index(docs, extract_bm25.k1, extract_bm25.b);
      auto method = dret::pos_method_from_string(extract_opts.method);
      auto extractor = dret::make_extractor(method, index, stopwords,
                                            extract_opts.v, extract_opts.opts);
      std::ofstream out(extract_out, std::ios::binary);
      if (!out) throw dret::InputError("cannot write " + extract_out);
      for (const auto& doc : docs)
        for (const auto& [term, score] : extractor(doc).items)
          out << doc.id << "\t" << term << "\t" << dret::format_score(score)
              << "\n";
      dret::write_manifest(extract_out + ".manifest.json", "extract",
                           config_json(*extract_cmd), {extract_corpus},
                           {extract_out});
      std::cout << "wrote " << extract_out << "\n";
    } else if (genpairs->parsed()) {
      auto cfg = gp_corpus_opts.config();
      auto docs = dret::load_corpus(gp_dstar, cfg);
      std::vector<dret::Query> queries;
      if (!gp_queries.empty()) queries = dret::load_queries(gp_queries, cfg);
      auto stopwords = cfg.stopwords();
      auto index = dret::build_index(docs, gp_bm25.k1, gp_bm25.b);
      dret::SamplerConfig sampler;
      sampler.U = gp_u;
      sampler.V = gp_extract.v;
      sampler.m = gp_m;
      sampler.pos_method = dret::pos_method_from_string(gp_pos);
      sampler.neg_method = dret::neg_method_from_string(gp_neg);
      sampler.bm25_neg_mode = gp_neg_mode == "tail" ? dret::Bm25NegMode::tail
                                                    : dret::Bm25NegMode::after_top;
      if (gp_neg_mode != "tail" && gp_neg_mode != "after_top")
        throw dret::ConfigError("unknown bm25-neg-mode: " + gp_neg_mode);
      sampler.seed = gp_seed;
      auto instances = dret::generate_pairs(docs, queries, sampler, cfg,
                                            stopwords, index, gp_extract.opts);
      dret::serialize_pairs(instances, gp_out);
      std::vector<std::string> inputs{gp_dstar};
      if (!gp_queries.empty()) inputs.push_back(gp_queries);
      dret::write_manifest(gp_out + ".manifest.json", "genpairs",
                           config_json(*genpairs), inputs, {gp_out});
      std::cout << "wrote " << instances.size() << " instances -> " << gp_out
                << "\n";
    } else if (train_cmd->parsed()) {
      auto cfg = tr_corpus_opts.config();
      auto docs = dret::load_corpus(tr_corpus, cfg);
      auto dataset = dret::parse_pairs(tr_pairs);
      auto model = make_or_load_model(tr_model_in, docs, dataset, tr_nt, tr_nc,
                                      tr_seed);
      dret::TrainConfig train_cfg;
      train_cfg.lr = tr_lr;
      train_cfg.warmup_ratio = tr_warmup;
      train_cfg.epochs = tr_epochs;
      train_cfg.seed = tr_seed;
      auto trace = dret::train(model, dataset, dret::doc_token_map(docs),
                               train_cfg);
      dret::save_model(model, tr_model_out);
      std::ofstream trace_out(tr_trace, std::ios::binary);
      if (!trace_out) throw dret::InputError("cannot write " + tr_trace);
      trace_out << "epoch,mean_loss\n";
      for (size_t i = 0; i < trace.size(); ++i)
        trace_out << i + 1 << "," << dret::format_score(trace[i]) << "\n";
      std::vector<std::string> inputs{tr_pairs, tr_corpus};
      if (!tr_model_in.empty()) inputs.push_back(tr_model_in);
      dret::write_manifest(tr_model_out + ".manifest.json", "train",
                           config_json(*train_cmd), inputs,
                           {tr_model_out, tr_trace});
      std::cout << "trained " << trace.size() << " epochs; final mean loss "
                << (trace.empty() ? 0.0 : trace.back()) << " -> " << tr_model_out
                << "\n";
    } else if (search_cmd->parsed()) {
      auto cfg = se_corpus_opts.config();
      auto docs = dret::load_corpus(se_corpus, cfg);
      auto queries = dret::load_queries(se_queries, cfg);
      auto index = dret::build_index(docs, se_bm25.k1, se_bm25.b);
      auto mode = dret::search_mode_from_string(se_mode);
      std::unique_ptr<dret::MiniCoilModel> model;
      if (mode != dret::SearchMode::bm25) {
        if (se_model.empty())
          throw dret::ConfigError("search mode '" + se_mode +
                                  "' needs --model");
        model = std::make_unique<dret::MiniCoilModel>(dret::load_model(se_model));
        warn_vocab_coverage(*model, docs);
      }
      std::string tag = se_tag.empty() ? se_mode : se_tag;
      dret::write_run_file(index, queries, mode, model.get(),
                           dret::doc_token_map(docs), se_k, se_depth, tag,
                           se_out);
      std::vector<std::string> inputs{se_corpus, se_queries};
      if (!se_model.empty()) inputs.push_back(se_model);
      dret::write_manifest(se_out + ".manifest.json", "search",
                           config_json(*search_cmd), inputs, {se_out});
      std::cout << "wrote " << se_out << "\n";
    } else if (eval_cmd->parsed()) {
      auto qrels = dret::parse_qrels(ev_qrels);
      auto run = dret::parse_run(ev_run);
      std::vector<dret::MetricResult> results;
      for (auto metric : parse_metrics(ev_metrics))
        results.push_back(
            dret::evaluate_run(qrels, run, metric, ev_k, ev_irbu_p));
      std::string topics_csv = ev_prefix + ".topics.csv";
      std::string summary_csv = ev_prefix + ".summary.csv";
      dret::write_eval_csv(results, topics_csv, summary_csv);
      dret::write_manifest(ev_prefix + ".manifest.json", "eval",
                           config_json(*eval_cmd), {ev_run, ev_qrels},
                           {topics_csv, summary_csv});
      for (const auto& r : results)
        std::cout << dret::to_string(r.metric) << "@" << r.k << " mean "
                  << dret::format_score(r.mean) << " over "
                  << r.per_topic.size() << " topics (" << r.excluded_topics
                  << " excluded)\n";
    } else if (hsd_cmd->parsed()) {
      auto qrels = dret::parse_qrels(hsd_qrels);
      auto metric = dret::metric_from_string(hsd_metric);
      std::vector<dret::Run> runs;
      std::vector<std::string> tags;
      for (const auto& path : hsd_runs) {
        runs.push_back(dret::parse_run(path));
        tags.push_back(runs.back().tag.empty() ? path : runs.back().tag);
      }
      // shared topic order from the first result's per-topic map
      std::vector<std::vector<double>> scores;
      std::vector<std::string> topics;
      for (const auto& run : runs) {
        auto result = dret::evaluate_run(qrels, run, metric, hsd_k);
        if (topics.empty())
          for (const auto& [topic, _] : result.per_topic) topics.push_back(topic);
        std::vector<double> row;
        for (const auto& t : topics) row.push_back(result.per_topic.at(t));
        scores.push_back(std::move(row));
      }
      auto p = dret::randomized_tukey_hsd(scores, hsd_b, hsd_seed);
      std::ofstream out(hsd_out, std::ios::binary);
      if (!out) throw dret::InputError("cannot write " + hsd_out);
      out << "run";
      for (const auto& t : tags) out << "," << t;
      out << "\n";
      for (size_t i = 0; i < p.size(); ++i) {
        out << tags[i];
        for (double x : p[i]) out << "," << dret::format_score(x);
        out << "\n";
      }
      dret::write_manifest(hsd_out + ".manifest.json", "hsd",
                           config_json(*hsd_cmd),
                           [&] {
                             auto v = hsd_runs;
                             v.push_back(hsd_qrels);
                             return v;
                           }(),
                           {hsd_out});
      std::cout << "wrote " << hsd_out << "\n";
    } else if (sweep_cmd->parsed()) {
      if (sw_param != "U" && sw_param != "V")
        throw dret::ConfigError("sweep --param must be U or V");
      auto cfg = sw_corpus_opts.config();
      auto stopwords = cfg.stopwords();
      auto d_docs = dret::load_corpus(sw_corpus, cfg);
      auto dstar_docs = dret::load_corpus(sw_dstar, cfg);
      auto d_queries = dret::load_queries(sw_queries, cfg);
      std::vector<dret::Query> dstar_queries;
      if (!sw_dstar_queries.empty())
        dstar_queries = dret::load_queries(sw_dstar_queries, cfg);
      auto qrels = dret::parse_qrels(sw_qrels);
      auto d_index = dret::build_index(d_docs, sw_bm25.k1, sw_bm25.b);
      auto dstar_index = dret::build_index(dstar_docs, sw_bm25.k1, sw_bm25.b);
      auto d_tokens = dret::doc_token_map(d_docs);
      auto dstar_tokens = dret::doc_token_map(dstar_docs);

      std::ofstream out(sw_out, std::ios::binary);
      if (!out) throw dret::InputError("cannot write " + sw_out);
      out << "param,value,instances,ndcg,q,nerr,irbu\n";
      for (size_t value : parse_size_list(sw_values)) {
        dret::SamplerConfig sampler;
        sampler.U = sw_param == "U" ? value : sw_u;
        sampler.V = sw_param == "V" ? value : sw_extract.v;
        sampler.m = sw_m;
        sampler.pos_method = dret::pos_method_from_string(sw_pos);
        sampler.neg_method = dret::neg_method_from_string(sw_neg);
        sampler.bm25_neg_mode = sw_neg_mode == "tail"
                                    ? dret::Bm25NegMode::tail
                                    : dret::Bm25NegMode::after_top;
        sampler.seed = sw_seed;
        auto dataset = dret::generate_pairs(dstar_docs, dstar_queries, sampler,
                                            cfg, stopwords, dstar_index,
                                            sw_extract.opts);
        auto model = make_or_load_model("", dstar_docs, dataset, sw_nt, sw_nc,
                                        sw_seed);
        dret::TrainConfig train_cfg;
        train_cfg.lr = sw_lr;
        train_cfg.warmup_ratio = sw_warmup;
        train_cfg.epochs = sw_epochs;
        train_cfg.seed = sw_seed;
        dret::train(model, dataset, dstar_tokens, train_cfg);
        auto run = dret::run_search(d_index, d_queries, dret::SearchMode::adapted,
                                    &model, d_tokens, sw_k, sw_depth, "sweep");
        out << sw_param << "," << value << "," << dataset.size();
        for (auto metric : {dret::MetricKind::ndcg, dret::MetricKind::q,
                            dret::MetricKind::nerr, dret::MetricKind::irbu}) {
          auto result = dret::evaluate_run(qrels, run, metric, sw_k, sw_irbu_p);
          out << "," << dret::format_score(result.mean);
        }
        out << "\n";
      }
      out.close();
      dret::write_manifest(sw_out + ".manifest.json", "sweep",
                           config_json(*sweep_cmd),
                           [&] {
                             std::vector<std::string> v{sw_corpus, sw_dstar,
                                                        sw_queries, sw_qrels};
                             if (!sw_dstar_queries.empty())
                               v.push_back(sw_dstar_queries);
                             return v;
                           }(),
                           {sw_out});
      std::cout << "wrote " << sw_out << "\n";
    }
  } catch (const dret::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const dret::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}
