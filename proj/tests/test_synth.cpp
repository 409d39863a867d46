#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>

#include "dret/eval.hpp"
#include "dret/lexindex.hpp"
#include "dret/pipeline.hpp"
#include "dret/synth.hpp"

using namespace dret;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("synth benchmark is byte-identical across runs of the same seed") {
  namespace fs = std::filesystem;
  fs::create_directories("synth_a");
  fs::create_directories("synth_b");
  fs::create_directories("synth_c");
  auto a = synth_benchmark("synth_a", 9, 60, 6);
  auto b = synth_benchmark("synth_b", 9, 60, 6);
  auto c = synth_benchmark("synth_c", 10, 60, 6);
  for (const auto& [pa, pb] :
       {std::pair{a.corpus_d, b.corpus_d},
        std::pair{a.corpus_dstar, b.corpus_dstar},
        std::pair{a.queries, b.queries},
        std::pair{a.qrels, b.qrels}}) {
    CHECK(slurp(pa) == slurp(pb));
  }
  CHECK(slurp(a.corpus_d) != slurp(c.corpus_d));
  fs::remove_all("synth_a");
  fs::remove_all("synth_b");
  fs::remove_all("synth_c");
}

TEST_CASE("synth benchmark rejects undersized requests") {
  CHECK_THROWS_AS(synth_benchmark(".", 1, 10, 6), ConfigError);
  CHECK_THROWS_AS(synth_benchmark(".", 1, 60, 2), ConfigError);
}

TEST_CASE("synth benchmark is well-formed and lexically solvable") {
  namespace fs = std::filesystem;
  fs::create_directories("synth_t");
  auto paths = synth_benchmark("synth_t", 42, 80, 8);

  CorpusConfig cfg;
  auto docs = load_corpus(paths.corpus_d, cfg);
  auto dstar = load_corpus(paths.corpus_dstar, cfg);
  auto queries = load_queries(paths.queries, cfg);
  auto qrels = parse_qrels(paths.qrels);

  CHECK(docs.size() == 80);
  CHECK(dstar.size() == 80);
  REQUIRE(queries.size() == 8);
  CHECK(qrels.max_grade == 2);
  CHECK(qrels.judgments.size() == 8);

  // every topic has at least one grade-2 document
  for (const auto& [topic, judged] : qrels.judgments) {
    bool has_two = false;
    for (const auto& [doc, g] : judged) has_two |= g == 2;
    CHECK(has_two);
  }

  // the two corpora are disjoint by id but share topic vocabulary
  std::set<std::string> d_ids, x_ids;
  for (const auto& d : docs) d_ids.insert(d.id);
  for (const auto& d : dstar) x_ids.insert(d.id);
  CHECK(d_ids.size() == 80);
  CHECK(x_ids.size() == 80);
  for (const auto& id : x_ids) CHECK(d_ids.count(id) == 0);

  // plain BM25 on D already solves the benchmark well above chance
  auto index = build_index(docs);
  Run run;
  run.tag = "bm25";
  for (const auto& q : queries)
    for (const auto& hit : bm25_search(index, q.tokens, 10))
      run.rankings[q.id].push_back(hit.doc_id);
  auto result = evaluate_run(qrels, run, MetricKind::ndcg, 10);
  CHECK(result.mean > 0.3);

  fs::remove_all("synth_t");
}
