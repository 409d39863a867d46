#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "dret/eval.hpp"

using namespace dret;
using Catch::Approx;

namespace {

std::unordered_map<std::string, int> qmap(
    std::initializer_list<std::pair<const char*, int>> pairs) {
  std::unordered_map<std::string, int> m;
  for (const auto& [d, g] : pairs) m[d] = g;
  return m;
}

// Independent metric oracles, written as direct transcriptions of the
// definitions over an explicit grade list rather than the incremental
// loops in eval.hpp.
std::vector<int> grades_of(const std::unordered_map<std::string, int>& qrels,
                           const std::vector<std::string>& ranking) {
  std::vector<int> g;
  for (const auto& d : ranking) {
    auto it = qrels.find(d);
    g.push_back(it == qrels.end() ? 0 : it->second);
  }
  return g;
}

std::vector<int> ideal_of(const std::unordered_map<std::string, int>& qrels) {
  std::vector<int> g;
  for (const auto& [d, grade] : qrels)
    if (grade > 0) g.push_back(grade);
  std::sort(g.begin(), g.end(), std::greater<int>());
  return g;
}

double dcg_oracle(const std::vector<int>& grades, size_t k) {
  double s = 0.0;
  for (size_t r = 1; r <= grades.size() && r <= k; ++r)
    s += (std::pow(2.0, grades[r - 1]) - 1.0) / std::log2(r + 1.0);
  return s;
}

double ndcg_oracle(const std::unordered_map<std::string, int>& qrels,
                   const std::vector<std::string>& ranking, size_t k) {
  double ideal = dcg_oracle(ideal_of(qrels), k);
  return ideal > 0.0 ? dcg_oracle(grades_of(qrels, ranking), k) / ideal : 0.0;
}

double q_oracle(const std::unordered_map<std::string, int>& qrels,
                const std::vector<std::string>& ranking, size_t k) {
  auto g = grades_of(qrels, ranking);
  auto ideal = ideal_of(qrels);
  if (ideal.empty()) return 0.0;
  double sum = 0.0;
  for (size_t r = 1; r <= g.size() && r <= k; ++r) {
    if (g[r - 1] <= 0) continue;
    double count = 0.0, cg = 0.0, cg_ideal = 0.0;
    for (size_t i = 0; i < r; ++i) {
      if (g[i] > 0) count += 1.0;
      cg += g[i];
      cg_ideal += i < ideal.size() ? ideal[i] : 0;
    }
    sum += (count + cg) / (static_cast<double>(r) + cg_ideal);
  }
  return sum / static_cast<double>(std::min(ideal.size(), k));
}

double err_oracle(const std::vector<int>& grades, size_t k, int max_grade) {
  double value = 0.0;
  for (size_t r = 1; r <= grades.size() && r <= k; ++r) {
    double stop = (std::pow(2.0, grades[r - 1]) - 1.0) / std::pow(2.0, max_grade);
    double cont = 1.0;
    for (size_t i = 1; i < r; ++i)
      cont *= 1.0 - (std::pow(2.0, grades[i - 1]) - 1.0) / std::pow(2.0, max_grade);
    value += cont * stop / static_cast<double>(r);
  }
  return value;
}

double nerr_oracle(const std::unordered_map<std::string, int>& qrels,
                   const std::vector<std::string>& ranking, size_t k,
                   int max_grade) {
  double best = err_oracle(ideal_of(qrels), k, max_grade);
  return best > 0.0 ? err_oracle(grades_of(qrels, ranking), k, max_grade) / best
                    : 0.0;
}

double irbu_oracle(const std::unordered_map<std::string, int>& qrels,
                   const std::vector<std::string>& ranking, size_t k,
                   int max_grade, double p) {
  auto g = grades_of(qrels, ranking);
  double prod = 1.0;
  for (size_t r = 1; r <= g.size() && r <= k; ++r)
    prod *= 1.0 - std::pow(p, static_cast<double>(r - 1)) *
                      static_cast<double>(g[r - 1]) / max_grade;
  return 1.0 - prod;
}

}  // namespace

TEST_CASE("parse_qrels reads the fixture and reports bad lines") {
  {
    std::ofstream out("eval_qrels.txt", std::ios::binary);
    out << "t1 0 d1 2\nt1 0 d2 1\n\nt2 0 d9 0\n";
  }
  auto qrels = parse_qrels("eval_qrels.txt");
  CHECK(qrels.judgments.size() == 2);
  CHECK(qrels.judgments.at("t1").at("d1") == 2);
  CHECK(qrels.judgments.at("t2").at("d9") == 0);
  CHECK(qrels.max_grade == 2);
  std::remove("eval_qrels.txt");

  {
    std::ofstream out("eval_qrels_bad.txt", std::ios::binary);
    out << "t1 0 d1 2\nt1 0 d1\n";
  }
  CHECK_THROWS_WITH(parse_qrels("eval_qrels_bad.txt"),
                    Catch::Matchers::ContainsSubstring(":2"));
  std::remove("eval_qrels_bad.txt");

  {
    std::ofstream out("eval_qrels_dup.txt", std::ios::binary);
    out << "t1 0 d1 2\nt1 0 d1 1\n";
  }
  CHECK_THROWS_AS(parse_qrels("eval_qrels_dup.txt"), InputError);
  std::remove("eval_qrels_dup.txt");

  CHECK_THROWS_AS(parse_qrels("eval_no_such_file.txt"), InputError);
}

TEST_CASE("parse_run re-sorts by score then doc id and rejects duplicates") {
  {
    std::ofstream out("eval_run.txt", std::ios::binary);
    out << "t1 Q0 dB 1 0.5 tag\n"
        << "t1 Q0 dA 2 0.9 tag\n"
        << "t1 Q0 dC 3 0.5 tag\n"
        << "t2 Q0 dZ 1 1.0 tag\n";
  }
  auto run = parse_run("eval_run.txt");
  CHECK(run.tag == "tag");
  CHECK(run.rankings.at("t1") ==
        std::vector<std::string>{"dA", "dB", "dC"});  // tie dB<dC
  CHECK(run.rankings.at("t2") == std::vector<std::string>{"dZ"});
  std::remove("eval_run.txt");

  {
    std::ofstream out("eval_run_dup.txt", std::ios::binary);
    out << "t1 Q0 dA 1 0.9 tag\nt1 Q0 dA 2 0.5 tag\n";
  }
  CHECK_THROWS_AS(parse_run("eval_run_dup.txt"), InputError);
  std::remove("eval_run_dup.txt");

  {
    std::ofstream out("eval_run_bad.txt", std::ios::binary);
    out << "t1 Q0 dA 1 not_a_score tag\n";
  }
  CHECK_THROWS_WITH(parse_run("eval_run_bad.txt"),
                    Catch::Matchers::ContainsSubstring(":1"));
  std::remove("eval_run_bad.txt");
}

TEST_CASE("ndcg matches the hand fixture") {
  auto qrels = qmap({{"d1", 2}, {"d2", 1}});
  std::vector<std::string> run{"d2", "d1", "d3"};
  double log2_3 = std::log2(3.0);
  double expected = (1.0 + 3.0 / log2_3) / (3.0 + 1.0 / log2_3);
  CHECK(ndcg_at_k(qrels, run, 3) == Approx(expected).epsilon(1e-12));
  CHECK(ndcg_at_k(qrels, run, 3) == Approx(0.79671).margin(1e-5));
  CHECK(ndcg_at_k(qrels, {"d1", "d2"}, 3) == Approx(1.0).margin(1e-12));
  CHECK(ndcg_at_k(qrels, {}, 3) == 0.0);
  CHECK(ndcg_at_k(qrels, {"d9", "d8"}, 2) == 0.0);
  CHECK_THROWS_AS(ndcg_at_k(qrels, run, 0), ConfigError);
}

TEST_CASE("q-measure matches the hand fixture") {
  auto qrels = qmap({{"d1", 2}, {"d2", 1}});
  std::vector<std::string> run{"d2", "d1", "d3"};
  CHECK(q_measure_at_k(qrels, run, 3) == Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(q_measure_at_k(qrels, run, 3) == Approx(0.83333).margin(1e-5));
  CHECK(q_measure_at_k(qrels, {"d1", "d2"}, 3) == Approx(1.0).margin(1e-12));
  CHECK(q_measure_at_k(qrels, {}, 3) == 0.0);
}

TEST_CASE("nerr matches the hand fixture") {
  auto qrels = qmap({{"d1", 2}, {"d2", 1}});
  std::vector<std::string> run{"d2", "d1"};
  // observed 0.53125 over ideal 0.78125
  CHECK(nerr_at_k(qrels, run, 2, 2) == Approx(0.68).epsilon(1e-12));
  CHECK(nerr_at_k(qrels, {"d1", "d2"}, 2, 2) == Approx(1.0).margin(1e-12));
  CHECK(nerr_at_k(qrels, {}, 2, 2) == 0.0);
}

TEST_CASE("irbu golden fixtures") {
  // frozen from a high-precision evaluation of the documented closed form
  auto qrels = qmap({{"d1", 2}, {"d2", 1}});
  CHECK(irbu_at_k(qrels, {"d2", "d1", "d3"}, 3, 2) ==
        Approx(0.995).margin(1e-12));

  auto single = qmap({{"x", 2}});
  CHECK(irbu_at_k(single, {"a", "b", "x"}, 3, 2) ==
        Approx(0.9801).margin(1e-12));

  auto three = qmap({{"a", 2}, {"b", 1}, {"c", 1}});
  CHECK(irbu_at_k(three, {"b", "c", "a"}, 3, 2) ==
        Approx(0.99497525).margin(1e-12));

  CHECK(irbu_at_k(qrels, {}, 10, 2) == 0.0);
  CHECK(irbu_at_k(qrels, {"d9"}, 10, 2) == 0.0);
  CHECK(irbu_at_k(qrels, {"d1"}, 10, 2) == Approx(1.0).margin(1e-12));
  CHECK_THROWS_AS(irbu_at_k(qrels, {"d1"}, 10, 2, 1.0), ConfigError);

  // a perfect hit in rank 1 at k = 10 sits near but below 1, and a
  // grade-2 document at rank 10 still contributes substantially
  auto deep = qmap({{"hit", 2}});
  std::vector<std::string> tail(9, "miss0");
  for (size_t i = 0; i < 9; ++i) tail[i] = "miss" + std::to_string(i);
  tail.push_back("hit");
  double at10 = irbu_at_k(deep, tail, 10, 2);
  CHECK(at10 == Approx(std::pow(0.99, 9)).margin(1e-12));
  CHECK(at10 > 0.9);
}

TEST_CASE("all four metrics never decrease when a better doc moves up") {
  auto qrels = qmap({{"dA", 2}, {"dB", 1}});
  std::vector<std::string> docs{"dA", "dB", "dC", "dD"};
  std::sort(docs.begin(), docs.end());
  do {
    auto grade = [&](const std::string& d) {
      auto it = qrels.find(d);
      return it == qrels.end() ? 0 : it->second;
    };
    for (size_t i = 0; i + 1 < docs.size(); ++i) {
      if (grade(docs[i]) >= grade(docs[i + 1])) continue;
      auto better = docs;
      std::swap(better[i], better[i + 1]);  // higher grade moves up
      for (size_t k = 1; k <= 4; ++k) {
        CHECK(ndcg_at_k(qrels, better, k) >= ndcg_at_k(qrels, docs, k) - 1e-12);
        CHECK(q_measure_at_k(qrels, better, k) >=
              q_measure_at_k(qrels, docs, k) - 1e-12);
        CHECK(nerr_at_k(qrels, better, k, 2) >=
              nerr_at_k(qrels, docs, k, 2) - 1e-12);
        CHECK(irbu_at_k(qrels, better, k, 2) >=
              irbu_at_k(qrels, docs, k, 2) - 1e-12);
      }
    }
  } while (std::next_permutation(docs.begin(), docs.end()));
}

TEST_CASE("metrics agree with independent oracles on random topics") {
  Rng rng(314);
  for (int trial = 0; trial < 200; ++trial) {
    std::unordered_map<std::string, int> qrels;
    size_t n_judged = 1 + rng.next_below(8);
    int max_grade = 0;
    for (size_t i = 0; i < n_judged; ++i) {
      int g = static_cast<int>(rng.next_below(4));
      qrels["d" + std::to_string(i)] = g;
      max_grade = std::max(max_grade, g);
    }
    if (max_grade == 0) qrels["d0"] = max_grade = 1;
    std::vector<std::string> ranking;
    for (size_t i = 0; i < 12; ++i) ranking.push_back("d" + std::to_string(i));
    Rng(rng.next_u64()).shuffle(ranking);
    ranking.resize(1 + rng.next_below(12));
    size_t k = 1 + rng.next_below(12);

    CHECK(ndcg_at_k(qrels, ranking, k) ==
          Approx(ndcg_oracle(qrels, ranking, k)).margin(1e-9));
    CHECK(q_measure_at_k(qrels, ranking, k) ==
          Approx(q_oracle(qrels, ranking, k)).margin(1e-9));
    CHECK(nerr_at_k(qrels, ranking, k, max_grade) ==
          Approx(nerr_oracle(qrels, ranking, k, max_grade)).margin(1e-9));
    CHECK(irbu_at_k(qrels, ranking, k, max_grade) ==
          Approx(irbu_oracle(qrels, ranking, k, max_grade, 0.99)).margin(1e-9));

    for (double v : {ndcg_at_k(qrels, ranking, k),
                     q_measure_at_k(qrels, ranking, k),
                     nerr_at_k(qrels, ranking, k, max_grade),
                     irbu_at_k(qrels, ranking, k, max_grade)}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("evaluate_run composes per-topic scores and exclusion rules") {
  Qrels qrels;
  qrels.judgments["t1"] = {{"d1", 2}, {"d2", 1}};
  qrels.judgments["t2"] = {{"d9", 0}};  // no relevant docs: excluded
  qrels.judgments["t3"] = {{"d5", 1}};  // missing from run: scores 0
  qrels.max_grade = 2;

  Run run;
  run.rankings["t1"] = {"d2", "d1", "d3"};
  run.rankings["t9"] = {"d1"};  // not judged; ignored

  auto result = evaluate_run(qrels, run, MetricKind::ndcg, 3);
  CHECK(result.excluded_topics == 1);
  REQUIRE(result.per_topic.size() == 2);
  CHECK(result.per_topic.at("t1") == Approx(0.79671).margin(1e-5));
  CHECK(result.per_topic.at("t3") == 0.0);
  CHECK(result.mean == Approx(result.per_topic.at("t1") / 2.0).margin(1e-12));

  Run disjoint;
  disjoint.rankings["zz"] = {"d1"};
  CHECK_THROWS_AS(evaluate_run(qrels, disjoint, MetricKind::ndcg, 3),
                  InputError);
}

TEST_CASE("tukey hsd: identical runs are indistinguishable") {
  std::vector<std::vector<double>> scores{{0.4, 0.5, 0.6, 0.7},
                                          {0.4, 0.5, 0.6, 0.7}};
  auto p = randomized_tukey_hsd(scores, 200, 1);
  CHECK(p[0][1] == Approx(1.0));
  CHECK(p[0][0] == 1.0);
  CHECK(p[1][1] == 1.0);
}

TEST_CASE("tukey hsd: a large constant separation is significant") {
  Rng rng(11);
  std::vector<std::vector<double>> scores(2, std::vector<double>(20));
  for (size_t t = 0; t < 20; ++t) {
    scores[0][t] = rng.next_double(0.0, 1.0);
    scores[1][t] = scores[0][t] + 10.0;
  }
  auto p = randomized_tukey_hsd(scores, 2000, 7);
  CHECK(p[0][1] < 0.05);
  CHECK(p[0][1] == p[1][0]);
}

TEST_CASE("tukey hsd: symmetric, reproducible, shift-invariant") {
  Rng rng(21);
  std::vector<std::vector<double>> scores(3, std::vector<double>(10));
  for (auto& row : scores)
    for (double& x : row) x = rng.next_double(0.0, 1.0);

  auto p1 = randomized_tukey_hsd(scores, 500, 5);
  auto p2 = randomized_tukey_hsd(scores, 500, 5);
  CHECK(p1 == p2);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(p1[i][i] == 1.0);
    for (size_t j = 0; j < 3; ++j) {
      CHECK(p1[i][j] == p1[j][i]);
      CHECK(p1[i][j] > 0.0);
      CHECK(p1[i][j] <= 1.0);
    }
  }

  // adding a per-topic constant to every run changes nothing
  auto shifted = scores;
  for (size_t t = 0; t < 10; ++t)
    for (size_t i = 0; i < 3; ++i) shifted[i][t] += 0.123 * t;
  CHECK(randomized_tukey_hsd(shifted, 500, 5) == p1);

  CHECK_THROWS_AS(randomized_tukey_hsd({{0.1, 0.2}}, 10, 1), InputError);
  CHECK_THROWS_AS(randomized_tukey_hsd({{0.1}, {0.2}}, 10, 1), InputError);
  CHECK_THROWS_AS(randomized_tukey_hsd({{0.1, 0.2}, {0.3}}, 10, 1), InputError);
}
