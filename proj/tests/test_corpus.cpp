#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "dret/corpus.hpp"

using namespace dret;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  std::string path = "corpus_test_" + name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
  CHECK(tokenize("New Orleans restaurants", 16) ==
        std::vector<std::string>{"new", "orleans", "restaurants"});
  CHECK(tokenize("tennis-score rules!", 16) ==
        std::vector<std::string>{"tennis", "score", "rules"});
  CHECK(tokenize("a1 b2", 1) == std::vector<std::string>{"a1"});
  CHECK(tokenize("", 16).empty());
  CHECK(tokenize("...!!!", 16).empty());
}

TEST_CASE("tokenize truncates to max_tokens") {
  std::string text;
  for (int i = 0; i < 130; ++i) text += "w" + std::to_string(i) + " ";
  auto tokens = tokenize(text, 128);
  REQUIRE(tokens.size() == 128);
  CHECK(tokens.front() == "w0");
  CHECK(tokens.back() == "w127");
}

TEST_CASE("tokenize is idempotent on its own space-joined output") {
  for (const char* text : {"Hypothermia Treatment!", "a-b_c d", "X  y\tz",
                           "chrome download windows", "42 q7b"}) {
    auto once = tokenize(text, 100);
    std::string joined;
    for (const auto& t : once) {
      if (!joined.empty()) joined.push_back(' ');
      joined += t;
    }
    CHECK(tokenize(joined, 100) == once);
  }
}

TEST_CASE("tokenize(text, k) is a prefix of tokenize(text, k+1)") {
  std::string text = "social anxiety, cultural-appropriation cases; 7 more words here";
  for (size_t k = 1; k < 12; ++k) {
    auto shorter = tokenize(text, k);
    auto longer = tokenize(text, k + 1);
    REQUIRE(shorter.size() <= longer.size());
    for (size_t i = 0; i < shorter.size(); ++i) CHECK(shorter[i] == longer[i]);
  }
}

TEST_CASE("load_corpus tokenizes, truncates and preserves order") {
  std::string path = write_temp("ok.jsonl",
      R"({"id":"d1","text":"Hypothermia Treatment!"})" "\n"
      R"({"id":"d2","text":""})" "\n"
      R"({"id":"d3","title":"Social","text":"anxiety"})" "\n");
  CorpusConfig cfg;
  auto docs = load_corpus(path, cfg);
  REQUIRE(docs.size() == 3);
  CHECK(docs[0].id == "d1");
  CHECK(docs[0].tokens == std::vector<std::string>{"hypothermia", "treatment"});
  CHECK(docs[1].tokens.empty());
  CHECK(docs[2].tokens == std::vector<std::string>{"social", "anxiety"});
  std::remove(path.c_str());
}

TEST_CASE("load_corpus truncates to doc_max_tokens") {
  std::string text;
  for (int i = 0; i < 130; ++i) text += "t" + std::to_string(i) + " ";
  std::string path = write_temp(
      "long.jsonl", "{\"id\":\"d1\",\"text\":\"" + text + "\"}\n");
  auto docs = load_corpus(path, CorpusConfig{});
  REQUIRE(docs.size() == 1);
  CHECK(docs[0].tokens.size() == 128);
  CHECK(docs[0].tokens[0] == "t0");
  std::remove(path.c_str());
}

TEST_CASE("load_corpus rejects malformed lines and duplicate ids") {
  std::string bad = write_temp("bad.jsonl", "{\"id\":\"d1\",\"text\":\"x\"}\nnot json\n");
  CHECK_THROWS_WITH(load_corpus(bad, CorpusConfig{}),
                    Catch::Matchers::ContainsSubstring(":2"));
  std::remove(bad.c_str());

  std::string dup = write_temp("dup.jsonl",
      "{\"id\":\"d1\",\"text\":\"x\"}\n{\"id\":\"d1\",\"text\":\"y\"}\n");
  CHECK_THROWS_WITH(load_corpus(dup, CorpusConfig{}),
                    Catch::Matchers::ContainsSubstring("d1"));
  std::remove(dup.c_str());
}

TEST_CASE("load_queries parses TSV and truncates") {
  std::string long_query;
  for (int i = 0; i < 20; ++i) long_query += "w" + std::to_string(i) + " ";
  std::string path = write_temp("queries.tsv",
      "q1\tsocial anxiety\nq2\t\nq3\t" + long_query + "\n");
  auto queries = load_queries(path, CorpusConfig{});
  REQUIRE(queries.size() == 3);
  CHECK(queries[0].tokens == std::vector<std::string>{"social", "anxiety"});
  CHECK(queries[1].tokens.empty());
  CHECK(queries[2].tokens.size() == 16);
  std::remove(path.c_str());
}

TEST_CASE("load_queries rejects missing tabs with a line number") {
  std::string path = write_temp("badq.tsv", "q1\tfine\nq2 no tab here\n");
  CHECK_THROWS_WITH(load_queries(path, CorpusConfig{}),
                    Catch::Matchers::ContainsSubstring(":2"));
  std::remove(path.c_str());
}

TEST_CASE("bundled stopword list covers common words") {
  const auto& sw = StopwordSet::english();
  for (const char* w : {"is", "not", "that", "after", "all", "the"})
    CHECK(sw.contains(w));
  CHECK_FALSE(sw.contains("hypothermia"));
}
