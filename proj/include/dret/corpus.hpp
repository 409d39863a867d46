#pragma once

#include <cctype>
#include <cstddef>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "dret/common.hpp"
#include "dret/stopwords.hpp"

namespace dret {

struct Document {
  std::string id;
  std::string text;
  std::vector<std::string> tokens;
};

struct Query {
  std::string id;
  std::string text;
  std::vector<std::string> tokens;
};

struct CorpusConfig {
  size_t doc_max_tokens = 128;
  size_t query_max_tokens = 16;
  std::optional<std::string> stopword_path;

  void validate() const {
    if (doc_max_tokens < 1 || query_max_tokens < 1)
      throw ConfigError("token limits must be >= 1");
  }

  StopwordSet stopwords() const {
    return stopword_path ? StopwordSet::from_file(*stopword_path)
                         : StopwordSet::english();
  }
};

// Lowercase, split on every non-alphanumeric byte, keep the first
// max_tokens segments. Bytes >= 0x80 are kept as-is so non-ASCII words
// survive untouched.
inline std::vector<std::string> tokenize(std::string_view text,
                                         size_t max_tokens) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty() && tokens.size() < max_tokens) tokens.push_back(cur);
    cur.clear();
  };
  for (unsigned char c : text) {
    if (std::isalnum(c) || c >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
      if (tokens.size() >= max_tokens) return tokens;
    }
  }
  flush();
  return tokens;
}

// JSONL corpus: one object per line with "id" and "text"; an optional
// "title" is prepended to the text before tokenization.
inline std::vector<Document> load_corpus(const std::string& path,
                                         const CorpusConfig& config) {
  config.validate();
  std::ifstream in(path);
  if (!in) throw InputError("cannot open corpus file: " + path);
  std::vector<Document> docs;
  std::unordered_set<std::string> seen;
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
    if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string() ||
        !obj.contains("text") || !obj["text"].is_string()) {
      throw InputError(path + ":" + std::to_string(lineno) +
                       ": expected object with string fields id/text");
    }
    Document d;
    d.id = obj["id"].get<std::string>();
    if (d.id.empty())
      throw InputError(path + ":" + std::to_string(lineno) + ": empty id");
    if (!seen.insert(d.id).second)
      throw InputError(path + ":" + std::to_string(lineno) +
                       ": duplicate document id: " + d.id);
    d.text = obj["text"].get<std::string>();
    if (obj.contains("title") && obj["title"].is_string()) {
      std::string title = obj["title"].get<std::string>();
      if (!title.empty()) d.text = title + " " + d.text;
    }
    d.tokens = tokenize(d.text, config.doc_max_tokens);
    docs.push_back(std::move(d));
  }
  return docs;
}

// Queries: 2-column TSV, id TAB text.
inline std::vector<Query> load_queries(const std::string& path,
                                       const CorpusConfig& config) {
  config.validate();
  std::ifstream in(path);
  if (!in) throw InputError("cannot open query file: " + path);
  std::vector<Query> queries;
  std::unordered_set<std::string> seen;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw InputError(path + ":" + std::to_string(lineno) +
                       ": expected id TAB text");
    Query q;
    q.id = line.substr(0, tab);
    if (q.id.empty())
      throw InputError(path + ":" + std::to_string(lineno) + ": empty id");
    if (!seen.insert(q.id).second)
      throw InputError(path + ":" + std::to_string(lineno) +
                       ": duplicate query id: " + q.id);
    q.text = line.substr(tab + 1);
    q.tokens = tokenize(q.text, config.query_max_tokens);
    queries.push_back(std::move(q));
  }
  return queries;
}

}  // namespace dret
