#pragma once

#include <fstream>
#include <string>
#include <unordered_set>

#include "dret/common.hpp"

namespace dret {

class StopwordSet {
 public:
  StopwordSet() = default;
  explicit StopwordSet(std::unordered_set<std::string> words)
      : words_(std::move(words)) {}

  bool contains(const std::string& w) const { return words_.count(w) > 0; }
  size_t size() const { return words_.size(); }

  // One lowercase word per line, UTF-8. Blank lines ignored.
  static StopwordSet from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open stopword file: " + path);
    std::unordered_set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) words.insert(line);
    }
    return StopwordSet(std::move(words));
  }

  static const StopwordSet& english();

 private:
  std::unordered_set<std::string> words_;
};

// Bundled SMART-style English list.
inline const StopwordSet& StopwordSet::english() {
  static const StopwordSet set{[] {
    static const char* kWords[] = {
        "a", "about", "above", "after", "again", "against", "all", "also",
        "am", "an", "and", "any", "are", "aren", "as", "at", "be", "because",
        "been", "before", "being", "below", "between", "both", "but", "by",
        "can", "cannot", "could", "couldn", "did", "didn", "do", "does",
        "doesn", "doing", "don", "down", "during", "each", "else", "ever",
        "few", "for", "from", "further", "had", "hadn", "has", "hasn",
        "have", "haven", "having", "he", "her", "here", "hers", "herself",
        "him", "himself", "his", "how", "however", "i", "if", "in", "into",
        "is", "isn", "it", "its", "itself", "just", "let", "me", "more",
        "most", "mustn", "my", "myself", "no", "nor", "not", "of", "off",
        "on", "once", "only", "or", "other", "ought", "our", "ours",
        "ourselves", "out", "over", "own", "same", "shan", "she", "should",
        "shouldn", "since", "so", "some", "such", "than", "that", "the",
        "their", "theirs", "them", "themselves", "then", "there", "these",
        "they", "this", "those", "through", "to", "too", "under", "until",
        "up", "upon", "very", "was", "wasn", "we", "were", "weren", "what",
        "when", "where", "which", "while", "who", "whom", "why", "will",
        "with", "won", "would", "wouldn", "you", "your", "yours",
        "yourself", "yourselves",
    };
    std::unordered_set<std::string> w;
    for (const char* s : kWords) w.insert(s);
    return w;
  }()};
  return set;
}

}  // namespace dret
