#include "retain/content_rec.hpp"

#include <algorithm>

#include "retain/error.hpp"

namespace retain {

const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> words = {
      "a",     "about", "after", "all",   "also",  "an",    "and",   "any",   "are",
      "as",    "at",    "be",    "been",  "but",   "by",    "can",   "could", "did",
      "do",    "does",  "for",   "from",  "had",   "has",   "have",  "he",    "her",
      "his",   "how",   "i",     "if",    "in",    "into",  "is",    "it",    "its",
      "me",    "my",    "no",    "not",   "of",    "on",    "or",    "our",   "she",
      "should","so",    "that",  "the",   "their", "them",  "then",  "there", "these",
      "they",  "this",  "those", "to",    "was",   "we",    "were",  "what",  "when",
      "where", "which", "who",   "whom",  "why",   "will",  "with",  "would", "you",
      "your",
  };
  return words;
}

namespace {

bool is_token_char(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

}  // namespace

FeatureSet FeatureExtractor::extract(std::string_view text) const {
  FeatureSet out;
  std::string token;
  auto flush = [&] {
    if (token.size() >= min_token_length && !stopwords.contains(token)) out.insert(token);
    token.clear();
  };
  for (unsigned char c : text) {
    if (is_token_char(c)) {
      token.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

DiceScore dice_similarity(const FeatureSet& a, const FeatureSet& b) {
  if (a.empty() && b.empty()) throw Error(ErrorKind::invalid_argument, "undefined similarity");
  std::size_t shared = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++shared;
      ++ia;
      ++ib;
    }
  }
  return {2 * shared, a.size() + b.size()};
}

std::string display_answer(const Question& q) {
  if (q.answer_text) return *q.answer_text;
  if (q.explanation) return *q.explanation;
  return q.prompt;
}

std::vector<QueryResult> answer_query_features(const FeatureSet& query, std::span<const Question> bank,
                                               std::size_t k, const SearchScope& scope) {
  if (query.empty()) throw Error(ErrorKind::invalid_argument, "query has no features");
  std::vector<QueryResult> hits;
  for (const Question& q : bank) {
    if (scope && q.app_id != *scope) continue;
    DiceScore s = dice_similarity(query, q.features);
    if (s.numerator == 0) continue;
    hits.push_back({q.id, s, s.value(), display_answer(q)});
  }
  std::sort(hits.begin(), hits.end(), [](const QueryResult& x, const QueryResult& y) {
    if (x.exact != y.exact) return x.exact > y.exact;
    return x.question_id < y.question_id;
  });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

std::vector<QueryResult> answer_query(std::string_view query, std::span<const Question> bank,
                                      const FeatureExtractor& fx, std::size_t k,
                                      const SearchScope& scope) {
  return answer_query_features(fx.extract(query), bank, k, scope);
}

}  // namespace retain
