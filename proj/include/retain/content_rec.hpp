#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "retain/domain.hpp"

namespace retain {

// Common English function words; content words are never in it.
const std::set<std::string>& default_stopwords();

struct FeatureExtractor {
  std::set<std::string> stopwords = default_stopwords();
  std::size_t min_token_length = 2;

  // Lowercased ASCII, split on anything that is not a letter, digit or
  // non-ASCII byte, stopword and length filtered, deduplicated.
  FeatureSet extract(std::string_view text) const;
};

inline FeatureSet extract_features(std::string_view text, const FeatureExtractor& fx) {
  return fx.extract(text);
}

// 2|a ∩ b| / (|a| + |b|) kept as an exact fraction.
struct DiceScore {
  std::size_t numerator = 0;
  std::size_t denominator = 1;

  double value() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }

  std::strong_ordering operator<=>(const DiceScore& o) const {
    return numerator * o.denominator <=> o.numerator * denominator;
  }
  bool operator==(const DiceScore& o) const { return numerator * o.denominator == o.numerator * denominator; }
};

// Throws Error(invalid_argument) "undefined similarity" when both are empty.
DiceScore dice_similarity(const FeatureSet& a, const FeatureSet& b);

struct QueryResult {
  QuestionId question_id;
  DiceScore exact;
  double similarity = 0;
  std::string answer;
};

// nullopt searches every app.
using SearchScope = std::optional<std::string>;

// Top-k by similarity (ties by id); zero-similarity questions are dropped.
// Throws Error(invalid_argument) "query has no features".
std::vector<QueryResult> answer_query_features(const FeatureSet& query, std::span<const Question> bank,
                                               std::size_t k, const SearchScope& scope);

std::vector<QueryResult> answer_query(std::string_view query, std::span<const Question> bank,
                                      const FeatureExtractor& fx, std::size_t k,
                                      const SearchScope& scope);

// Text shown for a search hit: answer_text, else explanation, else the prompt.
std::string display_answer(const Question& q);

}  // namespace retain
