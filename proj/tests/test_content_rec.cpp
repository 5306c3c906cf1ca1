#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "retain/content_rec.hpp"
#include "retain/error.hpp"

using namespace retain;
using namespace retain::testing;

namespace {

FeatureSet random_features(std::mt19937_64& rng, int vocabulary, int max_size) {
  FeatureSet out;
  const int n = std::uniform_int_distribution<int>(0, max_size)(rng);
  for (int i = 0; i < n; ++i) {
    out.insert("w" + std::to_string(std::uniform_int_distribution<int>(0, vocabulary - 1)(rng)));
  }
  return out;
}

}  // namespace

TEST_CASE("feature extraction") {
  FeatureExtractor fx;
  CHECK(fx.extract(kTable4Query) == table4_query_features());
  CHECK(fx.extract("").empty());
  CHECK(fx.extract("Conflict conflict CONFLICT") == FeatureSet{"conflict"});
  CHECK(fx.extract("x y-z, QuickXplain!") == FeatureSet{"quickxplain"});
  CHECK(fx.extract("Größe der Menge") == FeatureSet{"größe", "der", "menge"});

  SUBCASE("custom stopwords and length") {
    FeatureExtractor custom{{"menge"}, 4};
    CHECK(custom.extract("Größe der Menge") == FeatureSet{"größe"});
  }
}

TEST_CASE("feature extraction is idempotent") {
  FeatureExtractor fx;
  std::mt19937_64 rng(11);
  const std::string alphabet = "abcXYZ019 ,.;!?-'\"";
  for (int round = 0; round < 500; ++round) {
    std::string text;
    const int len = std::uniform_int_distribution<int>(0, 60)(rng);
    for (int i = 0; i < len; ++i) {
      text += alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)];
    }
    const FeatureSet once = fx.extract(text);
    std::string joined;
    for (const auto& t : once) joined += t + " ";
    CHECK(fx.extract(joined) == once);
  }
}

TEST_CASE("dice similarity of the worked example") {
  const Bank bank = table4_bank();
  const FeatureSet query = table4_query_features();
  const DiceScore q6 = dice_similarity(query, bank.questions[5].features);
  CHECK(q6.numerator == 6);
  CHECK(q6.denominator == 9);
  CHECK(q6 == DiceScore{2, 3});
  CHECK(q6.value() == doctest::Approx(0.67).epsilon(0.01));
  CHECK(dice_similarity(query, bank.questions[3].features) == DiceScore{4, 13});
  CHECK(dice_similarity(query, bank.questions[0].features).numerator == 0);
}

TEST_CASE("dice edge cases") {
  CHECK(dice_similarity({"a", "b"}, {"a", "b"}) == DiceScore{1, 1});
  CHECK(dice_similarity({"a"}, {"b"}).numerator == 0);
  CHECK(dice_similarity({"a"}, {}).numerator == 0);
  CHECK_THROWS_WITH_AS(dice_similarity({}, {}), "undefined similarity", Error);
}

TEST_CASE("dice properties") {
  std::mt19937_64 rng(42);
  for (int round = 0; round < 2000; ++round) {
    FeatureSet a = random_features(rng, 12, 8);
    FeatureSet b = random_features(rng, 12, 8);
    if (a.empty() && b.empty()) continue;
    const DiceScore ab = dice_similarity(a, b);
    const DiceScore ba = dice_similarity(b, a);
    CHECK(ab.numerator == ba.numerator);
    CHECK(ab.denominator == ba.denominator);
    CHECK(ab.value() >= 0.0);
    CHECK(ab.value() <= 1.0);
    CHECK((ab == DiceScore{1, 1}) == (a == b));
    std::vector<std::string> shared;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(shared));
    CHECK((ab.numerator == 0) == shared.empty());
    auto [n, d] = oracle::dice(a, b);
    CHECK(ab.numerator == n);
    CHECK(ab.denominator == d);
  }
}

TEST_CASE("answer_query on the worked example") {
  const Bank bank = table4_bank();
  FeatureExtractor fx;
  auto hits = answer_query(kTable4Query, bank.questions, fx, 1, std::string("diagnosis"));
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].question_id == "q6");
  CHECK(hits[0].exact == DiceScore{2, 3});
  CHECK(hits[0].answer == "Answer of q6");

  hits = answer_query(kTable4Query, bank.questions, fx, 10, std::nullopt);
  std::vector<QuestionId> ids;
  for (const auto& h : hits) ids.push_back(h.question_id);
  // q1, q2, q3 and q5 share nothing with the query
  CHECK(ids == std::vector<QuestionId>{"q6", "q4"});

  CHECK(answer_query(kTable4Query, bank.questions, fx, 3, std::string("other")).empty());
  CHECK(answer_query("zzz qqq", bank.questions, fx, 3, std::nullopt).empty());
  CHECK_THROWS_WITH_AS(answer_query("the of a", bank.questions, fx, 3, std::nullopt), "query has no features",
                       Error);
}

TEST_CASE("query identical to a question's features ranks it first at 1") {
  const Bank bank = table4_bank();
  auto hits = answer_query_features(bank.questions[2].features, bank.questions, 3, std::nullopt);
  REQUIRE_FALSE(hits.empty());
  CHECK(hits[0].question_id == "q3");
  CHECK(hits[0].similarity == 1.0);
}

TEST_CASE("answer_query matches an exhaustive scan") {
  std::mt19937_64 rng(30);
  for (int round = 0; round < 300; ++round) {
    std::vector<Question> bank;
    for (int i = 1; i <= 30; ++i) {
      Question q = choice_question(qid(i), i % 3 == 0 ? "b" : "a");
      q.features = random_features(rng, 25, 6);
      if (q.features.empty()) q.features = {"w0"};
      bank.push_back(q);
    }
    FeatureSet query = random_features(rng, 25, 5);
    if (query.empty()) query = {"w1"};
    const SearchScope scope = round % 3 == 0 ? SearchScope("a") : std::nullopt;

    std::vector<std::tuple<double, std::size_t, std::size_t, std::string>> scan;
    for (const auto& q : bank) {
      if (scope && q.app_id != *scope) continue;
      auto [n, d] = oracle::dice(query, q.features);
      if (n == 0) continue;
      scan.emplace_back(-static_cast<double>(n) / d, n, d, q.id);
    }
    std::sort(scan.begin(), scan.end(), [](const auto& x, const auto& y) {
      // cross-multiplied comparison keeps exact ties exact
      const auto lhs = std::get<1>(x) * std::get<2>(y);
      const auto rhs = std::get<1>(y) * std::get<2>(x);
      return lhs != rhs ? lhs > rhs : std::get<3>(x) < std::get<3>(y);
    });
    if (scan.size() > 5) scan.resize(5);

    auto hits = answer_query_features(query, bank, 5, scope);
    REQUIRE(hits.size() == scan.size());
    std::set<QuestionId> seen;
    for (std::size_t i = 0; i < hits.size(); ++i) {
      CHECK(hits[i].question_id == std::get<3>(scan[i]));
      CHECK(hits[i].exact.numerator == std::get<1>(scan[i]));
      CHECK(seen.insert(hits[i].question_id).second);
      if (i > 0) CHECK(hits[i - 1].exact >= hits[i].exact);
    }
  }
}

TEST_CASE("adding a disjoint question leaves existing scores alone") {
  Bank bank = table4_bank();
  const auto before = answer_query_features(table4_query_features(), bank.questions, 10, std::nullopt);
  Question extra = choice_question("q7", "diagnosis");
  extra.features = {"unrelated", "topic"};
  bank.questions.push_back(extra);
  const auto after = answer_query_features(table4_query_features(), bank.questions, 10, std::nullopt);
  REQUIRE(before.size() == after.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(before[i].question_id == after[i].question_id);
    CHECK(before[i].exact.numerator == after[i].exact.numerator);
    CHECK(before[i].exact.denominator == after[i].exact.denominator);
  }
}

TEST_CASE("display_answer fallbacks") {
  Question q = choice_question("q", "a");
  q.answer_text = "text";
  CHECK(display_answer(q) == "text");
  q.answer_text.reset();
  CHECK(display_answer(q) == "Because of q");
  q.explanation.reset();
  CHECK(display_answer(q) == "Prompt of q");
}
