#include <doctest.h>

#include <cmath>

#include "retain/error.hpp"
#include "retain/simulator.hpp"

using namespace retain;
using namespace retain::sim;

namespace {

std::string dump_events(const Population& pop) {
  std::string out;
  for (const auto& e : pop.events) out += log_record_to_json(e).dump() + "\n";
  return out;
}

double advantage(double half_life_scale, std::uint64_t seed) {
  PopulationParams p;
  p.half_life_scale = half_life_scale;
  auto pop = generate_population(kDefaultUsers, kDefaultQuestions, seed, p);
  UtilityRecConfig plain;
  plain.use_importance_complexity = false;
  auto r = evaluate_utility_recommender(pop, kDefaultHorizonDays, kDefaultK, seed, Ranker::utility, plain);
  return r.precision_at_1 - r.baseline_random_precision;
}

}  // namespace

TEST_CASE("recall model") {
  SyntheticLearner l{"u", {0.8, 1.0}, 10.0, 2.0};
  CHECK(l.recall_probability(0, 0) == doctest::Approx(0.8));
  CHECK(l.recall_probability(0, 10) == doctest::Approx(0.4));
  CHECK(l.recall_probability(1, 20) == doctest::Approx(0.25));
  CHECK(l.recall_probability(1, -100) == 1.0);
}

TEST_CASE("populations are seed-deterministic") {
  auto a = generate_population(8, 10, 3);
  auto b = generate_population(8, 10, 3);
  auto c = generate_population(8, 10, 4);
  CHECK(dump_events(a) == dump_events(b));
  CHECK(dump_events(a) != dump_events(c));
  CHECK(a.history_end == a.events.back().timestamp);
  CHECK(std::is_sorted(a.events.begin(), a.events.end(),
                       [](const auto& x, const auto& y) { return x.timestamp < y.timestamp; }));
  // events fold cleanly: no duplicate positions
  CHECK_NOTHROW(fold_stats(a.events));
}

TEST_CASE("smallest population has a single session") {
  auto pop = generate_population(1, 1, 1);
  REQUIRE(pop.events.size() == 1);
  CHECK(pop.events[0].session_id == "u001-s0");
  CHECK_THROWS_AS(generate_population(0, 5, 1), Error);
  CHECK_THROWS_AS(generate_population(5, 0, 1), Error);
}

TEST_CASE("observed correct share matches the recall model within 3 sigma") {
  for (std::uint64_t seed : {7u, 11u, 12u}) {
    auto pop = generate_population(kDefaultUsers, kDefaultQuestions, seed);
    std::map<QuestionId, std::size_t> index;
    for (std::size_t q = 0; q < pop.questions.size(); ++q) index[pop.questions[q].id] = q;
    std::map<UserId, std::size_t> learner;
    for (std::size_t u = 0; u < pop.learners.size(); ++u) learner[pop.learners[u].user_id] = u;

    // replay the log: each answer's probability follows from the previous exposure
    std::map<std::pair<UserId, QuestionId>, Instant> last;
    double expected = 0, variance = 0, observed = 0;
    for (const auto& e : pop.events) {
      const auto key = std::make_pair(*e.user_id, e.question_id);
      auto it = last.find(key);
      const double ds = it == last.end() ? 0.0 : fractional_days(it->second, e.timestamp);
      const double skill = pop.learners[learner.at(*e.user_id)].skill[index.at(e.question_id)];
      const double hl = pop.learners[learner.at(*e.user_id)].memory_half_life;
      const double p = std::clamp(skill * std::pow(2.0, -ds / hl), 0.0, 1.0);
      expected += p;
      variance += p * (1 - p);
      observed += e.correct ? 1 : 0;
      last[key] = e.timestamp;
    }
    CHECK(std::abs(observed - expected) <= 3 * std::sqrt(variance));
  }
}

TEST_CASE("oracle, random and utility rankers on the default population") {
  auto pop = generate_population(kDefaultUsers, kDefaultQuestions, kDefaultSeed);
  auto oracle = evaluate_utility_recommender(pop, kDefaultHorizonDays, kDefaultK, kDefaultSeed, Ranker::oracle);
  CHECK(oracle.precision_at_1 == 1.0);
  CHECK(oracle.precision_at_k == 1.0);
  CHECK(oracle.trials > 0);

  auto random = evaluate_utility_recommender(pop, kDefaultHorizonDays, kDefaultK, kDefaultSeed, Ranker::random);
  CHECK(std::abs(random.precision_at_1 - random.baseline_random_precision) <= 3 * random.baseline_sigma);
  CHECK(random.baseline_random_precision > 0.0);
  CHECK(random.baseline_random_precision < 1.0);
  CHECK(random.baseline_random_precision_at_k >= random.baseline_random_precision);

  UtilityRecConfig plain;
  plain.use_importance_complexity = false;
  auto utility =
      evaluate_utility_recommender(pop, kDefaultHorizonDays, kDefaultK, kDefaultSeed, Ranker::utility, plain);
  CHECK(utility.precision_at_1 > utility.baseline_random_precision);
  CHECK(utility.precision_at_1 < oracle.precision_at_1);
  for (const auto& r : {oracle, random, utility}) {
    CHECK(r.precision_at_1 >= 0.0);
    CHECK(r.precision_at_1 <= 1.0);
    CHECK(r.precision_at_k >= r.precision_at_1);
    CHECK(r.precision_at_k <= 1.0);
    CHECK(r.trials == oracle.trials);
  }
}

TEST_CASE("evaluation reports are reproducible") {
  auto pop = generate_population(20, 15, 5);
  auto a = evaluate_utility_recommender(pop, 3.0, 3, 5, Ranker::random);
  auto b = evaluate_utility_recommender(pop, 3.0, 3, 5, Ranker::random);
  CHECK(eval_report_to_json(a).dump() == eval_report_to_json(b).dump());
  auto s1 = evaluate_session_recommender(pop, 3, 5);
  auto s2 = evaluate_session_recommender(pop, 3, 5);
  CHECK(eval_report_to_json(s1).dump() == eval_report_to_json(s2).dump());
}

TEST_CASE("longer memory shrinks the advantage of forgetting-aware ranking") {
  double fast = 0, slow = 0;
  for (std::uint64_t seed : {7u, 8u, 9u}) {
    fast += advantage(1.0, seed);
    slow += advantage(8.0, seed);
  }
  CHECK(fast >= slow);
}

TEST_CASE("session recommender") {
  SUBCASE("identical learners complete recommended orderings at least as well as random ones") {
    PopulationParams p;
    p.identical_learners = true;
    auto pop = generate_population(20, 15, 3, p);
    auto r = evaluate_session_recommender(pop, 3, 3);
    CHECK(r.trials > 0);
    CHECK(r.precision_at_1 >= r.baseline_random_precision);
  }
  SUBCASE("a single candidate leaves nothing to order") {
    auto pop = generate_population(5, 2, 3);
    auto r = evaluate_session_recommender(pop, 3, 3, 1);
    CHECK(r.trials == 5);
    CHECK(r.precision_at_1 == doctest::Approx(r.baseline_random_precision));
    CHECK(r.precision_at_k == doctest::Approx(r.baseline_random_precision));
  }
  SUBCASE("one session is not enough") {
    auto pop = generate_population(1, 4, 3);
    CHECK_THROWS_AS(evaluate_session_recommender(pop, 3, 3), Error);
  }
}
