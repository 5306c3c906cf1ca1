#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "retain/domain.hpp"
#include "retain/json_io.hpp"
#include "retain/utility_rec.hpp"

namespace retain::sim {

// Benchmark population used by `retain simulate` without flags.
inline constexpr std::size_t kDefaultUsers = 50;
inline constexpr std::size_t kDefaultQuestions = 40;
inline constexpr std::uint64_t kDefaultSeed = 7;
inline constexpr double kDefaultHorizonDays = 3.0;
inline constexpr std::size_t kDefaultK = 3;

struct SyntheticLearner {
  UserId user_id;
  std::vector<double> skill;  // per question index, in [0,1]
  double memory_half_life = 7.0;  // days
  double session_cadence = 2.0;   // days between sessions

  // skill * 2^(-days_since / half_life), clamped to [0,1].
  double recall_probability(std::size_t question, double days_since) const;
};

struct PopulationParams {
  std::size_t max_review_sessions = 6;
  double review_fraction = 0.35;  // share of the bank revisited per review session
  double ability_min = 0.55, ability_max = 0.95;
  double easiness_spread = 0.25;  // per-question offset drawn from [-spread, spread]
  double half_life_min = 25.0, half_life_max = 45.0;
  double half_life_scale = 1.0;
  double cadence_min = 1.5, cadence_max = 4.0;
  double days_to_forget = 10.0;
  bool identical_learners = false;
};

struct Population {
  std::vector<SyntheticLearner> learners;
  std::vector<Question> questions;
  std::vector<AnswerEvent> events;  // sorted by timestamp
  Instant history_end{};
  std::uint64_t seed = 0;
};

// Each learner takes one placement session over the whole bank (easiest
// first, as the learner perceives it), then up to max_review_sessions
// sessions over random subsets, spaced by the learner's cadence. Answers
// are drawn from the recall model. Deterministic for a fixed seed.
Population generate_population(std::size_t n_users, std::size_t n_questions, std::uint64_t seed,
                               const PopulationParams& params = {});

// Days since the learner last saw each question at `now`; negative when never.
std::vector<double> days_since_exposure(const Population& pop, std::size_t learner, Instant now);

enum class Ranker { utility, random, oracle };
std::string_view to_string(Ranker r);

struct EvalReport {
  std::string recommender;
  double precision_at_1 = 0;
  double precision_at_k = 0;
  double baseline_random_precision = 0;       // analytic, at 1
  double baseline_random_precision_at_k = 0;  // analytic, at k
  double baseline_sigma = 0;                  // std. error of a random ranker at 1
  std::size_t k = 1;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
};

Json eval_report_to_json(const EvalReport& r);

// One trial per learner with at least one relevant question. At
// now = history_end + horizon_days a question is relevant when its true
// recall probability is below 0.5; precision@k is the share of trials with
// a relevant question among the ranker's top k.
EvalReport evaluate_utility_recommender(const Population& pop, double horizon_days, std::size_t k,
                                        std::uint64_t seed, Ranker ranker = Ranker::utility,
                                        const UtilityRecConfig& cfg = {});

// For each learner, the first few answers of its placement session form the
// current session and the other learners' placement sessions are the pool.
// Scores are expected first-exposure correctness along the recommended order
// (at 1 and mean over the first k); the baseline is the expectation under a
// uniformly random order.
EvalReport evaluate_session_recommender(const Population& pop, std::size_t k, std::uint64_t seed,
                                        std::size_t max_prefix = 3);

std::mt19937_64 trial_stream(std::uint64_t seed, std::uint64_t trial);

}  // namespace retain::sim
