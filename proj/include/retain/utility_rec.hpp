#pragma once

#include <span>
#include <vector>

#include "retain/domain.hpp"

namespace retain {

// Where "days since last answer" is measured from.
enum class DaysSinceBasis { any_answer, last_correct };

struct UtilityRecConfig {
  // Lower bound on the complexity divisor; complexity is exactly 0 when every
  // global answer to a question was correct.
  double complexity_floor = 0.01;
  bool use_importance_complexity = true;
  std::size_t max_results = 10;
  DaysSinceBasis dayssince_basis = DaysSinceBasis::any_answer;
  // Importance used for questions without any feedback. Without it, an
  // unrated question would always score 0 under the weighted relevance.
  double unrated_importance = 0.5;

  void validate() const;
};

// Fractional days between the reference answer and `now`. Under
// last_correct, falls back to the last answer when none was correct.
double days_since(const UserQuestionStats& uq, Instant now,
                  DaysSinceBasis basis = DaysSinceBasis::any_answer);

// (1 - correct/total) * (days_since / days_to_forget).
// Throws Error(invalid_argument) when the user never answered the question.
double relevance(const UserQuestionStats& uq, const Question& q, Instant now,
                 DaysSinceBasis basis = DaysSinceBasis::any_answer);

// 1 - (correct + 1) / (total + 1), in [0, 1).
double complexity(const QuestionStats& qs);

// sum(feedback) / (#feedback + 1). Deliberately not the plain mean.
double importance(const QuestionStats& qs);

// importance(qs), or cfg.unrated_importance when there is no feedback.
double effective_importance(const QuestionStats& qs, const UtilityRecConfig& cfg);

// relevance * importance / max(complexity, complexity_floor).
double relevance_prime(const UserQuestionStats& uq, const Question& q, const QuestionStats& qs,
                       Instant now, const UtilityRecConfig& cfg);

// Previously answered, non-cooled-down questions of `bank`, most relevant
// first (ties by id), truncated to cfg.max_results.
std::vector<Recommendation> repetition_schedule(const UserId& user, const Snapshot& stats,
                                                std::span<const Question> bank,
                                                const CooldownSet& cooldown,
                                                const UtilityRecConfig& cfg, Instant now);

}  // namespace retain
