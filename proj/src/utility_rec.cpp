#include "retain/utility_rec.hpp"

#include <algorithm>
#include <numeric>

#include "retain/error.hpp"

namespace retain {

void UtilityRecConfig::validate() const {
  if (!(complexity_floor > 0)) throw Error(ErrorKind::invalid_argument, "complexity_floor must be positive");
  if (max_results < 1) throw Error(ErrorKind::invalid_argument, "max_results must be >= 1");
  if (!(unrated_importance >= 0)) throw Error(ErrorKind::invalid_argument, "unrated_importance must be non-negative");
}

double days_since(const UserQuestionStats& uq, Instant now, DaysSinceBasis basis) {
  std::optional<Instant> ref = uq.last_answered_at;
  if (basis == DaysSinceBasis::last_correct && uq.last_correct_at) ref = uq.last_correct_at;
  if (!ref) {
    throw Error(ErrorKind::invalid_argument, "never answered; not schedulable for repetition");
  }
  return std::max(0.0, fractional_days(*ref, now));
}

double relevance(const UserQuestionStats& uq, const Question& q, Instant now, DaysSinceBasis basis) {
  if (uq.total_count == 0) {
    throw Error(ErrorKind::invalid_argument, "never answered; not schedulable for repetition");
  }
  const double wrong_share = 1.0 - static_cast<double>(uq.correct_count) / uq.total_count;
  return wrong_share * (days_since(uq, now, basis) / q.days_to_forget);
}

double complexity(const QuestionStats& qs) {
  return 1.0 - (qs.global_correct + 1.0) / (qs.global_total + 1.0);
}

double importance(const QuestionStats& qs) {
  const double sum = std::accumulate(qs.feedback_values.begin(), qs.feedback_values.end(), 0.0);
  return sum / (qs.feedback_values.size() + 1.0);
}

double effective_importance(const QuestionStats& qs, const UtilityRecConfig& cfg) {
  return qs.feedback_values.empty() ? cfg.unrated_importance : importance(qs);
}

double relevance_prime(const UserQuestionStats& uq, const Question& q, const QuestionStats& qs,
                       Instant now, const UtilityRecConfig& cfg) {
  const double rel = relevance(uq, q, now, cfg.dayssince_basis);
  return rel * effective_importance(qs, cfg) / std::max(complexity(qs), cfg.complexity_floor);
}

std::vector<Recommendation> repetition_schedule(const UserId& user, const Snapshot& stats,
                                                std::span<const Question> bank,
                                                const CooldownSet& cooldown,
                                                const UtilityRecConfig& cfg, Instant now) {
  std::vector<Recommendation> out;
  for (const Question& q : bank) {
    const UserQuestionStats* uq = stats.find_user_stats(user, q.id);
    if (uq == nullptr || uq->total_count == 0) continue;
    if (cooldown.active(q.id, now)) continue;

    QuestionStats qs;
    if (const QuestionStats* found = stats.find_question_stats(q.id)) qs = *found;

    Recommendation rec;
    rec.question_id = q.id;
    rec.source = RecommendationSource::utility_based;
    const double rel = relevance(*uq, q, now, cfg.dayssince_basis);
    const double imp = effective_importance(qs, cfg);
    const double cx = complexity(qs);
    const double rel_prime = rel * imp / std::max(cx, cfg.complexity_floor);
    rec.detail["rel"] = rel;
    rec.detail["importance"] = imp;
    rec.detail["complexity"] = cx;
    rec.detail["relprime"] = rel_prime;
    rec.detail["dayssince"] = days_since(*uq, now, cfg.dayssince_basis);
    rec.score = cfg.use_importance_complexity ? rel_prime : rel;
    out.push_back(std::move(rec));
  }
  std::sort(out.begin(), out.end(), [](const Recommendation& x, const Recommendation& y) {
    if (x.score != y.score) return x.score > y.score;
    return x.question_id < y.question_id;
  });
  if (out.size() > cfg.max_results) out.resize(cfg.max_results);
  return out;
}

}  // namespace retain
