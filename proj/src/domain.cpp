#include "retain/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "retain/error.hpp"

namespace retain {

std::string_view to_string(QuestionKind kind) {
  switch (kind) {
    case QuestionKind::multiple_choice: return "multiple_choice";
    case QuestionKind::sequencing: return "sequencing";
    case QuestionKind::text_completion: return "text_completion";
    case QuestionKind::image_area: return "image_area";
  }
  return "unknown";
}

std::optional<QuestionKind> parse_question_kind(std::string_view tag) {
  if (tag == "multiple_choice") return QuestionKind::multiple_choice;
  if (tag == "sequencing") return QuestionKind::sequencing;
  if (tag == "text_completion") return QuestionKind::text_completion;
  if (tag == "image_area") return QuestionKind::image_area;
  return std::nullopt;
}

std::string_view to_string(RecommendationSource source) {
  switch (source) {
    case RecommendationSource::session_based: return "session_based";
    case RecommendationSource::utility_based: return "utility_based";
    case RecommendationSource::content_based: return "content_based";
  }
  return "unknown";
}

QuestionKind kind_of(const AnswerKey& key) {
  switch (key.index()) {
    case 0: return QuestionKind::multiple_choice;
    case 1: return QuestionKind::sequencing;
    case 2: return QuestionKind::text_completion;
    default: return QuestionKind::image_area;
  }
}

std::vector<std::string> validate_question(const Question& q, bool require_features) {
  std::vector<std::string> violations;
  if (q.id.empty()) violations.emplace_back("id must not be empty");
  if (!(q.days_to_forget > 0) || !std::isfinite(q.days_to_forget)) {
    violations.emplace_back("days_to_forget must be positive");
  }
  if (require_features && q.features.empty()) {
    violations.emplace_back("features must not be empty");
  }
  if (kind_of(q.answer_key) != q.kind) {
    violations.emplace_back("answer_key kind mismatch");
    return violations;
  }

  const int n_options = static_cast<int>(q.options.size());
  if (auto* key = std::get_if<ChoiceKey>(&q.answer_key)) {
    if (key->correct.empty()) violations.emplace_back("answer_key has no correct choice");
    if (std::any_of(key->correct.begin(), key->correct.end(),
                    [&](int i) { return i < 0 || i >= n_options; })) {
      violations.emplace_back("answer_key choice index out of range");
    }
  } else if (auto* key = std::get_if<SequenceKey>(&q.answer_key)) {
    std::vector<int> sorted = key->order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expected(q.options.size());
    std::iota(expected.begin(), expected.end(), 0);
    if (sorted != expected) violations.emplace_back("answer_key is not a permutation of the options");
  } else if (auto* key = std::get_if<TextKey>(&q.answer_key)) {
    if (key->accepted.empty()) violations.emplace_back("answer_key has no accepted text");
  } else if (auto* key = std::get_if<AreaKey>(&q.answer_key)) {
    if (key->regions.empty()) violations.emplace_back("answer_key has no region");
    for (const Rect& r : key->regions) {
      bool in_unit = r.x0 >= 0 && r.y0 >= 0 && r.x1 <= 1 && r.y1 <= 1;
      if (!in_unit || r.x0 > r.x1 || r.y0 > r.y1) {
        violations.emplace_back("answer_key region outside the unit square");
        break;
      }
    }
  }
  return violations;
}

void SessionLog::add(const AnswerEvent& e) {
  if (session_id_.empty()) session_id_ = e.session_id;
  if (!user_id_ && e.user_id) user_id_ = e.user_id;

  auto pos = std::upper_bound(events_.begin(), events_.end(), e.order_position,
                              [](std::uint32_t p, const AnswerEvent& x) { return p < x.order_position; });
  events_.insert(pos, e);

  if (e.correct) correct_.insert(e.question_id);
  int position = static_cast<int>(e.order_position);
  auto [it, inserted] = first_position_.emplace(e.question_id, position);
  if (!inserted) it->second = std::min(it->second, position);
}

int SessionLog::current_rank() const {
  return events_.empty() ? 0 : static_cast<int>(events_.back().order_position);
}

std::optional<int> SessionLog::rank_of(const QuestionId& q) const {
  auto it = first_position_.find(q);
  if (it == first_position_.end()) return std::nullopt;
  return it->second;
}

const UserQuestionStats* Snapshot::find_user_stats(const UserId& u, const QuestionId& q) const {
  auto it = user_stats.find({u, q});
  return it == user_stats.end() ? nullptr : &it->second;
}

const QuestionStats* Snapshot::find_question_stats(const QuestionId& q) const {
  auto it = question_stats.find(q);
  return it == question_stats.end() ? nullptr : &it->second;
}

const SessionLog* Snapshot::find_session(const SessionId& s) const {
  auto it = sessions.find(s);
  return it == sessions.end() ? nullptr : &it->second;
}

bool StatsAccumulator::contains(const AnswerEvent& e) const {
  return seen_.contains({e.session_id, e.question_id, e.order_position});
}

void StatsAccumulator::add(const AnswerEvent& e) {
  if (!seen_.emplace(e.session_id, e.question_id, e.order_position).second) {
    throw Error(ErrorKind::conflict, "duplicate answer event (session '" + e.session_id +
                                         "', question '" + e.question_id + "', position " +
                                         std::to_string(e.order_position) + ")");
  }

  auto [sit, _] = snapshot_.sessions.try_emplace(e.session_id, e.session_id);
  sit->second.add(e);

  auto [qit, q_new] = snapshot_.question_stats.try_emplace(e.question_id);
  if (q_new) qit->second.question_id = e.question_id;
  qit->second.global_total += 1;
  if (e.correct) qit->second.global_correct += 1;

  if (!e.user_id) return;
  auto [uit, u_new] = snapshot_.user_stats.try_emplace({*e.user_id, e.question_id});
  UserQuestionStats& uq = uit->second;
  if (u_new) {
    uq.user_id = *e.user_id;
    uq.question_id = e.question_id;
  }
  uq.total_count += 1;
  if (!uq.last_answered_at || *uq.last_answered_at < e.timestamp) uq.last_answered_at = e.timestamp;
  if (e.correct) {
    uq.correct_count += 1;
    if (!uq.last_correct_at || *uq.last_correct_at < e.timestamp) uq.last_correct_at = e.timestamp;
  }
}

void StatsAccumulator::add(const FeedbackRecord& f) {
  if (!(f.value >= 0.0 && f.value <= 1.0)) {
    throw Error(ErrorKind::invalid_argument,
                "feedback value for '" + f.question_id + "' outside [0,1]");
  }
  auto [qit, q_new] = snapshot_.question_stats.try_emplace(f.question_id);
  if (q_new) qit->second.question_id = f.question_id;
  qit->second.feedback_values.push_back(f.value);
}

Snapshot fold_stats(std::span<const AnswerEvent> events, std::span<const FeedbackRecord> feedback) {
  StatsAccumulator acc;
  for (const auto& e : events) acc.add(e);
  for (const auto& f : feedback) acc.add(f);
  return acc.snapshot();
}

void CooldownSet::set(const QuestionId& q, Instant expiry) {
  auto [it, inserted] = entries_.emplace(q, expiry);
  if (!inserted && it->second < expiry) it->second = expiry;
}

bool CooldownSet::active(const QuestionId& q, Instant now) const {
  auto it = entries_.find(q);
  return it != entries_.end() && now < it->second;
}

std::optional<Instant> CooldownSet::expiry(const QuestionId& q) const {
  auto it = entries_.find(q);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

}  // namespace retain
