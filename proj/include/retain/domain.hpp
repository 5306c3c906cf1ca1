#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "retain/time.hpp"

namespace retain {

using QuestionId = std::string;
using SessionId = std::string;
using UserId = std::string;
using FeatureSet = std::set<std::string>;

enum class QuestionKind { multiple_choice, sequencing, text_completion, image_area };

// Lowercase tags used in bank files: "multiple_choice", "sequencing",
// "text_completion", "image_area".
std::string_view to_string(QuestionKind kind);
std::optional<QuestionKind> parse_question_kind(std::string_view tag);

// Axis-aligned rectangle in normalized [0,1]^2 image coordinates.
struct Rect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
  bool operator==(const Rect&) const = default;
};

struct ChoiceKey {
  std::set<int> correct;  // indices into Question::options
  bool operator==(const ChoiceKey&) const = default;
};

struct SequenceKey {
  std::vector<int> order;  // permutation of indices into Question::options
  bool operator==(const SequenceKey&) const = default;
};

struct TextKey {
  std::vector<std::string> accepted;
  bool operator==(const TextKey&) const = default;
};

struct AreaKey {
  std::vector<Rect> regions;
  bool operator==(const AreaKey&) const = default;
};

using AnswerKey = std::variant<ChoiceKey, SequenceKey, TextKey, AreaKey>;

QuestionKind kind_of(const AnswerKey& key);

struct Question {
  QuestionId id;
  std::string app_id;
  std::string prompt;
  QuestionKind kind = QuestionKind::multiple_choice;
  AnswerKey answer_key;
  std::vector<std::string> options;  // choices / items to order; empty otherwise
  FeatureSet features;
  double days_to_forget = 1.0;
  std::string category = "general";
  std::optional<std::string> explanation;
  std::optional<std::string> notification_text;
  std::optional<std::string> answer_text;  // human-readable answer shown by search
  std::optional<std::string> image_url;
};

// Returns every violated invariant; empty means the question is valid.
// `require_features` enforces a non-empty feature set (content retrieval).
std::vector<std::string> validate_question(const Question& q, bool require_features = false);

struct AnswerEvent {
  SessionId session_id;
  std::optional<UserId> user_id;  // absent for anonymous sessions
  QuestionId question_id;
  bool correct = false;
  std::uint32_t order_position = 1;  // 1-based within the session
  Instant timestamp{};
};

struct FeedbackRecord {
  UserId user_id;
  QuestionId question_id;
  double value = 0;  // in [0,1]
  Instant timestamp{};
};

// Events of one session, kept sorted by order_position.
class SessionLog {
 public:
  SessionLog() = default;
  explicit SessionLog(SessionId id) : session_id_(std::move(id)) {}

  void add(const AnswerEvent& e);

  const SessionId& session_id() const { return session_id_; }
  const std::optional<UserId>& user_id() const { return user_id_; }
  const std::vector<AnswerEvent>& events() const { return events_; }

  // Highest answered order position; 0 for an empty session.
  int current_rank() const;

  bool correct(const QuestionId& q) const { return correct_.contains(q); }
  const std::set<QuestionId>& correct_set() const { return correct_; }

  // r(q, s): the position at which q was first posed in this session.
  std::optional<int> rank_of(const QuestionId& q) const;
  const std::map<QuestionId, int>& ranks() const { return first_position_; }

 private:
  SessionId session_id_;
  std::optional<UserId> user_id_;
  std::vector<AnswerEvent> events_;
  std::set<QuestionId> correct_;
  std::map<QuestionId, int> first_position_;
};

struct UserQuestionStats {
  UserId user_id;
  QuestionId question_id;
  std::uint32_t correct_count = 0;
  std::uint32_t total_count = 0;
  std::optional<Instant> last_answered_at;
  std::optional<Instant> last_correct_at;

  bool operator==(const UserQuestionStats&) const = default;
};

struct QuestionStats {
  QuestionId question_id;
  std::uint32_t global_correct = 0;
  std::uint32_t global_total = 0;
  std::vector<double> feedback_values;

  bool operator==(const QuestionStats&) const = default;
};

enum class RecommendationSource { session_based, utility_based, content_based };
std::string_view to_string(RecommendationSource source);

struct Recommendation {
  QuestionId question_id;
  double score = 0;
  RecommendationSource source = RecommendationSource::session_based;
  std::map<std::string, double> detail;
};

using UserQuestionKey = std::pair<UserId, QuestionId>;

struct Snapshot {
  std::map<UserQuestionKey, UserQuestionStats> user_stats;
  std::map<QuestionId, QuestionStats> question_stats;
  std::map<SessionId, SessionLog> sessions;

  const UserQuestionStats* find_user_stats(const UserId& u, const QuestionId& q) const;
  const QuestionStats* find_question_stats(const QuestionId& q) const;
  const SessionLog* find_session(const SessionId& s) const;
};

// Incremental fold over the event log. Rejects a repeated
// (session, question, position) triple with ErrorKind::conflict.
class StatsAccumulator {
 public:
  void add(const AnswerEvent& e);
  void add(const FeedbackRecord& f);

  bool contains(const AnswerEvent& e) const;
  const Snapshot& snapshot() const { return snapshot_; }

 private:
  Snapshot snapshot_;
  std::set<std::tuple<SessionId, QuestionId, std::uint32_t>> seen_;
};

Snapshot fold_stats(std::span<const AnswerEvent> events,
                    std::span<const FeedbackRecord> feedback = {});

// Per-session cooldown of questions answered wrongly.
class CooldownSet {
 public:
  // Keeps the later of the existing and the new expiry.
  void set(const QuestionId& q, Instant expiry);
  bool active(const QuestionId& q, Instant now) const;
  std::optional<Instant> expiry(const QuestionId& q) const;
  const std::map<QuestionId, Instant>& entries() const { return entries_; }

 private:
  std::map<QuestionId, Instant> entries_;
};

}  // namespace retain
