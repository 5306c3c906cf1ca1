#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "retain/domain.hpp"
#include "retain/json_io.hpp"
#include "retain/session_rec.hpp"
#include "retain/utility_rec.hpp"

namespace retain {

// Read-only index over installed banks.
class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(std::vector<Bank> banks);

  const std::vector<Bank>& banks() const { return banks_; }
  const Bank* find_app(const std::string& app_id) const;
  const Question* find_question(const QuestionId& id) const;

  std::span<const Question> questions(const std::string& app_id) const;
  std::span<const Question> all_questions() const { return all_; }
  std::set<QuestionId> universe(const std::string& app_id) const;

  // App of the first question the session answered, if known.
  std::optional<std::string> app_of(const SessionLog& s) const;

  // Completed sessions grouped by app, in session-id order.
  std::map<std::string, std::vector<SessionLog>> session_pools(const Snapshot& snapshot) const;

 private:
  std::vector<Bank> banks_;
  std::vector<Question> all_;
  std::map<QuestionId, std::size_t> index_;
  std::map<std::string, std::pair<std::size_t, std::size_t>> app_range_;
};

// Rebuilds cooldowns from wrong answers: each sets expiry = timestamp + window.
CooldownSet cooldowns_from_events(std::span<const AnswerEvent> events, double cooldown_minutes);

// Session-based ordering for `current`, limited to `count`. When no
// neighbor qualifies the candidates are ordered by ascending complexity,
// then id, and carry detail["cold_start"] = 1.
std::vector<Recommendation> next_questions(const Catalog& catalog, const Snapshot& snapshot,
                                           std::span<const SessionLog> pool,
                                           const SessionLog& current, const std::string& app_id,
                                           const CooldownSet& cooldown, SessionRecConfig cfg,
                                           std::size_t count, Instant now);

}  // namespace retain
