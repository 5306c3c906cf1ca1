#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>

#include "retain/domain.hpp"
#include "retain/json_io.hpp"

namespace retain {

struct Share {
  std::uint32_t correct = 0;
  std::uint32_t total = 0;

  // Absent rather than 0 when nothing was answered.
  std::optional<double> value() const {
    if (total == 0) return std::nullopt;
    return static_cast<double>(correct) / total;
  }
};

struct KnowledgeLevelReport {
  std::string app_id;
  std::optional<UserId> user_id;
  bool personal_included = false;
  // Keys cover every category / question of the app, answered or not.
  std::map<std::string, Share> personal_by_category;
  std::map<QuestionId, Share> personal_by_question;
  std::map<std::string, Share> community_by_category;
  std::map<QuestionId, Share> community_by_question;
};

// Community shares tally every answer event of the app, anonymous ones
// included. Personal shares are filled only when `user` is set.
KnowledgeLevelReport knowledge_level(const std::string& app_id, std::span<const Question> questions,
                                     std::span<const AnswerEvent> events,
                                     const std::optional<UserId>& user);

Json knowledge_level_to_json(const KnowledgeLevelReport& report);

}  // namespace retain
