#include "retain/analytics.hpp"

namespace retain {

KnowledgeLevelReport knowledge_level(const std::string& app_id, std::span<const Question> questions,
                                     std::span<const AnswerEvent> events,
                                     const std::optional<UserId>& user) {
  KnowledgeLevelReport r;
  r.app_id = app_id;
  r.user_id = user;
  r.personal_included = user.has_value();

  std::map<QuestionId, std::string> category;
  for (const auto& q : questions) {
    category[q.id] = q.category;
    r.community_by_category[q.category];
    r.community_by_question[q.id];
    if (user) {
      r.personal_by_category[q.category];
      r.personal_by_question[q.id];
    }
  }

  auto tally = [](Share& s, bool correct) {
    s.total += 1;
    if (correct) s.correct += 1;
  };
  for (const auto& e : events) {
    auto it = category.find(e.question_id);
    if (it == category.end()) continue;
    tally(r.community_by_category[it->second], e.correct);
    tally(r.community_by_question[e.question_id], e.correct);
    if (user && e.user_id == user) {
      tally(r.personal_by_category[it->second], e.correct);
      tally(r.personal_by_question[e.question_id], e.correct);
    }
  }
  return r;
}

namespace {

Json shares_json(const auto& shares) {
  Json out = Json::object();
  for (const auto& [key, s] : shares) {
    auto v = s.value();
    out[key] = {{"share", v ? Json(*v) : Json(nullptr)}, {"correct", s.correct}, {"total", s.total}};
  }
  return out;
}

}  // namespace

Json knowledge_level_to_json(const KnowledgeLevelReport& report) {
  Json j = {{"app_id", report.app_id},
            {"community", {{"by_category", shares_json(report.community_by_category)},
                           {"by_question", shares_json(report.community_by_question)}}}};
  j["user_id"] = report.user_id ? Json(*report.user_id) : Json(nullptr);
  if (report.personal_included) {
    j["personal"] = {{"by_category", shares_json(report.personal_by_category)},
                     {"by_question", shares_json(report.personal_by_question)}};
  } else {
    j["personal"] = nullptr;
  }
  return j;
}

}  // namespace retain
