#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <variant>

#include "retain/content_rec.hpp"
#include "retain/domain.hpp"

namespace retain {

using Json = nlohmann::json;

struct Bank {
  std::string app_id;
  std::vector<Question> questions;
};

// Field-level failures throw Error(parse) with the JSON path in the message.
Bank bank_from_json(const Json& doc);
Json bank_to_json(const Bank& bank);

Question question_from_json(const Json& j, const std::string& app_id, const std::string& path);
Json question_to_json(const Question& q);

// What clients may see: no answer key and no explanation.
Json public_question_json(const Question& q);

using LogRecord = std::variant<AnswerEvent, FeedbackRecord>;

// One JSON Lines record. Field names: type, session_id, user_id,
// question_id, correct, order_position, value, timestamp.
Json log_record_to_json(const LogRecord& record);
LogRecord log_record_from_json(const Json& j);

Json recommendation_to_json(const Recommendation& r);
Json query_result_to_json(const QueryResult& r);

}  // namespace retain
