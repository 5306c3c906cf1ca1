#include "retain/json_io.hpp"

#include "retain/error.hpp"

namespace retain {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::parse, path + ": " + what);
}

const Json& require(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing field");
  return *it;
}

std::string as_string(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

double as_number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int as_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::optional<std::string> optional_string(const Json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return as_string(*it, path + "." + key);
}

std::vector<int> int_array(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_int(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::string> string_array(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_string(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

AnswerKey answer_key_from_json(const Json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  if (j.contains("choices")) {
    auto v = int_array(j["choices"], path + ".choices");
    return ChoiceKey{{v.begin(), v.end()}};
  }
  if (j.contains("order")) return SequenceKey{int_array(j["order"], path + ".order")};
  if (j.contains("accepted")) return TextKey{string_array(j["accepted"], path + ".accepted")};
  if (j.contains("regions")) {
    const Json& arr = j["regions"];
    if (!arr.is_array()) fail(path + ".regions", "expected an array");
    AreaKey key;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      std::string rp = path + ".regions[" + std::to_string(i) + "]";
      key.regions.push_back({as_number(require(arr[i], "x0", rp), rp + ".x0"),
                             as_number(require(arr[i], "y0", rp), rp + ".y0"),
                             as_number(require(arr[i], "x1", rp), rp + ".x1"),
                             as_number(require(arr[i], "y1", rp), rp + ".y1")});
    }
    return key;
  }
  fail(path, "expected one of choices, order, accepted, regions");
}

Json answer_key_to_json(const AnswerKey& key) {
  return std::visit(
      [](const auto& k) -> Json {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ChoiceKey>) {
          return {{"choices", std::vector<int>(k.correct.begin(), k.correct.end())}};
        } else if constexpr (std::is_same_v<K, SequenceKey>) {
          return {{"order", k.order}};
        } else if constexpr (std::is_same_v<K, TextKey>) {
          return {{"accepted", k.accepted}};
        } else {
          Json regions = Json::array();
          for (const Rect& r : k.regions) regions.push_back({{"x0", r.x0}, {"y0", r.y0}, {"x1", r.x1}, {"y1", r.y1}});
          return {{"regions", regions}};
        }
      },
      key);
}

}  // namespace

Question question_from_json(const Json& j, const std::string& app_id, const std::string& path) {
  Question q;
  q.app_id = app_id;
  q.id = as_string(require(j, "id", path), path + ".id");
  q.prompt = as_string(require(j, "prompt", path), path + ".prompt");
  std::string tag = as_string(require(j, "kind", path), path + ".kind");
  auto kind = parse_question_kind(tag);
  if (!kind) fail(path + ".kind", "unknown kind '" + tag + "'");
  q.kind = *kind;
  q.answer_key = answer_key_from_json(require(j, "answer_key", path), path + ".answer_key");
  if (j.contains("options")) q.options = string_array(j["options"], path + ".options");
  if (j.contains("features")) {
    auto f = string_array(j["features"], path + ".features");
    q.features = {f.begin(), f.end()};
  }
  q.days_to_forget = as_number(require(j, "days_to_forget", path), path + ".days_to_forget");
  if (auto c = optional_string(j, "category", path)) q.category = *c;
  q.explanation = optional_string(j, "explanation", path);
  q.notification_text = optional_string(j, "notification_text", path);
  q.answer_text = optional_string(j, "answer_text", path);
  q.image_url = optional_string(j, "image_url", path);
  return q;
}

Json question_to_json(const Question& q) {
  Json j = {{"id", q.id},
            {"prompt", q.prompt},
            {"kind", std::string(to_string(q.kind))},
            {"answer_key", answer_key_to_json(q.answer_key)},
            {"features", std::vector<std::string>(q.features.begin(), q.features.end())},
            {"days_to_forget", q.days_to_forget},
            {"category", q.category}};
  if (!q.options.empty()) j["options"] = q.options;
  if (q.explanation) j["explanation"] = *q.explanation;
  if (q.notification_text) j["notification_text"] = *q.notification_text;
  if (q.answer_text) j["answer_text"] = *q.answer_text;
  if (q.image_url) j["image_url"] = *q.image_url;
  return j;
}

Json public_question_json(const Question& q) {
  Json j = {{"id", q.id},
            {"app_id", q.app_id},
            {"prompt", q.prompt},
            {"kind", std::string(to_string(q.kind))},
            {"category", q.category}};
  if (!q.options.empty()) j["options"] = q.options;
  if (q.image_url) j["image_url"] = *q.image_url;
  if (q.notification_text) j["notification_text"] = *q.notification_text;
  return j;
}

Bank bank_from_json(const Json& doc) {
  Bank bank;
  bank.app_id = as_string(require(doc, "app_id", "$"), "$.app_id");
  const Json& questions = require(doc, "questions", "$");
  if (!questions.is_array()) fail("$.questions", "expected an array");
  for (std::size_t i = 0; i < questions.size(); ++i) {
    bank.questions.push_back(
        question_from_json(questions[i], bank.app_id, "$.questions[" + std::to_string(i) + "]"));
  }
  return bank;
}

Json bank_to_json(const Bank& bank) {
  Json questions = Json::array();
  for (const auto& q : bank.questions) questions.push_back(question_to_json(q));
  return {{"app_id", bank.app_id}, {"questions", questions}};
}

Json log_record_to_json(const LogRecord& record) {
  if (auto* e = std::get_if<AnswerEvent>(&record)) {
    Json j = {{"type", "answer"}, {"session_id", e->session_id}};
    if (e->user_id) j["user_id"] = *e->user_id;
    j["question_id"] = e->question_id;
    j["correct"] = e->correct;
    j["order_position"] = e->order_position;
    j["timestamp"] = format_iso8601(e->timestamp);
    return j;
  }
  const auto& f = std::get<FeedbackRecord>(record);
  return {{"type", "feedback"},
          {"user_id", f.user_id},
          {"question_id", f.question_id},
          {"value", f.value},
          {"timestamp", format_iso8601(f.timestamp)}};
}

LogRecord log_record_from_json(const Json& j) {
  const std::string type = as_string(require(j, "type", "$"), "$.type");
  if (type == "answer") {
    AnswerEvent e;
    e.session_id = as_string(require(j, "session_id", "$"), "$.session_id");
    e.user_id = optional_string(j, "user_id", "$");
    e.question_id = as_string(require(j, "question_id", "$"), "$.question_id");
    const Json& correct = require(j, "correct", "$");
    if (!correct.is_boolean()) fail("$.correct", "expected a boolean");
    e.correct = correct.get<bool>();
    int pos = as_int(require(j, "order_position", "$"), "$.order_position");
    if (pos < 1) fail("$.order_position", "must be a positive integer");
    e.order_position = static_cast<std::uint32_t>(pos);
    e.timestamp = parse_iso8601(as_string(require(j, "timestamp", "$"), "$.timestamp"));
    return e;
  }
  if (type == "feedback") {
    FeedbackRecord f;
    f.user_id = as_string(require(j, "user_id", "$"), "$.user_id");
    f.question_id = as_string(require(j, "question_id", "$"), "$.question_id");
    f.value = as_number(require(j, "value", "$"), "$.value");
    if (!(f.value >= 0 && f.value <= 1)) fail("$.value", "must be within [0,1]");
    f.timestamp = parse_iso8601(as_string(require(j, "timestamp", "$"), "$.timestamp"));
    return f;
  }
  fail("$.type", "unknown record type '" + type + "'");
}

Json recommendation_to_json(const Recommendation& r) {
  return {{"question_id", r.question_id},
          {"score", r.score},
          {"source", std::string(to_string(r.source))},
          {"detail", r.detail}};
}

Json query_result_to_json(const QueryResult& r) {
  return {{"question_id", r.question_id},
          {"similarity", r.similarity},
          {"similarity_exact", {r.exact.numerator, r.exact.denominator}},
          {"answer", r.answer}};
}

}  // namespace retain
