#pragma once

#include <string>
#include <vector>

#include "retain/domain.hpp"
#include "retain/json_io.hpp"

namespace retain::testing {

inline Instant at(const char* iso) { return parse_iso8601(iso); }

inline const Instant kT0 = parse_iso8601("2024-03-04T09:00:00Z");

// Interaction log of five sessions; each row lists the questions in the
// order they were posed. "?" entries are simply absent.
inline std::vector<AnswerEvent> table3_events() {
  const std::vector<std::pair<std::string, std::vector<std::string>>> sessions = {
      {"s_1", {"q3", "q2", "q1", "q5", "q4"}},
      {"s_2", {"q2", "q1", "q3"}},
      {"s_3", {"q1", "q2", "q5", "q3", "q4"}},
      {"s_4", {"q4", "q2", "q1", "q3", "q5"}},
      {"s_c", {"q3", "q2", "q1"}},
  };
  std::vector<AnswerEvent> events;
  int hour = 0;
  for (const auto& [sid, order] : sessions) {
    for (std::size_t i = 0; i < order.size(); ++i) {
      AnswerEvent e;
      e.session_id = sid;
      e.question_id = order[i];
      e.correct = true;
      e.order_position = static_cast<std::uint32_t>(i + 1);
      e.timestamp = kT0 + std::chrono::hours(hour) + std::chrono::minutes(static_cast<int>(i));
      events.push_back(e);
    }
    ++hour;
  }
  return events;
}

inline Question choice_question(const std::string& id, const std::string& app, int correct = 0) {
  Question q;
  q.id = id;
  q.app_id = app;
  q.prompt = "Prompt of " + id;
  q.kind = QuestionKind::multiple_choice;
  q.options = {"a", "b", "c"};
  q.answer_key = ChoiceKey{{correct}};
  q.days_to_forget = 20;
  q.features = {id};
  q.explanation = "Because of " + id;
  return q;
}

inline Bank table3_bank() {
  Bank b{"table3", {}};
  for (const char* id : {"q1", "q2", "q3", "q4", "q5"}) b.questions.push_back(choice_question(id, "table3"));
  return b;
}

// Question features of the model-based diagnosis app.
inline Bank table4_bank() {
  const std::vector<std::pair<std::string, FeatureSet>> rows = {
      {"q1", {"conflict", "algorithm", "quickxplain"}},
      {"q2", {"fastdiag", "algorithm", "time", "complexity"}},
      {"q3", {"fastdiag", "algorithm", "space", "complexity"}},
      {"q4", {"hitting", "set", "search", "tree", "breadth", "first", "minimal", "cardinality"}},
      {"q5", {"hitting", "set", "conflict", "symmetry"}},
      {"q6", {"minimal", "cardinality", "diagnosis", "search"}},
  };
  Bank b{"diagnosis", {}};
  for (const auto& [id, features] : rows) {
    Question q = choice_question(id, "diagnosis");
    q.features = features;
    q.answer_text = "Answer of " + id;
    b.questions.push_back(q);
  }
  return b;
}

inline const char* kTable4Query = "Which diagnosis approach does support minimal cardinality?";

inline FeatureSet table4_query_features() {
  return {"diagnosis", "approach", "support", "minimal", "cardinality"};
}

}  // namespace retain::testing
