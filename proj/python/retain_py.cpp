#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "retain/content_rec.hpp"
#include "retain/error.hpp"
#include "retain/grading.hpp"
#include "retain/session_rec.hpp"
#include "retain/simulator.hpp"
#include "retain/store.hpp"
#include "retain/utility_rec.hpp"

namespace py = pybind11;
using namespace retain;

// Records cross the boundary as JSON text; the python package wraps
// json.dumps / json.loads around these.
namespace {

std::vector<LogRecord> records_from(const std::string& text) {
  std::vector<LogRecord> out;
  for (const auto& j : Json::parse(text)) out.push_back(log_record_from_json(j));
  return out;
}

void split(const std::vector<LogRecord>& records, std::vector<AnswerEvent>& events,
           std::vector<FeedbackRecord>& feedback) {
  for (const auto& r : records) {
    if (auto* e = std::get_if<AnswerEvent>(&r)) {
      events.push_back(*e);
    } else {
      feedback.push_back(std::get<FeedbackRecord>(r));
    }
  }
}

std::vector<Question> questions_from(const std::string& banks_text) {
  std::vector<Question> out;
  for (const auto& doc : Json::parse(banks_text)) {
    Bank b = bank_from_json(doc);
    validate_bank(b);
    out.insert(out.end(), b.questions.begin(), b.questions.end());
  }
  return out;
}

std::string recs_json(const std::vector<Recommendation>& recs) {
  Json out = Json::array();
  for (const auto& r : recs) out.push_back(recommendation_to_json(r));
  return out.dump();
}

std::string recommend_next_json(const std::string& events_text, const std::string& current,
                                const std::set<QuestionId>& universe, std::size_t neighbor_count,
                                const std::map<QuestionId, std::string>& cooldown, const std::string& now,
                                const std::string& denominator) {
  std::vector<AnswerEvent> events;
  std::vector<FeedbackRecord> feedback;
  split(records_from(events_text), events, feedback);
  const Snapshot snap = fold_stats(events);

  SessionRecConfig cfg;
  cfg.question_universe = universe;
  cfg.neighbor_count = neighbor_count;
  if (denominator == "universe") {
    cfg.similarity_denominator = SimilarityDenominator::universe;
  } else if (denominator != "current_session") {
    throw Error(ErrorKind::invalid_argument, "denominator must be 'current_session' or 'universe'");
  }
  cfg.validate();

  CooldownSet cd;
  for (const auto& [q, expiry] : cooldown) cd.set(q, parse_iso8601(expiry));
  std::vector<SessionLog> pool;
  for (const auto& [id, s] : snap.sessions) pool.push_back(s);
  SessionLog empty(current);
  const SessionLog* c = snap.find_session(current);
  return recs_json(recommend_next(c ? *c : empty, pool, cd, cfg, parse_iso8601(now)));
}

std::string repetition_schedule_json(const std::string& records_text, const std::string& banks_text,
                                     const std::string& user, const std::string& now,
                                     bool use_importance_complexity, std::size_t max_results,
                                     double complexity_floor, const std::string& basis) {
  std::vector<AnswerEvent> events;
  std::vector<FeedbackRecord> feedback;
  split(records_from(records_text), events, feedback);
  UtilityRecConfig cfg;
  cfg.use_importance_complexity = use_importance_complexity;
  cfg.max_results = max_results;
  cfg.complexity_floor = complexity_floor;
  if (basis == "last_correct") {
    cfg.dayssince_basis = DaysSinceBasis::last_correct;
  } else if (basis != "any_answer") {
    throw Error(ErrorKind::invalid_argument, "basis must be 'any_answer' or 'last_correct'");
  }
  cfg.validate();
  const auto bank = questions_from(banks_text);
  return recs_json(repetition_schedule(user, fold_stats(events, feedback), bank, {}, cfg, parse_iso8601(now)));
}

std::string answer_query_json(const std::string& query, const std::string& banks_text, std::size_t k,
                              const std::optional<std::string>& app) {
  const auto bank = questions_from(banks_text);
  Json out = Json::array();
  for (const auto& h : answer_query(query, bank, FeatureExtractor{}, k, app)) out.push_back(query_result_to_json(h));
  return out.dump();
}

std::string simulate_json(std::size_t users, std::size_t questions, std::uint64_t seed, double horizon,
                          std::size_t k) {
  auto pop = sim::generate_population(users, questions, seed);
  UtilityRecConfig plain;
  plain.use_importance_complexity = false;
  auto utility_plain = sim::evaluate_utility_recommender(pop, horizon, k, seed, sim::Ranker::utility, plain);
  utility_plain.recommender = "utility_plain";
  Json out = {
      {"events", pop.events.size()},
      {"utility", eval_report_to_json(sim::evaluate_utility_recommender(pop, horizon, k, seed))},
      {"utility_plain", eval_report_to_json(utility_plain)},
      {"random", eval_report_to_json(sim::evaluate_utility_recommender(pop, horizon, k, seed, sim::Ranker::random))},
      {"oracle", eval_report_to_json(sim::evaluate_utility_recommender(pop, horizon, k, seed, sim::Ranker::oracle))},
  };
  if (users >= 2) out["session"] = eval_report_to_json(sim::evaluate_session_recommender(pop, k, seed));
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_retain, m) {
  m.doc() = "Learning-recommendation engine core";

  static py::exception<Error> retain_error(m, "RetainError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(retain_error.ptr(), e.what());
    } catch (const Json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("load_bank", [](const std::string& path) { return bank_to_json(load_bank(path)).dump(); });
  m.def("validate_bank", [](const std::string& text) { validate_bank(bank_from_json(Json::parse(text))); });
  m.def("read_log", [](const std::string& path) {
    auto contents = read_log(path);
    Json records = Json::array();
    for (const auto& r : contents.records) records.push_back(log_record_to_json(r));
    return Json{{"records", records}, {"warnings", contents.warnings}}.dump();
  });
  m.def("extract_features", [](const std::string& text) { return FeatureExtractor{}.extract(text); });
  m.def("dice", [](const FeatureSet& a, const FeatureSet& b) {
    auto s = dice_similarity(a, b);
    return std::make_pair(s.numerator, s.denominator);
  });
  m.def("answer_query", &answer_query_json, py::arg("query"), py::arg("banks"), py::arg("k"), py::arg("app"));
  m.def("recommend_next", &recommend_next_json, py::arg("events"), py::arg("current"), py::arg("universe"),
        py::arg("neighbor_count"), py::arg("cooldown"), py::arg("now"), py::arg("denominator"));
  m.def("repetition_schedule", &repetition_schedule_json, py::arg("records"), py::arg("banks"), py::arg("user"),
        py::arg("now"), py::arg("use_importance_complexity"), py::arg("max_results"),
        py::arg("complexity_floor"), py::arg("basis"));
  m.def("grade", [](const std::string& question, const std::string& response) {
    const Json q = Json::parse(question);
    const std::string app = q.value("app_id", "");
    return grade(question_from_json(q, app, "$"), Json::parse(response));
  });
  m.def("simulate", &simulate_json, py::arg("users"), py::arg("questions"), py::arg("seed"), py::arg("horizon"),
        py::arg("k"));
}
