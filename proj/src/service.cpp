#include "retain/service.hpp"

#include <cstdio>

#include "retain/analytics.hpp"
#include "retain/error.hpp"
#include "retain/grading.hpp"

namespace retain {

Instant system_now() {
  return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

namespace {

Reply error_reply(int status, const std::string& message) { return {status, {{"error", message}}}; }

Reply error_reply(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::not_found: return error_reply(404, e.what());
    case ErrorKind::invalid_argument: return error_reply(422, e.what());
    case ErrorKind::conflict: return error_reply(409, e.what());
    case ErrorKind::parse: return error_reply(400, e.what());
    case ErrorKind::io: return error_reply(500, e.what());
  }
  return error_reply(500, e.what());
}

Json session_json(const ApiSession& s) {
  return {{"session_id", s.session_id},
          {"user_id", s.user_id ? Json(*s.user_id) : Json(nullptr)},
          {"app_id", s.app_id},
          {"created_at", format_iso8601(s.created_at)}};
}

}  // namespace

Engine::Engine(ServiceConfig cfg, Clock clock)
    : cfg_(std::move(cfg)),
      clock_(std::move(clock)),
      log_(DataDir(cfg_.data_dir).events_path()),
      id_rng_(std::random_device{}()) {
  DataDir dir(cfg_.data_dir);
  catalog_ = Catalog(dir.load_banks());

  auto rebuilt = rebuild_snapshot(dir.events_path(), catalog_.all_questions());
  rebuild_warnings_ = rebuilt.warnings.size();
  for (const auto& w : rebuilt.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

  for (const auto& e : rebuilt.events) accumulator_.add(e);
  for (const auto& f : rebuilt.feedback) accumulator_.add(f);

  auto s = std::make_shared<State>();
  s->snapshot = accumulator_.snapshot();
  s->events = std::move(rebuilt.events);
  s->pools = catalog_.session_pools(s->snapshot);
  for (const auto& e : s->events) {
    if (e.correct) continue;
    const Instant expiry = add_minutes(e.timestamp, cfg_.session.cooldown_minutes);
    s->session_cooldowns[e.session_id].set(e.question_id, expiry);
    if (e.user_id) s->user_cooldowns[*e.user_id].set(e.question_id, expiry);
  }
  for (const auto& [id, log] : s->snapshot.sessions) {
    auto app = catalog_.app_of(log);
    if (!app) continue;
    s->sessions[id] = {id, log.user_id(), *app, log.events().front().timestamp};
  }
  state_ = std::move(s);
}

std::shared_ptr<const Engine::State> Engine::state() const {
  std::lock_guard lock(state_mutex_);
  return state_;
}

void Engine::publish(std::shared_ptr<const State> next) {
  std::lock_guard lock(state_mutex_);
  state_ = std::move(next);
}

SessionId Engine::fresh_session_id(const State& s) {
  for (;;) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "s-%016llx%08llx", static_cast<unsigned long long>(id_rng_()),
                  static_cast<unsigned long long>(id_rng_() & 0xffffffffULL));
    if (!s.sessions.contains(buf) && !s.snapshot.sessions.contains(buf)) return buf;
  }
}

Reply Engine::list_apps() const {
  Json apps = Json::array();
  for (const Bank& b : catalog_.banks()) {
    apps.push_back({{"app_id", b.app_id}, {"question_count", b.questions.size()}});
  }
  return {200, apps};
}

Reply Engine::list_questions(const std::string& app_id) const {
  if (catalog_.find_app(app_id) == nullptr) return error_reply(404, "unknown app '" + app_id + "'");
  Json out = Json::array();
  for (const auto& q : catalog_.questions(app_id)) out.push_back(public_question_json(q));
  return {200, out};
}

Reply Engine::get_question(const QuestionId& id) const {
  const Question* q = catalog_.find_question(id);
  if (q == nullptr) return error_reply(404, "unknown question '" + id + "'");
  return {200, public_question_json(*q)};
}

Reply Engine::create_session(const std::string& app_id, const std::optional<UserId>& user) {
  if (catalog_.find_app(app_id) == nullptr) return error_reply(404, "unknown app '" + app_id + "'");
  std::lock_guard lock(write_mutex_);
  auto current = state();
  auto next = std::make_shared<State>(*current);
  ApiSession session{fresh_session_id(*current), user, app_id, clock_()};
  next->sessions[session.session_id] = session;
  publish(std::move(next));
  return {201, session_json(session)};
}

Reply Engine::submit_answer(const SessionId& session_id, const Json& body) {
  try {
    std::lock_guard lock(write_mutex_);
    auto current = state();
    auto sit = current->sessions.find(session_id);
    if (sit == current->sessions.end()) return error_reply(404, "unknown session '" + session_id + "'");
    const ApiSession& session = sit->second;

    if (!body.is_object() || !body.contains("question_id") || !body["question_id"].is_string()) {
      return error_reply(422, "body must carry a string question_id");
    }
    const QuestionId qid = body["question_id"].get<std::string>();
    const Question* q = catalog_.find_question(qid);
    if (q == nullptr || q->app_id != session.app_id) {
      return error_reply(404, "question '" + qid + "' is not part of app '" + session.app_id + "'");
    }
    if (!body.contains("response")) return error_reply(422, "body must carry a response payload");
    const bool correct = grade(*q, body["response"]);

    const SessionLog* log = current->snapshot.find_session(session_id);
    AnswerEvent e;
    e.session_id = session_id;
    e.user_id = session.user_id;
    e.question_id = qid;
    e.correct = correct;
    e.order_position = static_cast<std::uint32_t>((log ? log->current_rank() : 0) + 1);
    e.timestamp = clock_();
    if (log && !log->events().empty()) e.timestamp = std::max(e.timestamp, log->events().back().timestamp);

    log_.append(e);
    accumulator_.add(e);

    auto next = std::make_shared<State>(*current);
    next->snapshot = accumulator_.snapshot();
    next->events.push_back(e);
    next->pools = catalog_.session_pools(next->snapshot);
    if (!correct) {
      SessionRecConfig cooldown_cfg = cfg_.session;
      next->session_cooldowns[session_id] =
          register_wrong_answer(next->session_cooldowns[session_id], qid, e.timestamp, cooldown_cfg);
      if (e.user_id) {
        next->user_cooldowns[*e.user_id] =
            register_wrong_answer(next->user_cooldowns[*e.user_id], qid, e.timestamp, cooldown_cfg);
      }
    }
    publish(std::move(next));

    Json out = {{"correct", correct}, {"order_position", e.order_position}};
    if (!correct && q->explanation) out["explanation"] = *q->explanation;
    return {200, out};
  } catch (const Error& err) {
    return error_reply(err);
  }
}

Reply Engine::next(const SessionId& session_id, std::optional<std::size_t> count) const {
  auto s = state();
  auto sit = s->sessions.find(session_id);
  if (sit == s->sessions.end()) return error_reply(404, "unknown session '" + session_id + "'");
  const std::string& app = sit->second.app_id;

  SessionLog empty(session_id);
  const SessionLog* current = s->snapshot.find_session(session_id);
  if (current == nullptr) current = &empty;

  static const std::vector<SessionLog> no_pool;
  auto pit = s->pools.find(app);
  const auto& pool = pit == s->pools.end() ? no_pool : pit->second;

  static const CooldownSet no_cooldown;
  auto cit = s->session_cooldowns.find(session_id);
  const CooldownSet& cooldown = cit == s->session_cooldowns.end() ? no_cooldown : cit->second;

  auto recs = next_questions(catalog_, s->snapshot, pool, *current, app, cooldown, cfg_.session,
                             count.value_or(cfg_.default_count), clock_());
  Json out = Json::array();
  for (const auto& r : recs) {
    Json j = recommendation_to_json(r);
    j["question"] = public_question_json(*catalog_.find_question(r.question_id));
    out.push_back(std::move(j));
  }
  return {200, out};
}

Reply Engine::repetitions(const UserId& user, const std::optional<std::string>& app_id,
                          std::optional<std::size_t> count) const {
  if (app_id && catalog_.find_app(*app_id) == nullptr) return error_reply(404, "unknown app '" + *app_id + "'");
  auto s = state();
  static const CooldownSet no_cooldown;
  auto cit = s->user_cooldowns.find(user);
  const CooldownSet& cooldown = cit == s->user_cooldowns.end() ? no_cooldown : cit->second;

  UtilityRecConfig cfg = cfg_.utility;
  if (count) {
    if (*count == 0) return {200, Json::array()};
    cfg.max_results = *count;
  }
  auto bank = app_id ? catalog_.questions(*app_id) : catalog_.all_questions();
  auto recs = repetition_schedule(user, s->snapshot, bank, cooldown, cfg, clock_());
  Json out = Json::array();
  for (const auto& r : recs) {
    Json j = recommendation_to_json(r);
    j["question"] = public_question_json(*catalog_.find_question(r.question_id));
    out.push_back(std::move(j));
  }
  return {200, out};
}

Reply Engine::search(const std::string& query, const std::optional<std::string>& scope,
                     std::optional<std::size_t> k) const {
  if (query.find_first_not_of(" \t\r\n") == std::string::npos) return error_reply(422, "empty query");
  SearchScope where;
  if (scope && *scope != "global") {
    if (catalog_.find_app(*scope) == nullptr) return error_reply(404, "unknown app '" + *scope + "'");
    where = *scope;
  }
  try {
    auto hits = answer_query(query, catalog_.all_questions(), extractor_, k.value_or(cfg_.default_count), where);
    Json out = Json::array();
    for (const auto& h : hits) out.push_back(query_result_to_json(h));
    return {200, out};
  } catch (const Error& e) {
    return error_reply(e);
  }
}

Reply Engine::feedback(const QuestionId& id, const Json& body, const std::optional<UserId>& user) {
  if (catalog_.find_question(id) == nullptr) return error_reply(404, "unknown question '" + id + "'");
  if (!body.is_object() || !body.contains("value") || !body["value"].is_number()) {
    return error_reply(422, "body must carry a numeric value");
  }
  const double value = body["value"].get<double>();
  if (!(value >= 0 && value <= 1)) return error_reply(422, "feedback value must be within [0,1]");

  try {
    std::lock_guard lock(write_mutex_);
    FeedbackRecord f{user.value_or("anonymous"), id, value, clock_()};
    log_.append(f);
    accumulator_.add(f);
    auto next = std::make_shared<State>(*state());
    next->snapshot = accumulator_.snapshot();
    publish(std::move(next));
  } catch (const Error& e) {
    return error_reply(e);
  }
  return {200, {{"ok", true}}};
}

Reply Engine::knowledge_level(const std::string& app_id, const std::optional<UserId>& user) const {
  if (catalog_.find_app(app_id) == nullptr) return error_reply(404, "unknown app '" + app_id + "'");
  auto s = state();
  std::optional<UserId> personal = cfg_.personal_analytics ? user : std::nullopt;
  auto report = retain::knowledge_level(app_id, catalog_.questions(app_id), s->events, personal);
  Json out = knowledge_level_to_json(report);
  if (user && !cfg_.personal_analytics) out["user_id"] = *user;
  out["personal_enabled"] = cfg_.personal_analytics;
  return {200, out};
}

}  // namespace retain
