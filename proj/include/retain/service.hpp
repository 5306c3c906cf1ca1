#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>

#include "retain/catalog.hpp"
#include "retain/config.hpp"
#include "retain/json_io.hpp"
#include "retain/store.hpp"

namespace httplib {
class Server;
}

namespace retain {

struct ApiSession {
  SessionId session_id;
  std::optional<UserId> user_id;
  std::string app_id;
  Instant created_at{};
};

using Clock = std::function<Instant()>;
Instant system_now();

struct Reply {
  int status = 200;
  Json body;
};

// Transport-independent request handlers. Every state change goes through
// the event log; readers work on an immutable snapshot that is swapped
// atomically after each append.
class Engine {
 public:
  explicit Engine(ServiceConfig cfg, Clock clock = system_now);

  Reply list_apps() const;
  Reply list_questions(const std::string& app_id) const;
  Reply get_question(const QuestionId& id) const;

  Reply create_session(const std::string& app_id, const std::optional<UserId>& user);
  Reply submit_answer(const SessionId& session_id, const Json& body);
  Reply next(const SessionId& session_id, std::optional<std::size_t> count) const;
  Reply repetitions(const UserId& user, const std::optional<std::string>& app_id,
                    std::optional<std::size_t> count) const;
  Reply search(const std::string& query, const std::optional<std::string>& scope,
               std::optional<std::size_t> k) const;
  Reply feedback(const QuestionId& id, const Json& body, const std::optional<UserId>& user);
  Reply knowledge_level(const std::string& app_id, const std::optional<UserId>& user) const;

  const ServiceConfig& config() const { return cfg_; }
  const Catalog& catalog() const { return catalog_; }
  std::size_t rebuild_warnings() const { return rebuild_warnings_; }

 private:
  struct State {
    Snapshot snapshot;
    std::vector<AnswerEvent> events;
    std::map<std::string, std::vector<SessionLog>> pools;
    std::map<SessionId, CooldownSet> session_cooldowns;
    std::map<UserId, CooldownSet> user_cooldowns;
    std::map<SessionId, ApiSession> sessions;
  };

  std::shared_ptr<const State> state() const;
  void publish(std::shared_ptr<const State> next);
  SessionId fresh_session_id(const State& s);

  ServiceConfig cfg_;
  Clock clock_;
  Catalog catalog_;
  FeatureExtractor extractor_;
  EventLog log_;
  std::size_t rebuild_warnings_ = 0;

  mutable std::mutex state_mutex_;
  std::shared_ptr<const State> state_;

  std::mutex write_mutex_;  // serializes appends and session creation
  StatsAccumulator accumulator_;
  std::mt19937_64 id_rng_;
};

void register_routes(httplib::Server& server, Engine& engine);

}  // namespace retain
