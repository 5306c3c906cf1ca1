#include <httplib.h>

#include <charconv>

#include "retain/service.hpp"

namespace retain {

namespace {

void send(httplib::Response& res, const Reply& reply) {
  res.status = reply.status;
  res.set_content(reply.body.dump(), "application/json");
}

std::optional<UserId> user_header(const httplib::Request& req) {
  if (!req.has_header("X-User-Id")) return std::nullopt;
  auto v = req.get_header_value("X-User-Id");
  if (v.empty()) return std::nullopt;
  return v;
}

std::optional<std::string> param(const httplib::Request& req, const char* key) {
  if (!req.has_param(key)) return std::nullopt;
  return req.get_param_value(key);
}

// nullopt when absent; throws on a malformed value.
std::optional<std::size_t> count_param(const httplib::Request& req, const char* key) {
  auto v = param(req, key);
  if (!v) return std::nullopt;
  std::size_t n = 0;
  auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), n);
  if (ec != std::errc{} || ptr != v->data() + v->size()) {
    throw std::invalid_argument(std::string(key) + " must be a non-negative integer");
  }
  return n;
}

template <typename Handler>
auto guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      send(res, handler(req));
    } catch (const std::invalid_argument& e) {
      send(res, {422, {{"error", e.what()}}});
    } catch (const Json::parse_error& e) {
      send(res, {400, {{"error", std::string("malformed JSON body: ") + e.what()}}});
    } catch (const std::exception& e) {
      send(res, {500, {{"error", e.what()}}});
    }
  };
}

}  // namespace

void register_routes(httplib::Server& server, Engine& engine) {
  server.Get("/apps", guarded([&](const httplib::Request&) { return engine.list_apps(); }));
  server.Get(R"(/apps/([^/]+)/questions)",
             guarded([&](const httplib::Request& req) { return engine.list_questions(req.matches[1]); }));
  server.Post(R"(/apps/([^/]+)/sessions)", guarded([&](const httplib::Request& req) {
                return engine.create_session(req.matches[1], user_header(req));
              }));
  server.Get(R"(/apps/([^/]+)/knowledge-level)", guarded([&](const httplib::Request& req) {
               auto user = param(req, "user");
               if (!user) user = user_header(req);
               return engine.knowledge_level(req.matches[1], user);
             }));
  server.Get(R"(/questions/([^/]+))",
             guarded([&](const httplib::Request& req) { return engine.get_question(req.matches[1]); }));
  server.Post(R"(/questions/([^/]+)/feedback)", guarded([&](const httplib::Request& req) {
                return engine.feedback(req.matches[1], Json::parse(req.body), user_header(req));
              }));
  server.Post(R"(/sessions/([^/]+)/answers)", guarded([&](const httplib::Request& req) {
                return engine.submit_answer(req.matches[1], Json::parse(req.body));
              }));
  server.Get(R"(/sessions/([^/]+)/next)", guarded([&](const httplib::Request& req) {
               return engine.next(req.matches[1], count_param(req, "count"));
             }));
  server.Get(R"(/users/([^/]+)/repetitions)", guarded([&](const httplib::Request& req) {
               return engine.repetitions(req.matches[1], param(req, "app"), count_param(req, "count"));
             }));
  server.Get("/search", guarded([&](const httplib::Request& req) {
               return engine.search(param(req, "q").value_or(""), param(req, "app"), count_param(req, "k"));
             }));
}

}  // namespace retain
