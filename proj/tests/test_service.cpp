#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <random>
#include <thread>

#include "fixtures.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "retain/error.hpp"
#include "retain/config.hpp"
#include "retain/service.hpp"
#include "tempdir.hpp"

using namespace retain;
using namespace retain::testing;

namespace {

struct ManualClock {
  std::shared_ptr<Instant> now = std::make_shared<Instant>(kT0 + std::chrono::days(1));
  Clock clock() const {
    auto p = now;
    return [p] { return *p; };
  }
  void advance(std::chrono::milliseconds d) const { *now += d; }
};

Bank lab_bank() {
  Bank b{"lab", {}};
  const std::vector<std::pair<std::string, FeatureSet>> rows = {
      {"l1", {"minimal", "search"}}, {"l2", {"conflict"}}, {"l3", {"search", "tree"}}};
  for (const auto& [id, features] : rows) {
    Question q = choice_question(id, "lab", 1);
    q.features = features;
    b.questions.push_back(q);
  }
  b.questions[0].category = "conflicts";
  Question seq = choice_question("seq1", "lab");
  seq.kind = QuestionKind::sequencing;
  seq.answer_key = SequenceKey{{2, 0, 1}};
  seq.features = {"order"};
  b.questions.push_back(seq);
  return b;
}

// table3 with its interaction log, plus a "lab" app without events.
struct Fixture {
  TempDir dir;
  ManualClock clock;
  ServiceConfig cfg;

  Fixture() {
    DataDir data(dir.path());
    data.install_bank(table3_bank());
    data.install_bank(lab_bank());
    EventLog log(data.events_path());
    for (const auto& e : table3_events()) log.append(e);
    cfg.data_dir = dir.path().string();
  }
  Engine engine() const { return Engine(cfg, clock.clock()); }
};

std::vector<std::string> ids_of(const Json& list) {
  std::vector<std::string> out;
  for (const auto& r : list) out.push_back(r.at("question_id").get<std::string>());
  return out;
}

Json answer(const std::string& q, Json response) { return {{"question_id", q}, {"response", response}}; }

}  // namespace

TEST_CASE("apps and questions") {
  Fixture f;
  Engine e = f.engine();
  auto apps = e.list_apps();
  CHECK(apps.status == 200);
  REQUIRE(apps.body.size() == 2);
  CHECK(apps.body[0].at("app_id") == "lab");
  CHECK(apps.body[0].at("question_count") == 4);

  auto qs = e.list_questions("table3");
  CHECK(qs.status == 200);
  CHECK(qs.body.size() == 5);
  CHECK(e.list_questions("nope").status == 404);
  CHECK(e.get_question("l1").body.at("app_id") == "lab");
  CHECK(e.get_question("missing").status == 404);
}

TEST_CASE("GET responses never reveal answer keys") {
  Fixture f;
  Engine e = f.engine();
  auto s = e.create_session("lab", std::string("alice")).body.at("session_id").get<std::string>();
  e.submit_answer(s, answer("l2", {{"choices", {0}}}));
  f.clock.advance(std::chrono::hours(24 * 3));
  std::vector<Reply> replies = {e.list_apps(),
                                e.list_questions("lab"),
                                e.list_questions("table3"),
                                e.get_question("l2"),
                                e.get_question("seq1"),
                                e.next(s, 10),
                                e.next("s_c", 10),
                                e.repetitions("alice", std::nullopt, 10),
                                e.knowledge_level("lab", std::string("alice"))};
  for (const auto& r : replies) {
    CHECK(r.status == 200);
    const std::string text = r.body.dump();
    CHECK(text.find("answer_key") == std::string::npos);
    CHECK(text.find("Because of") == std::string::npos);
  }
  // search shows an answer text by design, never the key itself
  const auto hits = e.search("minimal search q1", std::nullopt, 10);
  CHECK(hits.body.size() == 3);
  CHECK(hits.body.dump().find("answer_key") == std::string::npos);
  CHECK(hits.body.dump().find("choices") == std::string::npos);
}

TEST_CASE("sessions") {
  Fixture f;
  Engine e = f.engine();
  auto r = e.create_session("table3", std::nullopt);
  CHECK(r.status == 201);
  CHECK(r.body.at("user_id").is_null());
  CHECK(r.body.at("app_id") == "table3");
  CHECK(e.create_session("unknown", std::nullopt).status == 404);
  CHECK(e.create_session("table3", std::string("bob")).body.at("user_id") == "bob");
  // a brand-new session has an empty log
  CHECK(e.next(r.body.at("session_id").get<std::string>(), 5).status == 200);
}

TEST_CASE("100 parallel session creations yield distinct ids") {
  Fixture f;
  Engine e = f.engine();
  std::vector<std::string> ids(100);
  std::vector<std::thread> threads;
  for (int t = 0; t < 10; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 10; ++i) {
        ids[static_cast<std::size_t>(t * 10 + i)] =
            e.create_session("table3", std::nullopt).body.at("session_id").get<std::string>();
      }
    });
  }
  for (auto& t : threads) t.join();
  CHECK(std::set<std::string>(ids.begin(), ids.end()).size() == 100);
}

TEST_CASE("next on the five-session log") {
  Fixture f;
  Engine e = f.engine();
  auto r = e.next("s_c", std::nullopt);
  REQUIRE(r.status == 200);
  CHECK(ids_of(r.body) == std::vector<std::string>{"q5", "q4"});
  CHECK(r.body[0].at("score") == 4);
  CHECK(r.body[1].at("detail").at("pred") == 5);
  CHECK(r.body[0].at("source") == "session_based");
  CHECK(r.body[0].at("question").at("id") == "q5");
  CHECK(ids_of(e.next("s_c", 1).body) == std::vector<std::string>{"q5"});
  CHECK(e.next("nope", 1).status == 404);
}

TEST_CASE("cold start falls back to ascending complexity") {
  Fixture f;
  Engine e = f.engine();
  auto s = e.create_session("lab", std::nullopt).body.at("session_id").get<std::string>();
  auto r = e.next(s, 3);
  REQUIRE(r.status == 200);
  // no events at all: every complexity is 0, so ids decide
  CHECK(ids_of(r.body) == std::vector<std::string>{"l1", "l2", "l3"});
  CHECK(r.body[0].at("detail").at("cold_start") == 1);
}

TEST_CASE("answers, explanations and the cooldown window") {
  Fixture f;
  Engine e = f.engine();
  auto s = e.create_session("table3", std::nullopt).body.at("session_id").get<std::string>();

  auto ok = e.submit_answer(s, answer("q3", {{"choices", {0}}}));
  CHECK(ok.status == 200);
  CHECK(ok.body.at("correct") == true);
  CHECK_FALSE(ok.body.contains("explanation"));
  CHECK(ok.body.at("order_position") == 1);

  auto wrong = e.submit_answer(s, answer("q5", {{"choices", {2}}}));
  CHECK(wrong.body.at("correct") == false);
  CHECK(wrong.body.at("explanation") == "Because of q5");
  CHECK(wrong.body.at("order_position") == 2);

  auto has_q5 = [&] {
    auto ids = ids_of(e.next(s, 10).body);
    return std::find(ids.begin(), ids.end(), "q5") != ids.end();
  };
  CHECK_FALSE(has_q5());
  f.clock.advance(std::chrono::minutes(20) - std::chrono::milliseconds(1));
  CHECK_FALSE(has_q5());
  f.clock.advance(std::chrono::milliseconds(2));
  CHECK(has_q5());

  SUBCASE("cooldowns survive a restart") {
    *f.clock.now -= std::chrono::minutes(10);
    Engine again = f.engine();
    auto ids = ids_of(again.next(s, 10).body);
    CHECK(std::find(ids.begin(), ids.end(), "q5") == ids.end());
  }
}

TEST_CASE("answer errors") {
  Fixture f;
  Engine e = f.engine();
  auto s = e.create_session("lab", std::nullopt).body.at("session_id").get<std::string>();
  CHECK(e.submit_answer("nope", answer("l1", {{"choices", {0}}})).status == 404);
  CHECK(e.submit_answer(s, answer("missing", {{"choices", {0}}})).status == 404);
  // question of another app
  CHECK(e.submit_answer(s, answer("q1", {{"choices", {0}}})).status == 404);
  CHECK(e.submit_answer(s, answer("l1", {{"order", {0}}})).status == 422);
  CHECK(e.submit_answer(s, answer("l1", "text")).status == 422);
  CHECK(e.submit_answer(s, Json{{"response", 1}}).status == 422);
  CHECK(e.submit_answer(s, Json{{"question_id", "l1"}}).status == 422);

  CHECK(e.submit_answer(s, answer("seq1", {{"order", {2, 0, 1}}})).body.at("correct") == true);
  CHECK(e.submit_answer(s, answer("seq1", {{"order", {0, 1, 2}}})).body.at("correct") == false);
}

TEST_CASE("repetitions") {
  Fixture f;
  Engine e = f.engine();
  CHECK(e.repetitions("ghost", std::nullopt, std::nullopt).body == Json::array());
  CHECK(e.repetitions("ghost", std::string("nope"), std::nullopt).status == 404);

  auto s = e.create_session("lab", std::string("carol")).body.at("session_id").get<std::string>();
  e.submit_answer(s, answer("l1", {{"choices", {0}}}));
  f.clock.advance(std::chrono::hours(24 * 29));
  e.submit_answer(s, answer("l2", {{"choices", {0}}}));
  f.clock.advance(std::chrono::hours(24));

  auto r = e.repetitions("carol", std::string("lab"), std::nullopt);
  REQUIRE(r.status == 200);
  // l1 idles for 30 days, l2 for one
  CHECK(ids_of(r.body) == std::vector<std::string>{"l1", "l2"});
  CHECK(r.body[0].at("source") == "utility_based");
  CHECK(ids_of(e.repetitions("carol", std::nullopt, 1).body) == std::vector<std::string>{"l1"});
  CHECK(e.repetitions("carol", std::string("table3"), std::nullopt).body.empty());
}

TEST_CASE("repetitions match the brute-force oracle on random state") {
  std::mt19937_64 rng(64);
  for (int round = 0; round < 25; ++round) {
    auto inst = random_utility_instance(rng);
    TempDir dir;
    DataDir data(dir.path());
    data.install_bank(Bank{"app", inst.bank});
    {
      EventLog log(data.events_path());
      for (const auto& ev : inst.events) log.append(ev);
      for (const auto& fb : inst.feedback) log.append(fb);
    }
    ServiceConfig cfg;
    cfg.data_dir = dir.path().string();
    const Instant now = inst.now;
    Engine e(cfg, [now] { return now; });
    auto r = e.repetitions(inst.user, std::string("app"), 1000);
    CHECK(ids_of(r.body) == oracle::utility_order(inst.events, inst.feedback, inst.bank, inst.user, now));
  }
}

TEST_CASE("search") {
  TempDir dir;
  DataDir data(dir.path());
  data.install_bank(table4_bank());
  data.install_bank(lab_bank());
  ServiceConfig cfg;
  cfg.data_dir = dir.path().string();
  Engine e(cfg);

  auto r = e.search(kTable4Query, std::string("diagnosis"), 1);
  REQUIRE(r.body.size() == 1);
  CHECK(r.body[0].at("question_id") == "q6");
  CHECK(r.body[0].at("similarity_exact") == Json{6, 9});
  CHECK(r.body[0].at("similarity") == doctest::Approx(2.0 / 3.0));
  CHECK(r.body[0].at("answer") == "Answer of q6");
  CHECK(e.search("zzzz qqqq", std::nullopt, 5).body == Json::array());
  CHECK(e.search("  ", std::nullopt, 5).status == 422);
  CHECK(e.search("the of", std::nullopt, 5).status == 422);
  CHECK(e.search("minimal", std::string("nope"), 5).status == 404);

  // l1 1, q6 2/3, l3 1/2, q4 2/5
  auto global = ids_of(e.search("minimal search", std::string("global"), 10).body);
  CHECK(global == std::vector<std::string>{"l1", "q6", "l3", "q4"});
  CHECK(ids_of(e.search("minimal search", std::nullopt, 10).body) == global);
  CHECK(ids_of(e.search("minimal search", std::string("lab"), 10).body) == std::vector<std::string>{"l1", "l3"});
}

TEST_CASE("feedback feeds importance") {
  Fixture f;
  Engine e = f.engine();
  auto s = e.create_session("lab", std::string("dave")).body.at("session_id").get<std::string>();
  e.submit_answer(s, answer("l1", {{"choices", {0}}}));
  e.submit_answer(s, answer("l2", {{"choices", {0}}}));
  f.clock.advance(std::chrono::hours(24));

  auto importance_of = [&](const std::string& q) {
    for (const auto& r : e.repetitions("dave", std::nullopt, 10).body) {
      if (r.at("question_id") == q) return r.at("detail").at("importance").get<double>();
    }
    return -1.0;
  };
  CHECK(importance_of("l1") == 0.5);  // unrated prior
  CHECK(e.feedback("l1", {{"value", 1.0}}, std::string("dave")).status == 200);
  CHECK(importance_of("l1") == 0.5);
  for (int i = 0; i < 3; ++i) CHECK(e.feedback("l2", {{"value", 0.5}}, std::nullopt).status == 200);
  CHECK(importance_of("l2") == doctest::Approx(0.375));
  CHECK(e.feedback("l1", {{"value", 2.0}}, std::nullopt).status == 422);
  CHECK(e.feedback("l1", {{"value", "high"}}, std::nullopt).status == 422);
  CHECK(e.feedback("missing", {{"value", 0.5}}, std::nullopt).status == 404);

  // persisted: a fresh engine sees the same importance
  Engine again = f.engine();
  for (const auto& r : again.repetitions("dave", std::nullopt, 10).body) {
    if (r.at("question_id") == "l2") CHECK(r.at("detail").at("importance") == doctest::Approx(0.375));
  }
}

TEST_CASE("knowledge level") {
  Fixture f;
  Engine e = f.engine();
  auto empty = e.knowledge_level("lab", std::string("erin"));
  REQUIRE(empty.status == 200);
  CHECK(empty.body.at("community").at("by_category").at("general").at("share").is_null());
  CHECK(empty.body.at("personal").at("by_question").at("l1").at("share").is_null());
  CHECK(e.knowledge_level("nope", std::nullopt).status == 404);

  auto s = e.create_session("lab", std::string("erin")).body.at("session_id").get<std::string>();
  e.submit_answer(s, answer("l1", {{"choices", {1}}}));
  e.submit_answer(s, answer("l2", {{"choices", {0}}}));
  e.submit_answer(s, answer("l3", {{"choices", {1}}}));
  auto one = e.knowledge_level("lab", std::string("erin")).body;
  CHECK(one.at("personal") == one.at("community"));
  CHECK(one.at("community").at("by_category").at("conflicts").at("share") == 1.0);
  CHECK(one.at("community").at("by_category").at("general").at("share") == doctest::Approx(0.5));

  f.cfg.personal_analytics = false;
  Engine restricted = f.engine();
  auto r = restricted.knowledge_level("lab", std::string("erin")).body;
  CHECK(r.at("personal").is_null());
  CHECK(r.at("personal_enabled") == false);
}

TEST_CASE("knowledge level equals a direct tally on a random log") {
  std::mt19937_64 rng(12);
  for (int round = 0; round < 20; ++round) {
    auto inst = random_utility_instance(rng);
    for (std::size_t i = 0; i < inst.bank.size(); ++i) inst.bank[i].category = i % 2 ? "odd" : "even";
    TempDir dir;
    DataDir data(dir.path());
    data.install_bank(Bank{"app", inst.bank});
    {
      EventLog log(data.events_path());
      for (const auto& ev : inst.events) log.append(ev);
    }
    ServiceConfig cfg;
    cfg.data_dir = dir.path().string();
    Engine e(cfg, [] { return kT0; });
    auto body = e.knowledge_level("app", std::string("u0")).body;

    std::map<std::string, std::pair<int, int>> community, personal;
    for (const auto& ev : inst.events) {
      const std::size_t idx = static_cast<std::size_t>(std::stoi(ev.question_id.substr(1)) - 1);
      const std::string cat = idx % 2 ? "odd" : "even";
      community[cat].first += ev.correct;
      community[cat].second += 1;
      if (ev.user_id == "u0") {
        personal[cat].first += ev.correct;
        personal[cat].second += 1;
      }
    }
    for (const auto& [cat, t] : community) {
      CHECK(body.at("community").at("by_category").at(cat).at("correct") == t.first);
      CHECK(body.at("community").at("by_category").at(cat).at("total") == t.second);
    }
    for (const auto& [cat, t] : personal) {
      CHECK(body.at("personal").at("by_category").at(cat).at("correct") == t.first);
      CHECK(body.at("personal").at("by_category").at(cat).at("total") == t.second);
    }
  }
}

TEST_CASE("GET handlers have no side effects") {
  Fixture f;
  Engine e = f.engine();
  const std::string before = read_text(f.dir / "events.jsonl");
  e.next("s_c", 5);
  e.repetitions("alice", std::nullopt, 5);
  e.search("minimal", std::nullopt, 5);
  e.knowledge_level("table3", std::nullopt);
  CHECK(read_text(f.dir / "events.jsonl") == before);
}

TEST_CASE("HTTP routes") {
  Fixture f;
  Engine e = f.engine();
  httplib::Server server;
  register_routes(server, e);
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client cli("127.0.0.1", port);
  auto apps = cli.Get("/apps");
  REQUIRE(apps);
  CHECK(apps->status == 200);
  CHECK(Json::parse(apps->body).size() == 2);

  auto created = cli.Post("/apps/table3/sessions", httplib::Headers{{"X-User-Id", "zoe"}}, "", "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  const auto session = Json::parse(created->body);
  CHECK(session.at("user_id") == "zoe");
  const std::string sid = session.at("session_id");

  auto ans = cli.Post("/sessions/" + sid + "/answers", answer("q1", {{"choices", {0}}}).dump(), "application/json");
  REQUIRE(ans);
  CHECK(ans->status == 200);
  CHECK(Json::parse(ans->body).at("correct") == true);

  auto bad_json = cli.Post("/sessions/" + sid + "/answers", "{not json", "application/json");
  CHECK(bad_json->status == 400);

  auto next = cli.Get("/sessions/s_c/next?count=2");
  CHECK(next->status == 200);
  CHECK(ids_of(Json::parse(next->body)) == std::vector<std::string>{"q5", "q4"});
  CHECK(cli.Get("/sessions/s_c/next?count=abc")->status == 422);
  CHECK(cli.Get("/sessions/none/next")->status == 404);

  auto search = cli.Get("/search?q=Minimal%20search%3F&app=lab&k=1");
  CHECK(search->status == 200);
  CHECK(ids_of(Json::parse(search->body)) == std::vector<std::string>{"l1"});
  CHECK(cli.Get("/search?q=")->status == 422);

  CHECK(cli.Get("/users/zoe/repetitions?app=table3&count=3")->status == 200);
  CHECK(cli.Get("/apps/table3/knowledge-level?user=zoe")->status == 200);
  CHECK(cli.Get("/apps/none/questions")->status == 404);
  CHECK(cli.Get("/questions/q1")->status == 200);
  auto fb = cli.Post("/questions/q1/feedback", R"({"value": 0.8})", "application/json");
  CHECK(fb->status == 200);
  CHECK(cli.Post("/questions/q1/feedback", R"({"value": 8})", "application/json")->status == 422);

  server.stop();
  t.join();
}

TEST_CASE("configuration file and environment overrides") {
  TempDir dir;
  write_text(dir / "cfg.json", R"({"port": 9000, "data_dir": "/srv/retain", "personal_analytics": false,
                                   "session": {"neighbor_count": 3, "cooldown_minutes": 30},
                                   "utility": {"complexity_floor": 0.05, "dayssince_basis": "last_correct"}})");
  std::map<std::string, std::string> env;
  auto lookup = [&](const std::string& k) -> std::optional<std::string> {
    auto it = env.find(k);
    if (it == env.end()) return std::nullopt;
    return it->second;
  };

  ServiceConfig defaults = load_config(std::nullopt, lookup);
  CHECK(defaults.port == 8080);
  CHECK(defaults.session.cooldown_minutes == 20.0);
  CHECK(defaults.session.neighbor_count == 1);
  CHECK(defaults.utility.complexity_floor == 0.01);

  ServiceConfig file = load_config(dir / "cfg.json", lookup);
  CHECK(file.port == 9000);
  CHECK(file.data_dir == "/srv/retain");
  CHECK_FALSE(file.personal_analytics);
  CHECK(file.session.neighbor_count == 3);
  CHECK(file.session.cooldown_minutes == 30.0);
  CHECK(file.utility.complexity_floor == 0.05);
  CHECK(file.utility.dayssince_basis == DaysSinceBasis::last_correct);

  env = {{"RETAIN_PORT", "9100"}, {"RETAIN_COOLDOWN_MINUTES", "5"}, {"RETAIN_PERSONAL_ANALYTICS", "yes"},
         {"RETAIN_SIMILARITY_DENOMINATOR", "universe"}};
  ServiceConfig over = load_config(dir / "cfg.json", lookup);
  CHECK(over.port == 9100);
  CHECK(over.session.cooldown_minutes == 5.0);
  CHECK(over.personal_analytics);
  CHECK(over.session.similarity_denominator == SimilarityDenominator::universe);

  env = {{"RETAIN_PORT", "eighty"}};
  CHECK_THROWS_AS(load_config(std::nullopt, lookup), ::retain::Error);
  CHECK_THROWS_AS(load_config(dir / "missing.json", lookup), ::retain::Error);
}
