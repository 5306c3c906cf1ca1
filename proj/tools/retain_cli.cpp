// retain: operator entry point (import, serve, next, repetitions, ask,
// simulate, verify). Exit codes: 0 success, 1 domain error, 2 usage or I/O.
#include <httplib.h>

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "retain/catalog.hpp"
#include "retain/content_rec.hpp"
#include "retain/error.hpp"
#include "retain/service.hpp"
#include "retain/simulator.hpp"
#include "retain/store.hpp"

namespace fs = std::filesystem;
using namespace retain;

namespace {

constexpr int kOk = 0;
constexpr int kDomainError = 1;
constexpr int kUsageError = 2;

int exit_code_for(const Error& e) {
  return e.kind() == ErrorKind::io ? kUsageError : kDomainError;
}

struct Workspace {
  Catalog catalog;
  RebuildResult rebuilt;
};

Workspace open_workspace(const fs::path& data) {
  DataDir dir(data);
  Workspace ws{Catalog(dir.load_banks()), {}};
  ws.rebuilt = rebuild_snapshot(dir.events_path(), ws.catalog.all_questions());
  for (const auto& w : ws.rebuilt.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  return ws;
}

const CLI::Validator kInstant(
    [](std::string& text) -> std::string {
      try {
        parse_iso8601(text);
        return {};
      } catch (const Error& e) {
        return e.what();
      }
    },
    "ISO-8601", "instant");

Instant resolve_now(const std::string& now) { return now.empty() ? system_now() : parse_iso8601(now); }

void print_recommendations(const std::vector<Recommendation>& recs) {
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    std::printf("%zu\t%s\tscore=%.4f", i + 1, r.question_id.c_str(), r.score);
    for (const auto& [k, v] : r.detail) std::printf("\t%s=%.4g", k.c_str(), v);
    std::printf("\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"retain: spaced-repetition and question recommendation engine"};
  app.require_subcommand(1);
  std::string data = "./data";
  std::string config_path;
  app.add_option("--data", data, "Data directory")->capture_default_str();
  app.add_option("--config", config_path, "Service configuration file (JSON)");

  auto* import_cmd = app.add_subcommand("import", "Validate and install a question bank");
  std::string bank_path;
  import_cmd->add_option("--bank", bank_path, "Bank JSON file")->required();

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  int port = -1;
  std::string host;
  serve_cmd->add_option("--port", port, "Listen port (overrides config)");
  serve_cmd->add_option("--host", host, "Listen address (overrides config)");

  std::string now_text;
  auto* next_cmd = app.add_subcommand("next", "Recommend the next questions of a session");
  std::string session_id;
  std::size_t count = 5;
  next_cmd->add_option("--session", session_id, "Session id")->required();
  next_cmd->add_option("--count", count, "Number of questions")->capture_default_str();
  next_cmd->add_option("--now", now_text, "Evaluation time (ISO-8601); defaults to the clock")->check(kInstant);

  auto* rep_cmd = app.add_subcommand("repetitions", "Repetition schedule for a signed-in user");
  std::string user_id, rep_app;
  std::size_t rep_count = 10;
  rep_cmd->add_option("--user", user_id, "User id")->required();
  rep_cmd->add_option("--app", rep_app, "Restrict to one app");
  rep_cmd->add_option("--count", rep_count, "Number of questions")->capture_default_str();
  rep_cmd->add_option("--now", now_text, "Evaluation time (ISO-8601); defaults to the clock")->check(kInstant);

  auto* ask_cmd = app.add_subcommand("ask", "Answer a free-text query from the question banks");
  std::string query, ask_app;
  bool global = false;
  std::size_t k = 3;
  ask_cmd->add_option("--query", query, "Query text")->required();
  auto* app_opt = ask_cmd->add_option("--app", ask_app, "Search one app");
  auto* global_opt = ask_cmd->add_flag("--global", global, "Search every app");
  app_opt->excludes(global_opt);
  ask_cmd->add_option("--k", k, "Maximum results")->capture_default_str()->check(CLI::PositiveNumber);

  auto* sim_cmd = app.add_subcommand("simulate", "Replay a synthetic population against the recommenders");
  std::size_t users = sim::kDefaultUsers, questions = sim::kDefaultQuestions, sim_k = sim::kDefaultK;
  std::uint64_t seed = sim::kDefaultSeed;
  double horizon = sim::kDefaultHorizonDays;
  std::string report_path;
  sim_cmd->add_option("--users", users, "Synthetic learners")->capture_default_str()->check(CLI::PositiveNumber);
  sim_cmd->add_option("--questions", questions, "Bank size")->capture_default_str()->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
  sim_cmd->add_option("--horizon", horizon, "Days between the end of history and evaluation")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("--k", sim_k, "Cutoff for precision@k")->capture_default_str()->check(CLI::PositiveNumber);
  sim_cmd->add_option("--report", report_path, "Write the JSON report here");

  app.add_subcommand("verify", "Check banks and the event log");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*import_cmd) {
      if (!fs::exists(bank_path)) {
        std::fprintf(stderr, "error: bank file not found: %s\n", bank_path.c_str());
        return kUsageError;
      }
      Bank bank = load_bank(bank_path);
      DataDir(data).install_bank(bank);
      std::printf("installed app '%s' with %zu questions\n", bank.app_id.c_str(), bank.questions.size());
      return kOk;
    }

    if (*serve_cmd) {
      std::optional<fs::path> cfg_file;
      if (!config_path.empty()) cfg_file = config_path;
      ServiceConfig cfg = load_config(cfg_file);
      if (app.get_option("--data")->count() > 0 || !cfg_file) cfg.data_dir = data;
      if (port >= 0) cfg.port = port;
      if (!host.empty()) cfg.host = host;
      Engine engine(cfg);
      httplib::Server server;
      register_routes(server, engine);
      std::printf("listening on http://%s:%d (data: %s)\n", cfg.host.c_str(), cfg.port,
                  cfg.data_dir.string().c_str());
      std::fflush(stdout);
      if (!server.listen(cfg.host, cfg.port)) {
        std::fprintf(stderr, "error: cannot listen on %s:%d\n", cfg.host.c_str(), cfg.port);
        return kUsageError;
      }
      return kOk;
    }

    if (*next_cmd) {
      Workspace ws = open_workspace(data);
      const Snapshot& snap = ws.rebuilt.snapshot;
      const SessionLog* session = snap.find_session(session_id);
      if (session == nullptr) {
        std::fprintf(stderr, "error: unknown session '%s'\n", session_id.c_str());
        return kDomainError;
      }
      auto app_id = ws.catalog.app_of(*session);
      if (!app_id) {
        std::fprintf(stderr, "error: session '%s' has no known app\n", session_id.c_str());
        return kDomainError;
      }
      std::optional<fs::path> cfg_file;
      if (!config_path.empty()) cfg_file = config_path;
      ServiceConfig cfg = load_config(cfg_file);
      auto pools = ws.catalog.session_pools(snap);
      CooldownSet cooldown = cooldowns_from_events(session->events(), cfg.session.cooldown_minutes);
      auto recs = next_questions(ws.catalog, snap, pools[*app_id], *session, *app_id, cooldown, cfg.session,
                                 count, resolve_now(now_text));
      print_recommendations(recs);
      return kOk;
    }

    if (*rep_cmd) {
      Workspace ws = open_workspace(data);
      std::optional<fs::path> cfg_file;
      if (!config_path.empty()) cfg_file = config_path;
      ServiceConfig cfg = load_config(cfg_file);
      cfg.utility.max_results = rep_count;
      if (!rep_app.empty() && ws.catalog.find_app(rep_app) == nullptr) {
        std::fprintf(stderr, "error: unknown app '%s'\n", rep_app.c_str());
        return kDomainError;
      }
      std::vector<AnswerEvent> mine;
      for (const auto& e : ws.rebuilt.events) {
        if (e.user_id == user_id) mine.push_back(e);
      }
      CooldownSet cooldown = cooldowns_from_events(mine, cfg.session.cooldown_minutes);
      auto bank = rep_app.empty() ? ws.catalog.all_questions() : ws.catalog.questions(rep_app);
      if (rep_count > 0) {
        print_recommendations(
            repetition_schedule(user_id, ws.rebuilt.snapshot, bank, cooldown, cfg.utility, resolve_now(now_text)));
      }
      return kOk;
    }

    if (*ask_cmd) {
      DataDir dir(data);
      Catalog catalog(dir.load_banks());
      SearchScope scope;
      if (!global && !ask_app.empty()) {
        if (catalog.find_app(ask_app) == nullptr) {
          std::fprintf(stderr, "error: unknown app '%s'\n", ask_app.c_str());
          return kDomainError;
        }
        scope = ask_app;
      }
      auto hits = answer_query(query, catalog.all_questions(), FeatureExtractor{}, k, scope);
      if (hits.empty()) {
        std::printf("no results\n");
        return kOk;
      }
      for (const auto& h : hits) {
        std::printf("%s\t%.2f\t%s\n", h.question_id.c_str(), h.similarity, h.answer.c_str());
      }
      return kOk;
    }

    if (*sim_cmd) {
      auto pop = sim::generate_population(users, questions, seed);
      auto utility = sim::evaluate_utility_recommender(pop, horizon, sim_k, seed, sim::Ranker::utility);
      UtilityRecConfig plain;
      plain.use_importance_complexity = false;
      auto utility_plain = sim::evaluate_utility_recommender(pop, horizon, sim_k, seed, sim::Ranker::utility, plain);
      utility_plain.recommender = "utility_plain";
      auto random = sim::evaluate_utility_recommender(pop, horizon, sim_k, seed, sim::Ranker::random);
      auto oracle = sim::evaluate_utility_recommender(pop, horizon, sim_k, seed, sim::Ranker::oracle);
      std::optional<sim::EvalReport> session;
      if (users >= 2 && questions >= 2) session = sim::evaluate_session_recommender(pop, sim_k, seed);

      Json report = {{"users", users},
                     {"questions", questions},
                     {"seed", seed},
                     {"horizon_days", horizon},
                     {"k", sim_k},
                     {"events", pop.events.size()},
                     {"utility", sim::eval_report_to_json(utility)},
                     {"utility_plain", sim::eval_report_to_json(utility_plain)},
                     {"random", sim::eval_report_to_json(random)},
                     {"oracle", sim::eval_report_to_json(oracle)},
                     {"session", session ? sim::eval_report_to_json(*session) : Json(nullptr)}};

      std::printf("%-14s %8s %8s %10s %7s\n", "recommender", "p@1", "p@k", "random@1", "trials");
      for (const auto* r : {&utility, &utility_plain, &random, &oracle}) {
        std::printf("%-14s %8.3f %8.3f %10.3f %7zu\n", r->recommender.c_str(), r->precision_at_1,
                    r->precision_at_k, r->baseline_random_precision, r->trials);
      }
      if (session) {
        std::printf("%-14s %8.3f %8.3f %10.3f %7zu\n", "session", session->precision_at_1,
                    session->precision_at_k, session->baseline_random_precision, session->trials);
      }
      if (!report_path.empty()) {
        std::ofstream out(report_path, std::ios::binary | std::ios::trunc);
        if (!out) {
          std::fprintf(stderr, "error: cannot write %s\n", report_path.c_str());
          return kUsageError;
        }
        out << report.dump(2) << '\n';
      }
      return kOk;
    }

    // verify
    DataDir dir(data);
    std::vector<Bank> banks;
    try {
      banks = dir.load_banks();
    } catch (const Error& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return kDomainError;
    }
    Catalog catalog(std::move(banks));
    auto log = read_log(dir.events_path());
    auto rebuilt = rebuild_snapshot(log, catalog.all_questions());
    for (const auto& w : rebuilt.warnings) std::printf("warning: %s\n", w.c_str());

    std::size_t problems = 0;
    std::map<SessionId, Instant> last_ts;
    for (const auto& e : rebuilt.events) {
      auto [it, inserted] = last_ts.emplace(e.session_id, e.timestamp);
      if (!inserted) {
        if (e.timestamp < it->second) {
          std::printf("error: session '%s' goes back in time at position %u\n", e.session_id.c_str(),
                      e.order_position);
          ++problems;
        }
        it->second = std::max(it->second, e.timestamp);
      }
    }
    for (const auto& [key, uq] : rebuilt.snapshot.user_stats) {
      if (uq.correct_count > uq.total_count) ++problems;
    }
    std::printf("%zu apps, %zu questions, %zu events, %zu feedback records, %zu warnings\n",
                catalog.banks().size(), catalog.all_questions().size(), rebuilt.events.size(),
                rebuilt.feedback.size(), rebuilt.warnings.size());
    return problems == 0 ? kOk : kDomainError;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsageError;
  }
}
