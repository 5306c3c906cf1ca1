#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "retain/session_rec.hpp"
#include "retain/utility_rec.hpp"

namespace retain {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "data";
  SessionRecConfig session;  // question_universe is filled per app at query time
  UtilityRecConfig utility;
  std::size_t default_count = 5;
  bool personal_analytics = true;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

std::optional<std::string> process_env(const std::string& name);

// JSON file layout:
//   {"host", "port", "data_dir",
//    "session": {"neighbor_count", "cooldown_minutes", "similarity_denominator"},
//    "utility": {"complexity_floor", "use_importance_complexity", "max_results",
//                "dayssince_basis", "unrated_importance"},
//    "default_count", "personal_analytics"}
// Environment overrides: RETAIN_HOST, RETAIN_PORT, RETAIN_DATA_DIR,
// RETAIN_NEIGHBOR_COUNT, RETAIN_COOLDOWN_MINUTES, RETAIN_SIMILARITY_DENOMINATOR,
// RETAIN_COMPLEXITY_FLOOR, RETAIN_USE_IMPORTANCE_COMPLEXITY,
// RETAIN_PERSONAL_ANALYTICS.
ServiceConfig load_config(const std::optional<std::filesystem::path>& path,
                          const EnvLookup& env = process_env);

}  // namespace retain
