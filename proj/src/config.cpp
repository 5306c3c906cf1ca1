#include "retain/config.hpp"

#include <cstdlib>
#include <fstream>

#include "retain/error.hpp"
#include "retain/json_io.hpp"

namespace retain {

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

namespace {

SimilarityDenominator parse_denominator(const std::string& s) {
  if (s == "current_session") return SimilarityDenominator::current_session;
  if (s == "universe") return SimilarityDenominator::universe;
  throw Error(ErrorKind::invalid_argument, "similarity_denominator must be current_session or universe");
}

DaysSinceBasis parse_basis(const std::string& s) {
  if (s == "any_answer") return DaysSinceBasis::any_answer;
  if (s == "last_correct") return DaysSinceBasis::last_correct;
  throw Error(ErrorKind::invalid_argument, "dayssince_basis must be any_answer or last_correct");
}

bool parse_bool(const std::string& name, const std::string& s) {
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw Error(ErrorKind::invalid_argument, name + ": expected a boolean, got '" + s + "'");
}

double parse_double(const std::string& name, const std::string& s) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::invalid_argument, name + ": expected a number, got '" + s + "'");
}

void apply_file(ServiceConfig& cfg, const Json& j) {
  cfg.host = j.value("host", cfg.host);
  cfg.port = j.value("port", cfg.port);
  if (j.contains("data_dir")) cfg.data_dir = j["data_dir"].get<std::string>();
  cfg.default_count = j.value("default_count", cfg.default_count);
  cfg.personal_analytics = j.value("personal_analytics", cfg.personal_analytics);
  if (auto s = j.find("session"); s != j.end()) {
    cfg.session.neighbor_count = s->value("neighbor_count", cfg.session.neighbor_count);
    cfg.session.cooldown_minutes = s->value("cooldown_minutes", cfg.session.cooldown_minutes);
    if (s->contains("similarity_denominator")) {
      cfg.session.similarity_denominator = parse_denominator((*s)["similarity_denominator"].get<std::string>());
    }
  }
  if (auto u = j.find("utility"); u != j.end()) {
    cfg.utility.complexity_floor = u->value("complexity_floor", cfg.utility.complexity_floor);
    cfg.utility.use_importance_complexity =
        u->value("use_importance_complexity", cfg.utility.use_importance_complexity);
    cfg.utility.max_results = u->value("max_results", cfg.utility.max_results);
    cfg.utility.unrated_importance = u->value("unrated_importance", cfg.utility.unrated_importance);
    if (u->contains("dayssince_basis")) {
      cfg.utility.dayssince_basis = parse_basis((*u)["dayssince_basis"].get<std::string>());
    }
  }
}

}  // namespace

ServiceConfig load_config(const std::optional<std::filesystem::path>& path, const EnvLookup& env) {
  ServiceConfig cfg;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw Error(ErrorKind::io, "cannot open config " + path->string());
    try {
      apply_file(cfg, Json::parse(in));
    } catch (const Json::exception& e) {
      throw Error(ErrorKind::parse, path->string() + ": " + e.what());
    }
  }

  if (auto v = env("RETAIN_HOST")) cfg.host = *v;
  if (auto v = env("RETAIN_PORT")) cfg.port = static_cast<int>(parse_double("RETAIN_PORT", *v));
  if (auto v = env("RETAIN_DATA_DIR")) cfg.data_dir = *v;
  if (auto v = env("RETAIN_NEIGHBOR_COUNT")) {
    cfg.session.neighbor_count = static_cast<std::size_t>(parse_double("RETAIN_NEIGHBOR_COUNT", *v));
  }
  if (auto v = env("RETAIN_COOLDOWN_MINUTES")) cfg.session.cooldown_minutes = parse_double("RETAIN_COOLDOWN_MINUTES", *v);
  if (auto v = env("RETAIN_SIMILARITY_DENOMINATOR")) cfg.session.similarity_denominator = parse_denominator(*v);
  if (auto v = env("RETAIN_COMPLEXITY_FLOOR")) cfg.utility.complexity_floor = parse_double("RETAIN_COMPLEXITY_FLOOR", *v);
  if (auto v = env("RETAIN_USE_IMPORTANCE_COMPLEXITY")) {
    cfg.utility.use_importance_complexity = parse_bool("RETAIN_USE_IMPORTANCE_COMPLEXITY", *v);
  }
  if (auto v = env("RETAIN_PERSONAL_ANALYTICS")) cfg.personal_analytics = parse_bool("RETAIN_PERSONAL_ANALYTICS", *v);

  if (cfg.session.neighbor_count < 1) throw Error(ErrorKind::invalid_argument, "neighbor_count must be >= 1");
  if (!(cfg.session.cooldown_minutes > 0)) throw Error(ErrorKind::invalid_argument, "cooldown_minutes must be positive");
  cfg.utility.validate();
  return cfg;
}

}  // namespace retain
