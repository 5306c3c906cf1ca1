#include "retain/catalog.hpp"

#include <algorithm>

namespace retain {

Catalog::Catalog(std::vector<Bank> banks) : banks_(std::move(banks)) {
  std::sort(banks_.begin(), banks_.end(),
            [](const Bank& a, const Bank& b) { return a.app_id < b.app_id; });
  for (const Bank& b : banks_) {
    std::size_t begin = all_.size();
    all_.insert(all_.end(), b.questions.begin(), b.questions.end());
    app_range_[b.app_id] = {begin, all_.size()};
  }
  for (std::size_t i = 0; i < all_.size(); ++i) index_.emplace(all_[i].id, i);
}

const Bank* Catalog::find_app(const std::string& app_id) const {
  auto it = std::find_if(banks_.begin(), banks_.end(), [&](const Bank& b) { return b.app_id == app_id; });
  return it == banks_.end() ? nullptr : &*it;
}

const Question* Catalog::find_question(const QuestionId& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &all_[it->second];
}

std::span<const Question> Catalog::questions(const std::string& app_id) const {
  auto it = app_range_.find(app_id);
  if (it == app_range_.end()) return {};
  return std::span<const Question>(all_).subspan(it->second.first, it->second.second - it->second.first);
}

std::set<QuestionId> Catalog::universe(const std::string& app_id) const {
  std::set<QuestionId> out;
  for (const auto& q : questions(app_id)) out.insert(q.id);
  return out;
}

std::optional<std::string> Catalog::app_of(const SessionLog& s) const {
  for (const auto& e : s.events()) {
    if (const Question* q = find_question(e.question_id)) return q->app_id;
  }
  return std::nullopt;
}

std::map<std::string, std::vector<SessionLog>> Catalog::session_pools(const Snapshot& snapshot) const {
  std::map<std::string, std::vector<SessionLog>> pools;
  for (const auto& [id, s] : snapshot.sessions) {
    if (auto app = app_of(s)) pools[*app].push_back(s);
  }
  return pools;
}

CooldownSet cooldowns_from_events(std::span<const AnswerEvent> events, double cooldown_minutes) {
  CooldownSet out;
  for (const auto& e : events) {
    if (!e.correct) out.set(e.question_id, add_minutes(e.timestamp, cooldown_minutes));
  }
  return out;
}

std::vector<Recommendation> next_questions(const Catalog& catalog, const Snapshot& snapshot,
                                           std::span<const SessionLog> pool,
                                           const SessionLog& current, const std::string& app_id,
                                           const CooldownSet& cooldown, SessionRecConfig cfg,
                                           std::size_t count, Instant now) {
  cfg.question_universe = catalog.universe(app_id);
  if (cfg.question_universe.empty() || count == 0) return {};

  auto recs = recommend_next(current, pool, cooldown, cfg, now);
  if (recs.empty()) {
    for (const auto& q : cfg.question_universe) {
      if (current.correct(q) || cooldown.active(q, now)) continue;
      QuestionStats qs;
      if (const auto* found = snapshot.find_question_stats(q)) qs = *found;
      Recommendation rec;
      rec.question_id = q;
      rec.source = RecommendationSource::session_based;
      rec.score = complexity(qs);
      rec.detail["complexity"] = rec.score;
      rec.detail["cold_start"] = 1;
      recs.push_back(std::move(rec));
    }
    std::sort(recs.begin(), recs.end(), [](const Recommendation& a, const Recommendation& b) {
      if (a.score != b.score) return a.score < b.score;
      return a.question_id < b.question_id;
    });
  }
  if (recs.size() > count) recs.resize(count);
  return recs;
}

}  // namespace retain
