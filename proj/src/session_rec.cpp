#include "retain/session_rec.hpp"

#include <algorithm>
#include <cmath>

#include "retain/error.hpp"

namespace retain {

void SessionRecConfig::validate() const {
  if (neighbor_count < 1) throw Error(ErrorKind::invalid_argument, "neighbor_count must be >= 1");
  if (!(cooldown_minutes > 0)) throw Error(ErrorKind::invalid_argument, "cooldown_minutes must be positive");
  if (question_universe.empty()) throw Error(ErrorKind::invalid_argument, "question_universe must not be empty");
}

double session_similarity(const SessionLog& a, const SessionLog& c,
                          const std::set<QuestionId>& universe,
                          SimilarityDenominator denominator) {
  std::size_t shared = 0;
  std::size_t correct_in_c = 0;
  for (const auto& q : c.correct_set()) {
    if (!universe.contains(q)) continue;
    ++correct_in_c;
    if (a.correct(q)) ++shared;
  }
  std::size_t norm = denominator == SimilarityDenominator::universe ? universe.size() : correct_in_c;
  if (norm == 0) return 0.0;
  return static_cast<double>(shared) / static_cast<double>(norm);
}

namespace {

std::vector<QuestionId> open_questions(const SessionLog& c, const std::set<QuestionId>& universe) {
  std::vector<QuestionId> open;
  for (const auto& q : universe) {
    if (!c.correct(q)) open.push_back(q);
  }
  return open;
}

}  // namespace

std::vector<Neighbor> nearest_neighbors(const SessionLog& c, std::span<const SessionLog> pool,
                                        const SessionRecConfig& cfg) {
  const auto open = open_questions(c, cfg.question_universe);
  std::vector<Neighbor> scored;
  for (const SessionLog& s : pool) {
    if (s.session_id() == c.session_id()) continue;
    bool ranks_open = std::any_of(open.begin(), open.end(),
                                  [&](const QuestionId& q) { return s.rank_of(q).has_value(); });
    if (!ranks_open) continue;
    scored.push_back({s, session_similarity(s, c, cfg.question_universe, cfg.similarity_denominator)});
  }
  std::sort(scored.begin(), scored.end(), [](const Neighbor& x, const Neighbor& y) {
    if (x.similarity != y.similarity) return x.similarity > y.similarity;
    return x.session.get().session_id() < y.session.get().session_id();
  });
  if (scored.size() > cfg.neighbor_count) scored.erase(scored.begin() + static_cast<long>(cfg.neighbor_count), scored.end());
  return scored;
}

double eval_question(const QuestionId& q, const SessionLog& /*c*/, std::span<const Neighbor> snn) {
  if (snn.empty()) throw Error(ErrorKind::invalid_argument, "no neighbors");
  double sum = 0;
  for (const Neighbor& n : snn) {
    if (auto r = n.session.get().rank_of(q)) sum += *r * n.similarity;
  }
  return sum / static_cast<double>(snn.size());
}

std::map<QuestionId, int> rank_evals(const std::map<QuestionId, double>& evals) {
  std::vector<std::pair<QuestionId, double>> order(evals.begin(), evals.end());
  // std::map iteration already sorts by id, so a stable sort keeps id order on ties.
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& x, const auto& y) { return x.second < y.second; });
  std::map<QuestionId, int> ranks;
  int rank = 0;
  for (const auto& [q, _] : order) ranks[q] = ++rank;
  return ranks;
}

int predict_rank(const QuestionId& q, const SessionLog& c,
                 const std::map<QuestionId, double>& evals) {
  if (!evals.contains(q)) throw Error(ErrorKind::not_found, "no evaluation for question '" + q + "'");
  return c.current_rank() + rank_evals(evals).at(q);
}

std::vector<Recommendation> recommend_next(const SessionLog& c, std::span<const SessionLog> pool,
                                           const CooldownSet& cooldown,
                                           const SessionRecConfig& cfg, Instant now) {
  std::vector<QuestionId> candidates;
  for (const auto& q : cfg.question_universe) {
    if (!c.correct(q) && !cooldown.active(q, now)) candidates.push_back(q);
  }
  if (candidates.empty()) return {};

  const auto snn = nearest_neighbors(c, pool, cfg);
  if (snn.empty()) return {};

  std::map<QuestionId, double> evals;
  for (const auto& q : candidates) evals[q] = eval_question(q, c, snn);
  const auto ranks = rank_evals(evals);

  std::vector<Recommendation> out;
  out.reserve(candidates.size());
  for (const auto& q : candidates) {
    Recommendation rec;
    rec.question_id = q;
    rec.source = RecommendationSource::session_based;
    const int pred = c.current_rank() + ranks.at(q);
    rec.score = pred;
    rec.detail["current_rank"] = c.current_rank();
    rec.detail["eval"] = evals.at(q);
    rec.detail["rank"] = ranks.at(q);
    rec.detail["pred"] = pred;
    for (const Neighbor& n : snn) {
      const auto& sid = n.session.get().session_id();
      rec.detail["sim:" + sid] = n.similarity;
      rec.detail["r:" + sid] = n.session.get().rank_of(q).value_or(0);
    }
    out.push_back(std::move(rec));
  }
  std::sort(out.begin(), out.end(), [](const Recommendation& x, const Recommendation& y) {
    if (x.score != y.score) return x.score < y.score;
    return x.question_id < y.question_id;
  });
  return out;
}

CooldownSet register_wrong_answer(CooldownSet cooldown, const QuestionId& q, Instant now,
                                  const SessionRecConfig& cfg) {
  cooldown.set(q, add_minutes(now, cfg.cooldown_minutes));
  return cooldown;
}

}  // namespace retain
