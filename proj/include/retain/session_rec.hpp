#pragma once

#include <functional>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "retain/domain.hpp"

namespace retain {

// Which set normalizes the overlap of correctly answered questions.
// current_session: |correct(c)|, reproduces the worked example (sim = 1.0).
// universe: |Q|, the literal printed denominator.
enum class SimilarityDenominator { current_session, universe };

struct SessionRecConfig {
  std::size_t neighbor_count = 1;
  double cooldown_minutes = 20.0;
  std::set<QuestionId> question_universe;
  SimilarityDenominator similarity_denominator = SimilarityDenominator::current_session;

  // Throws Error(invalid_argument) on a broken invariant.
  void validate() const;
};

struct Neighbor {
  std::reference_wrapper<const SessionLog> session;
  double similarity = 0;
};

double session_similarity(const SessionLog& a, const SessionLog& c,
                          const std::set<QuestionId>& universe,
                          SimilarityDenominator denominator = SimilarityDenominator::current_session);

// Top `cfg.neighbor_count` sessions of `pool` by similarity to `c` (ties by
// session id). A session qualifies only if it ranks at least one question of
// the universe that `c` has not answered correctly; `c` itself never does.
std::vector<Neighbor> nearest_neighbors(const SessionLog& c, std::span<const SessionLog> pool,
                                        const SessionRecConfig& cfg);

// Mean of r(q, s_i) * sim(s_i, c) over the neighbors; a neighbor that never
// ranked q adds 0. Throws Error(invalid_argument) "no neighbors" when empty.
double eval_question(const QuestionId& q, const SessionLog& c, std::span<const Neighbor> snn);

// Dense 1-based ranks: smallest eval first, ties by question id.
std::map<QuestionId, int> rank_evals(const std::map<QuestionId, double>& evals);

// c.current_rank() + rank of evals[q]. Throws Error(not_found) if q is absent.
int predict_rank(const QuestionId& q, const SessionLog& c,
                 const std::map<QuestionId, double>& evals);

// Candidates are the universe minus questions answered correctly in c minus
// active cooldowns, ordered by predicted rank then id. Empty when no
// neighbor qualifies; cold start is the caller's decision.
std::vector<Recommendation> recommend_next(const SessionLog& c, std::span<const SessionLog> pool,
                                           const CooldownSet& cooldown,
                                           const SessionRecConfig& cfg, Instant now);

CooldownSet register_wrong_answer(CooldownSet cooldown, const QuestionId& q, Instant now,
                                  const SessionRecConfig& cfg);

}  // namespace retain
