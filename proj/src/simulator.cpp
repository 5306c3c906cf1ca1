#include "retain/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "retain/error.hpp"
#include "retain/session_rec.hpp"

namespace retain::sim {

double SyntheticLearner::recall_probability(std::size_t question, double days_since) const {
  const double p = skill.at(question) * std::exp2(-days_since / memory_half_life);
  return std::clamp(p, 0.0, 1.0);
}

std::mt19937_64 trial_stream(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::string numbered(const char* fmt, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, fmt, i);
  return buf;
}

const Instant kEpoch = parse_iso8601("2024-01-08T08:00:00Z");

}  // namespace

Population generate_population(std::size_t n_users, std::size_t n_questions, std::uint64_t seed,
                               const PopulationParams& params) {
  if (n_users < 1 || n_questions < 1) {
    throw Error(ErrorKind::invalid_argument, "population needs at least one user and one question");
  }
  Population pop;
  pop.seed = seed;
  auto rng = trial_stream(seed, 0);

  std::vector<double> easiness(n_questions);
  for (std::size_t q = 0; q < n_questions; ++q) {
    easiness[q] = uniform(rng, -params.easiness_spread, params.easiness_spread);
    Question question;
    question.id = numbered("sim-q%03zu", q + 1);
    question.app_id = "sim";
    question.prompt = "Synthetic question " + std::to_string(q + 1);
    question.kind = QuestionKind::text_completion;
    question.answer_key = TextKey{{"answer " + std::to_string(q + 1)}};
    question.features = {numbered("topic%zu", q % 5), numbered("concept%zu", q + 1)};
    question.days_to_forget = params.days_to_forget;
    question.category = numbered("category%zu", q % 4);
    pop.questions.push_back(std::move(question));
  }

  SyntheticLearner shared;
  for (std::size_t u = 0; u < n_users; ++u) {
    SyntheticLearner learner;
    if (params.identical_learners && u > 0) {
      learner = shared;
    } else {
      const double ability = uniform(rng, params.ability_min, params.ability_max);
      learner.skill.resize(n_questions);
      for (std::size_t q = 0; q < n_questions; ++q) {
        learner.skill[q] = std::clamp(ability + easiness[q] + uniform(rng, -0.05, 0.05), 0.05, 1.0);
      }
      learner.memory_half_life = uniform(rng, params.half_life_min, params.half_life_max) * params.half_life_scale;
      learner.session_cadence = uniform(rng, params.cadence_min, params.cadence_max);
      if (u == 0) shared = learner;
    }
    learner.user_id = numbered("u%03zu", u + 1);
    pop.learners.push_back(learner);
  }

  const std::size_t reviews = std::min(params.max_review_sessions, n_questions - 1);
  const std::size_t review_size =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(params.review_fraction * n_questions)));

  for (std::size_t u = 0; u < n_users; ++u) {
    const SyntheticLearner& learner = pop.learners[u];
    auto urng = trial_stream(seed, 1000 + u);
    std::vector<std::optional<Instant>> last_seen(n_questions);
    const Instant start = add_days(kEpoch, uniform(urng, 0.0, 1.0));

    for (std::size_t session = 0; session <= reviews; ++session) {
      Instant t = session == 0
                      ? start
                      : add_days(start, session * learner.session_cadence * uniform(urng, 0.75, 1.25));
      std::vector<std::size_t> picked(n_questions);
      std::iota(picked.begin(), picked.end(), 0);
      if (session > 0) {
        std::shuffle(picked.begin(), picked.end(), urng);
        picked.resize(std::min(review_size, n_questions));
      }

      auto recall_now = [&](std::size_t q) {
        double ds = last_seen[q] ? fractional_days(*last_seen[q], t) : 0.0;
        return learner.recall_probability(q, ds);
      };
      // Learners start with what feels easiest to them.
      std::vector<std::pair<double, std::size_t>> order;
      for (std::size_t q : picked) order.emplace_back(recall_now(q) + uniform(urng, -0.1, 0.1), q);
      std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
      });

      const std::string session_id = learner.user_id + "-s" + std::to_string(session);
      std::uint32_t position = 0;
      for (const auto& [_, q] : order) {
        const double p = recall_now(q);
        AnswerEvent e;
        e.session_id = session_id;
        e.user_id = learner.user_id;
        e.question_id = pop.questions[q].id;
        e.correct = uniform(urng, 0.0, 1.0) < p;
        e.order_position = ++position;
        e.timestamp = t;
        pop.events.push_back(std::move(e));
        last_seen[q] = t;
        t += std::chrono::seconds(45);
      }
    }
  }

  std::stable_sort(pop.events.begin(), pop.events.end(),
                   [](const AnswerEvent& a, const AnswerEvent& b) { return a.timestamp < b.timestamp; });
  pop.history_end = pop.events.back().timestamp;
  return pop;
}

std::vector<double> days_since_exposure(const Population& pop, std::size_t learner, Instant now) {
  std::map<QuestionId, std::size_t> index;
  for (std::size_t q = 0; q < pop.questions.size(); ++q) index[pop.questions[q].id] = q;
  std::vector<std::optional<Instant>> last(pop.questions.size());
  const UserId& user = pop.learners.at(learner).user_id;
  for (const auto& e : pop.events) {
    if (e.user_id != user) continue;
    auto& slot = last[index.at(e.question_id)];
    if (!slot || *slot < e.timestamp) slot = e.timestamp;
  }
  std::vector<double> out(pop.questions.size(), -1.0);
  for (std::size_t q = 0; q < out.size(); ++q) {
    if (last[q]) out[q] = fractional_days(*last[q], now);
  }
  return out;
}

std::string_view to_string(Ranker r) {
  switch (r) {
    case Ranker::utility: return "utility";
    case Ranker::random: return "random";
    case Ranker::oracle: return "oracle";
  }
  return "unknown";
}

Json eval_report_to_json(const EvalReport& r) {
  return {{"recommender", r.recommender},
          {"precision_at_1", r.precision_at_1},
          {"precision_at_k", r.precision_at_k},
          {"baseline_random_precision", r.baseline_random_precision},
          {"baseline_random_precision_at_k", r.baseline_random_precision_at_k},
          {"baseline_sigma", r.baseline_sigma},
          {"k", r.k},
          {"trials", r.trials},
          {"seed", r.seed}};
}

namespace {

// P(at least one of r relevant items in a uniformly random top-k of n).
double random_hit_probability(std::size_t n, std::size_t r, std::size_t k) {
  if (r == 0) return 0.0;
  k = std::min(k, n);
  if (k > n - r) return 1.0;
  double miss = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    miss *= static_cast<double>(n - r - i) / static_cast<double>(n - i);
  }
  return 1.0 - miss;
}

}  // namespace

EvalReport evaluate_utility_recommender(const Population& pop, double horizon_days, std::size_t k,
                                        std::uint64_t seed, Ranker ranker, const UtilityRecConfig& cfg) {
  EvalReport report;
  report.recommender = std::string(to_string(ranker));
  report.k = std::max<std::size_t>(k, 1);
  report.seed = seed;

  const Snapshot stats = fold_stats(pop.events);
  const Instant now = add_days(pop.history_end, horizon_days);
  UtilityRecConfig ucfg = cfg;
  ucfg.max_results = pop.questions.size();

  double hits1 = 0, hitsk = 0, base1 = 0, basek = 0, var1 = 0;
  for (std::size_t i = 0; i < pop.learners.size(); ++i) {
    const SyntheticLearner& learner = pop.learners[i];
    const auto ds = days_since_exposure(pop, i, now);

    std::vector<std::size_t> candidates;
    std::vector<bool> relevant(pop.questions.size(), false);
    std::size_t n_relevant = 0;
    for (std::size_t q = 0; q < ds.size(); ++q) {
      if (ds[q] < 0) continue;
      candidates.push_back(q);
      if (learner.recall_probability(q, ds[q]) < 0.5) {
        relevant[q] = true;
        ++n_relevant;
      }
    }
    if (n_relevant == 0) continue;

    std::vector<std::size_t> ranked;
    switch (ranker) {
      case Ranker::utility: {
        std::map<QuestionId, std::size_t> index;
        for (std::size_t q = 0; q < pop.questions.size(); ++q) index[pop.questions[q].id] = q;
        for (const auto& rec : repetition_schedule(learner.user_id, stats, pop.questions, {}, ucfg, now)) {
          ranked.push_back(index.at(rec.question_id));
        }
        break;
      }
      case Ranker::random: {
        ranked = candidates;
        auto rng = trial_stream(seed, i);
        std::shuffle(ranked.begin(), ranked.end(), rng);
        break;
      }
      case Ranker::oracle: {
        ranked = candidates;
        std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
          return learner.recall_probability(a, ds[a]) < learner.recall_probability(b, ds[b]);
        });
        break;
      }
    }

    ++report.trials;
    if (!ranked.empty() && relevant[ranked.front()]) hits1 += 1;
    for (std::size_t j = 0; j < std::min(report.k, ranked.size()); ++j) {
      if (relevant[ranked[j]]) {
        hitsk += 1;
        break;
      }
    }
    const double b1 = static_cast<double>(n_relevant) / candidates.size();
    base1 += b1;
    var1 += b1 * (1 - b1);
    basek += random_hit_probability(candidates.size(), n_relevant, report.k);
  }

  if (report.trials > 0) {
    const double n = static_cast<double>(report.trials);
    report.precision_at_1 = hits1 / n;
    report.precision_at_k = hitsk / n;
    report.baseline_random_precision = base1 / n;
    report.baseline_random_precision_at_k = basek / n;
    report.baseline_sigma = std::sqrt(var1) / n;
  }
  return report;
}

EvalReport evaluate_session_recommender(const Population& pop, std::size_t k, std::uint64_t seed,
                                        std::size_t max_prefix) {
  EvalReport report;
  report.recommender = "session";
  report.k = std::max<std::size_t>(k, 1);
  report.seed = seed;

  std::map<QuestionId, std::size_t> index;
  SessionRecConfig cfg;
  for (std::size_t q = 0; q < pop.questions.size(); ++q) {
    index[pop.questions[q].id] = q;
    cfg.question_universe.insert(pop.questions[q].id);
  }

  std::vector<AnswerEvent> placement;
  for (const auto& e : pop.events) {
    if (e.session_id.ends_with("-s0")) placement.push_back(e);
  }
  const Snapshot snapshot = fold_stats(placement);
  if (snapshot.sessions.size() < 2) {
    throw Error(ErrorKind::invalid_argument, "session evaluation needs at least two completed sessions");
  }

  double sum1 = 0, sumk = 0, base = 0;
  for (std::size_t i = 0; i < pop.learners.size(); ++i) {
    const SyntheticLearner& learner = pop.learners[i];
    const SessionLog* own = snapshot.find_session(learner.user_id + "-s0");
    if (own == nullptr || own->events().size() < 2) continue;

    auto rng = trial_stream(seed, i);
    const std::size_t cap = std::min(max_prefix, own->events().size() - 1);
    const std::size_t prefix = 1 + static_cast<std::size_t>(rng() % std::max<std::size_t>(cap, 1));

    SessionLog current("heldout-" + learner.user_id);
    CooldownSet seen;  // questions already posed in the prefix are not candidates
    const Instant now = own->events()[prefix - 1].timestamp;
    for (std::size_t j = 0; j < prefix; ++j) {
      AnswerEvent e = own->events()[j];
      e.session_id = current.session_id();
      current.add(e);
      seen.set(e.question_id, add_days(now, 1.0));
    }

    std::vector<SessionLog> pool;
    for (const auto& [id, s] : snapshot.sessions) {
      if (s.user_id() != learner.user_id) pool.push_back(s);
    }

    std::vector<std::size_t> ordering;
    for (const auto& rec : recommend_next(current, pool, seen, cfg, now)) {
      ordering.push_back(index.at(rec.question_id));
    }
    if (ordering.empty()) {
      for (const auto& q : cfg.question_universe) {
        if (!seen.active(q, now)) ordering.push_back(index.at(q));
      }
    }
    if (ordering.empty()) continue;

    ++report.trials;
    double mean_all = 0;
    for (std::size_t q : ordering) mean_all += learner.skill[q];
    mean_all /= ordering.size();
    const std::size_t top = std::min(report.k, ordering.size());
    double mean_top = 0;
    for (std::size_t j = 0; j < top; ++j) mean_top += learner.skill[ordering[j]];
    mean_top /= top;

    sum1 += learner.skill[ordering.front()];
    sumk += mean_top;
    base += mean_all;
  }

  if (report.trials > 0) {
    const double n = static_cast<double>(report.trials);
    report.precision_at_1 = sum1 / n;
    report.precision_at_k = sumk / n;
    report.baseline_random_precision = base / n;
    report.baseline_random_precision_at_k = base / n;
  }
  return report;
}

}  // namespace retain::sim
