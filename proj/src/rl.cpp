#include "ladder/rl.hpp"

#include "ladder/best_response.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ladder {

void RLConfig::validate() const {
  if (!(dx > 0.0) || !(da > 0.0)) throw std::invalid_argument("rl: grid steps must be positive");
  if (n_x < 1 || n_a < 1) throw std::invalid_argument("rl: grids must be non-empty");
  if (episodes < 1 || horizon < 1) throw std::invalid_argument("rl: episodes/horizon must be >= 1");
  if (!(discount > 0.0 && discount <= 1.0)) throw std::invalid_argument("rl: discount outside (0,1]");
  if (!(ucb_coefficient > 0.0)) throw std::invalid_argument("rl: ucb coefficient must be positive");
  if (seeds < 1) throw std::invalid_argument("rl: seeds must be >= 1");
}

int DiscreteEnv::snap(double x) const {
  const double k = std::floor(x / cfg.dx + 0.5);
  return static_cast<int>(std::clamp(k, 0.0, static_cast<double>(cfg.n_x)));
}

void DiscreteEnv::model(int s, int a, double& expected_reward,
                        std::array<Branch, 3>& out) const {
  const int level = level_of(s);
  const double x = x_of(s);
  const double ai = a_improve_of(a);
  const double ag = a_game_of(a);
  const LevelSpec lv = ladder.level(level);
  const TransitionProbs p = decision_probabilities(params, lv, x + ai + ag);

  const double cost = cost_improve * ai + cost_game * ag;
  expected_reward =
      params.reward_per_level * (level + p.p_up - p.p_down) - cost;

  const int xb = snap(params.gamma * (x + ai));  // gaming leaves the attribute
  out[0] = {p.p_up, state_index(std::min(level + 1, n_levels()), xb)};
  out[1] = {p.p_stay, state_index(level, xb)};
  out[2] = {p.p_down, state_index(std::max(level - 1, 1), xb)};
}

std::pair<int, double> DiscreteEnv::step(int s, int a, std::mt19937_64& rng) const {
  const int level = level_of(s);
  const double x = x_of(s);
  const double ai = a_improve_of(a);
  const double ag = a_game_of(a);
  const LevelSpec lv = ladder.level(level);
  const TransitionProbs p = decision_probabilities(params, lv, x + ai + ag);
  const Outcome o = sample_decision(p, rng);

  int next_level = level;
  if (o == Outcome::promote) next_level = std::min(level + 1, n_levels());
  if (o == Outcome::demote) next_level = std::max(level - 1, 1);
  const int xb = snap(params.gamma * (x + ai));
  const double reward = params.reward_per_level * next_level -
                        cost_improve * ai - cost_game * ag;
  return {state_index(next_level, xb), reward};
}

DiscreteEnv build_discrete_env(const ModelParams& params, const Ladder& ladder,
                               const RLConfig& cfg) {
  cfg.validate();
  if (cfg.n_x * cfg.dx < ladder.mu.back()) {
    throw std::invalid_argument(
        "rl: attribute grid span cannot reach the terminal threshold");
  }
  DiscreteEnv env{params, ladder, cfg, 0.0, 0.0};
  env.cost_improve = select_direction(params, Restriction::improvement_only).unit_cost;
  env.cost_game = select_direction(params, Restriction::gaming_only).unit_cost;
  return env;
}

int TabularPolicy::greedy(int s) const {
  int best = 0;
  double best_q = Q(s, 0);
  for (int a = 1; a < n_actions; ++a) {
    if (Q(s, a) > best_q) {
      best_q = Q(s, a);
      best = a;
    }
  }
  return best;
}

namespace {

int ucb_select(const TabularPolicy& t, int s, double coef) {
  const int total = t.state_counts[static_cast<size_t>(s)];
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < t.n_actions; ++a) {
    const int c = t.counts[static_cast<size_t>(s) * t.n_actions + a];
    double score;
    if (c == 0) {
      return a;  // unexplored first, lowest index
    }
    score = t.Q(s, a) + coef * std::sqrt(std::log(std::max(total, 1)) / c);
    if (score > best_score) {
      best_score = score;
      best = a;
    }
  }
  return best;
}

}  // namespace

TrainResult sarsa_train(const DiscreteEnv& env, const RLConfig& cfg, uint64_t seed) {
  cfg.validate();
  TrainResult out;
  TabularPolicy& t = out.policy;
  t.n_states = env.n_states();
  t.n_actions = env.n_actions();
  t.q.assign(static_cast<size_t>(t.n_states) * t.n_actions, 0.0);
  t.counts.assign(t.q.size(), 0);
  t.state_counts.assign(static_cast<size_t>(t.n_states), 0);
  out.episode_returns.reserve(static_cast<size_t>(cfg.episodes));

  std::mt19937_64 rng(seed);
  for (int ep = 0; ep < cfg.episodes; ++ep) {
    int s = env.start_state();
    int a = ucb_select(t, s, cfg.ucb_coefficient);
    double ep_reward = 0.0;
    for (int step = 0; step < cfg.horizon; ++step) {
      const auto [s2, r] = env.step(s, a, rng);
      ep_reward += r;
      const int a2 = ucb_select(t, s2, cfg.ucb_coefficient);
      const size_t idx = static_cast<size_t>(s) * t.n_actions + a;
      t.counts[idx] += 1;
      t.state_counts[static_cast<size_t>(s)] += 1;
      const double lr = 1.0 / (1.0 + t.counts[idx]);
      const double target = r + cfg.discount * t.Q(s2, a2);
      t.q[idx] += lr * (target - t.q[idx]);
      s = s2;
      a = a2;
    }
    out.episode_returns.push_back(ep_reward);
  }
  return out;
}

EvalResult evaluate_policy(const TabularPolicy& policy, const DiscreteEnv& env,
                           int T, uint64_t seed) {
  EvalResult out;
  std::mt19937_64 rng(seed);
  int s = env.start_state();
  for (int step = 0; step < T; ++step) {
    const int a = policy.greedy(s);
    const double ai = env.a_improve_of(a);
    const double ag = env.a_game_of(a);
    out.avg_improve_effort += ai;
    out.avg_game_effort += ag;

    const int level = env.level_of(s);
    const double x = env.x_of(s);
    const LevelSpec lv = env.ladder.level(level);
    const RawDecision d = raw_decision(env.params, x + ai + ag - lv.mu);
    const double post_attr = x + ai;
    out.decision_maker_utility +=
        (1.0 - d.h) * (post_attr >= lv.mu ? d.sigma : d.sigma_c);

    const auto [s2, r] = env.step(s, a, rng);
    out.avg_reward += r;
    s = s2;
  }
  if (T > 0) {
    out.avg_improve_effort /= T;
    out.avg_game_effort /= T;
    out.decision_maker_utility /= T;
    out.avg_reward /= T;
  }
  return out;
}

VIResult value_iteration_oracle(const DiscreteEnv& env, double discount, double tol) {
  if (!(discount < 1.0)) {
    throw std::invalid_argument("value_iteration_oracle: discount must be < 1");
  }
  const int S = env.n_states();
  const int A = env.n_actions();

  // cache the model once
  std::vector<double> rew(static_cast<size_t>(S) * A);
  std::vector<std::array<DiscreteEnv::Branch, 3>> br(static_cast<size_t>(S) * A);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      env.model(s, a, rew[static_cast<size_t>(s) * A + a], br[static_cast<size_t>(s) * A + a]);
    }
  }

  VIResult out;
  out.values.assign(static_cast<size_t>(S), 0.0);
  out.greedy.assign(static_cast<size_t>(S), 0);
  std::vector<double> next(static_cast<size_t>(S), 0.0);
  for (int it = 0; it < 1000000; ++it) {
    double delta = 0.0;
    for (int s = 0; s < S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      int best_a = 0;
      for (int a = 0; a < A; ++a) {
        const size_t idx = static_cast<size_t>(s) * A + a;
        double q = rew[idx];
        for (const auto& b : br[idx]) {
          if (b.prob > 0.0) q += discount * b.prob * out.values[static_cast<size_t>(b.next_state)];
        }
        if (q > best) {  // strict: lowest action index wins ties
          best = q;
          best_a = a;
        }
      }
      next[static_cast<size_t>(s)] = best;
      out.greedy[static_cast<size_t>(s)] = best_a;
      delta = std::max(delta, std::abs(best - out.values[static_cast<size_t>(s)]));
    }
    out.values.swap(next);
    out.iterations = it + 1;
    if (delta < tol) return out;
  }
  throw std::runtime_error("value_iteration_oracle: iteration cap reached");
}

std::vector<double> policy_evaluation(const DiscreteEnv& env,
                                      const std::vector<int>& actions,
                                      double discount, double tol) {
  if (!(discount < 1.0)) {
    throw std::invalid_argument("policy_evaluation: discount must be < 1");
  }
  const int S = env.n_states();
  std::vector<double> v(static_cast<size_t>(S), 0.0), next(static_cast<size_t>(S));
  std::vector<double> rew(static_cast<size_t>(S));
  std::vector<std::array<DiscreteEnv::Branch, 3>> br(static_cast<size_t>(S));
  for (int s = 0; s < S; ++s) {
    env.model(s, actions[static_cast<size_t>(s)], rew[static_cast<size_t>(s)], br[static_cast<size_t>(s)]);
  }
  for (int it = 0; it < 1000000; ++it) {
    double delta = 0.0;
    for (int s = 0; s < S; ++s) {
      double q = rew[static_cast<size_t>(s)];
      for (const auto& b : br[static_cast<size_t>(s)]) {
        if (b.prob > 0.0) q += discount * b.prob * v[static_cast<size_t>(b.next_state)];
      }
      next[static_cast<size_t>(s)] = q;
      delta = std::max(delta, std::abs(q - v[static_cast<size_t>(s)]));
    }
    v.swap(next);
    if (delta < tol) return v;
  }
  throw std::runtime_error("policy_evaluation: iteration cap reached");
}

}  // namespace ladder
