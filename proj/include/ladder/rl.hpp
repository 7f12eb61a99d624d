#pragma once

#include "ladder/model.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace ladder {

struct RLConfig {
  double dx = 0.2;   // attribute grid step
  int n_x = 100;     // grid spans [0, n_x * dx]
  double da = 0.2;   // action grid step per dimension
  int n_a = 15;      // actions span [0, n_a * da] in each dimension
  int episodes = 1999;
  int horizon = 2500;     // steps per episode
  double discount = 0.99; // eta
  double ucb_coefficient = 1.0;
  int seeds = 10;

  void validate() const;
};

/// Discretized single-dimension MDP: states (level, x-bin), actions
/// (improve-bin, game-bin). Attributes snap to the nearest bin after decay.
struct DiscreteEnv {
  ModelParams params;
  Ladder ladder;
  RLConfig cfg;
  double cost_improve = 0.0;  // scalar unit costs of the two action dims
  double cost_game = 0.0;

  int n_levels() const { return ladder.size(); }
  int n_xpts() const { return cfg.n_x + 1; }
  int n_apts() const { return cfg.n_a + 1; }
  int n_states() const { return n_levels() * n_xpts(); }
  int n_actions() const { return n_apts() * n_apts(); }

  int state_index(int level, int xbin) const { return (level - 1) * n_xpts() + xbin; }
  int level_of(int s) const { return s / n_xpts() + 1; }
  int xbin_of(int s) const { return s % n_xpts(); }
  double x_of(int s) const { return xbin_of(s) * cfg.dx; }
  double a_improve_of(int a) const { return (a / n_apts()) * cfg.da; }
  double a_game_of(int a) const { return (a % n_apts()) * cfg.da; }
  int start_state() const { return state_index(1, 0); }

  /// Nearest bin, half up, clamped to the grid.
  int snap(double x) const;

  struct Branch {
    double prob;
    int next_state;
  };
  /// Exact three-branch model with the expected immediate reward.
  void model(int s, int a, double& expected_reward, std::array<Branch, 3>& out) const;
  /// Sampled transition; reward uses the realized next level.
  std::pair<int, double> step(int s, int a, std::mt19937_64& rng) const;
};

/// Throws when the attribute grid cannot reach the terminal threshold.
DiscreteEnv build_discrete_env(const ModelParams& params, const Ladder& ladder,
                               const RLConfig& cfg);

struct TabularPolicy {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> q;        // indexed s * n_actions + a
  std::vector<int> counts;      // visit counts per (s, a)
  std::vector<int> state_counts;

  double& Q(int s, int a) { return q[static_cast<size_t>(s) * n_actions + a]; }
  double Q(int s, int a) const { return q[static_cast<size_t>(s) * n_actions + a]; }
  /// Greedy action, lowest index on ties.
  int greedy(int s) const;
};

struct TrainResult {
  TabularPolicy policy;
  std::vector<double> episode_returns;  // undiscounted per-episode reward
};

/// On-policy SARSA with UCB exploration; the learning rate is 1/(1+count).
TrainResult sarsa_train(const DiscreteEnv& env, const RLConfig& cfg, uint64_t seed);

struct EvalResult {
  double avg_improve_effort = 0.0;
  double avg_game_effort = 0.0;
  double decision_maker_utility = 0.0;  // average-accuracy objective
  double avg_reward = 0.0;
};

EvalResult evaluate_policy(const TabularPolicy& policy, const DiscreteEnv& env,
                           int T, uint64_t seed);

struct VIResult {
  std::vector<double> values;
  std::vector<int> greedy;  // lowest action index on ties
  int iterations = 0;
};

/// Exact Bellman iteration on the expected-transition model. Test oracle for
/// sarsa_train; requires discount < 1.
VIResult value_iteration_oracle(const DiscreteEnv& env, double discount, double tol);

/// Exact discounted value of a fixed deterministic policy.
std::vector<double> policy_evaluation(const DiscreteEnv& env,
                                      const std::vector<int>& actions,
                                      double discount, double tol);

}  // namespace ladder
