#pragma once

#include "ladder/level_design.hpp"

#include <cstdint>
#include <vector>

namespace ladder {

struct AgentState {
  int level = 1;
  double attribute = 0.0;      // pre-response x_t
  double qualification = 0.0;  // y_t, carried but dynamics-free
};

enum class PolicyType { NG, NI, Mix, Zero };

struct PolicyKind {
  PolicyType kind = PolicyType::NG;
  double rho = 0.0;  // Mix only: probability of the improvement branch
};

PolicyType policy_type_from_string(const std::string& s);
std::string to_string(PolicyType t);

/// Per-class effort windows for both action routes, fixed per parameter set.
/// NG responds along the cheapest improvement direction, NI along the
/// cheapest gaming direction.
struct PolicyWindows {
  DirectionChoice improve_dir;
  ClassWindows improve;
  DirectionChoice game_dir;
  ClassWindows game;
};

PolicyWindows compute_policy_windows(const ModelParams& params);

struct ChosenAction {
  double scalar = 0.0;
  ActionKind kind = ActionKind::improvement;
  double unit_cost = 0.0;
};

/// Draw order is fixed: one mixture uniform per step (every policy), then the
/// decision uniform inside step(). Mix(1) and Mix(0) therefore reproduce the
/// NG and NI streams draw for draw. When Assumption 3 fails for a level the
/// response falls back to the direct argmax form.
ChosenAction choose_action(const AgentState& state, const PolicyKind& policy,
                           const PolicyWindows& windows, const Ladder& ladder,
                           const ModelParams& params, std::mt19937_64& rng);

struct StepRecord {
  int time = 0;
  AgentState state_before;
  double action_scalar = 0.0;
  ActionKind action_kind = ActionKind::improvement;
  double y_hat = 0.0;
  Outcome outcome = Outcome::stay;
  double reward_next = 0.0;        // realized r * i_{t+1}
  double utility = 0.0;            // Eq.-2 expected form
  double realized_utility = 0.0;   // r * i_{t+1} - c * a
};

std::pair<AgentState, StepRecord> step(const AgentState& state,
                                       const ChosenAction& action,
                                       const ModelParams& params,
                                       const Ladder& ladder, int t,
                                       std::mt19937_64& rng);

std::vector<StepRecord> run_trial(const ModelParams& params, const Ladder& ladder,
                                  const PolicyKind& policy, int T, uint64_t seed,
                                  double x0 = 0.0);

/// Same, with the policy windows precomputed (shared across trials).
std::vector<StepRecord> run_trial(const ModelParams& params, const Ladder& ladder,
                                  const PolicyKind& policy,
                                  const PolicyWindows& windows, int T,
                                  uint64_t seed, double x0 = 0.0);

struct TrajectoryMetrics {
  std::vector<double> level_histogram;  // visit frequencies over the window
  double mean_level = 0.0;
  double avg_attribute = 0.0;
  double avg_utility = 0.0;           // Eq.-2 expected form
  double avg_realized_utility = 0.0;
  double avg_accuracy = 0.0;          // decision-maker utility
  int window_begin = 0;
  int window_end = 0;
};

/// Time averages over the final window_length steps. The accuracy term is the
/// abstention-weighted probability of classifying the post-response attribute
/// on the correct side of the current threshold.
TrajectoryMetrics summarize(const std::vector<StepRecord>& trajectory,
                            int window_length, const ModelParams& params,
                            const Ladder& ladder);

struct MetricStats {
  double mean = 0.0;
  double stddev = 0.0;  // population form; zero for a single trial
};

struct ExperimentSummary {
  std::vector<TrajectoryMetrics> trials;
  MetricStats mean_level, avg_attribute, avg_utility, avg_accuracy;
  std::vector<MetricStats> level_histogram;
};

/// Independent trials seeded base_seed + trial index, summarized over the
/// final window and aggregated across trials. Trials run concurrently when
/// the LADDER_THREADS environment variable allows.
ExperimentSummary run_experiment(const ModelParams& params, const Ladder& ladder,
                                 const PolicyKind& policy, int trials, int T,
                                 uint64_t base_seed, int window_length = 2000,
                                 double x0 = 0.0);

/// Thread budget for trial/sweep parallelism (LADDER_THREADS, default 2).
int thread_budget();

}  // namespace ladder
