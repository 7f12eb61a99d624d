#include "ladder/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace ladder {

PolicyType policy_type_from_string(const std::string& s) {
  if (s == "ng") return PolicyType::NG;
  if (s == "ni") return PolicyType::NI;
  if (s == "mix") return PolicyType::Mix;
  if (s == "zero") return PolicyType::Zero;
  throw std::invalid_argument("unknown policy: " + s);
}

std::string to_string(PolicyType t) {
  switch (t) {
    case PolicyType::NG: return "ng";
    case PolicyType::NI: return "ni";
    case PolicyType::Mix: return "mix";
    case PolicyType::Zero: return "zero";
  }
  return "?";
}

PolicyWindows compute_policy_windows(const ModelParams& params) {
  PolicyWindows w;
  w.improve_dir = select_direction(params, Restriction::improvement_only);
  w.improve = compute_class_windows(params, w.improve_dir.unit_cost);
  w.game_dir = select_direction(params, Restriction::gaming_only);
  w.game = compute_class_windows(params, w.game_dir.unit_cost);
  return w;
}

ChosenAction choose_action(const AgentState& state, const PolicyKind& policy,
                           const PolicyWindows& windows, const Ladder& ladder,
                           const ModelParams& params, std::mt19937_64& rng) {
  const double u = uniform01(rng);  // mixture draw, consumed by every policy

  bool improve_branch = true;
  switch (policy.kind) {
    case PolicyType::NG: improve_branch = true; break;
    case PolicyType::NI: improve_branch = false; break;
    case PolicyType::Mix: improve_branch = u < policy.rho; break;
    case PolicyType::Zero:
      return ChosenAction{0.0, ActionKind::improvement, 0.0};
  }

  const LevelSpec lv = ladder.level(state.level);
  const ClassWindows& cw = improve_branch ? windows.improve : windows.game;
  const double cost = improve_branch ? windows.improve_dir.unit_cost
                                     : windows.game_dir.unit_cost;
  const EffortWindow w = window_at_level(cw.of(lv.cls), lv);
  ChosenAction a;
  a.kind = improve_branch ? ActionKind::improvement : ActionKind::gaming;
  a.unit_cost = cost;
  a.scalar = best_response_action(params, lv, cost, w, state.attribute).action;
  return a;
}

std::pair<AgentState, StepRecord> step(const AgentState& state,
                                       const ChosenAction& action,
                                       const ModelParams& params,
                                       const Ladder& ladder, int t,
                                       std::mt19937_64& rng) {
  assert(state.level >= 1 && state.level <= ladder.size());
  assert(state.attribute >= 0.0);
  const LevelSpec lv = ladder.level(state.level);
  const double y_hat = state.attribute + action.scalar;
  const TransitionProbs probs = decision_probabilities(params, lv, y_hat);
  const Outcome outcome = sample_decision(probs, rng);

  int next_level = state.level;
  if (outcome == Outcome::promote) next_level += 1;
  if (outcome == Outcome::demote) next_level -= 1;
  next_level = std::clamp(next_level, 1, ladder.size());

  const double post_attr = action.kind == ActionKind::improvement
                               ? state.attribute + action.scalar
                               : state.attribute;

  StepRecord rec;
  rec.time = t;
  rec.state_before = state;
  rec.action_scalar = action.scalar;
  rec.action_kind = action.kind;
  rec.y_hat = y_hat;
  rec.outcome = outcome;
  rec.reward_next = params.reward_per_level * next_level;
  rec.utility = params.reward_per_level *
                    (state.level + probs.p_up - probs.p_down) -
                action.unit_cost * action.scalar;
  rec.realized_utility = rec.reward_next - action.unit_cost * action.scalar;

  AgentState next;
  next.level = next_level;
  next.attribute = params.gamma * post_attr;
  next.qualification = state.qualification;
  assert(next.attribute >= 0.0);
  return {next, rec};
}

std::vector<StepRecord> run_trial(const ModelParams& params, const Ladder& ladder,
                                  const PolicyKind& policy,
                                  const PolicyWindows& windows, int T,
                                  uint64_t seed, double x0) {
  if (x0 < 0.0) throw std::invalid_argument("run_trial: x0 < 0");
  if (policy.kind == PolicyType::Mix && !(policy.rho >= 0.0 && policy.rho <= 1.0)) {
    throw std::invalid_argument("run_trial: mix rho outside [0,1]");
  }
  std::mt19937_64 rng(seed);
  AgentState state{1, x0, 0.0};
  std::vector<StepRecord> records;
  records.reserve(static_cast<size_t>(std::max(T, 0)));
  for (int t = 0; t < T; ++t) {
    const ChosenAction a = choose_action(state, policy, windows, ladder, params, rng);
    auto [next, rec] = step(state, a, params, ladder, t, rng);
    records.push_back(rec);
    state = next;
  }
  return records;
}

std::vector<StepRecord> run_trial(const ModelParams& params, const Ladder& ladder,
                                  const PolicyKind& policy, int T, uint64_t seed,
                                  double x0) {
  return run_trial(params, ladder, policy, compute_policy_windows(params), T, seed, x0);
}

TrajectoryMetrics summarize(const std::vector<StepRecord>& trajectory,
                            int window_length, const ModelParams& params,
                            const Ladder& ladder) {
  const int T = static_cast<int>(trajectory.size());
  if (window_length > T) {
    throw std::invalid_argument("summarize: window longer than trajectory");
  }
  const int begin = T - window_length;
  TrajectoryMetrics m;
  m.window_begin = begin;
  m.window_end = T;
  m.level_histogram.assign(static_cast<size_t>(ladder.size()), 0.0);
  if (window_length <= 0) return m;

  for (int t = begin; t < T; ++t) {
    const StepRecord& r = trajectory[static_cast<size_t>(t)];
    const LevelSpec lv = ladder.level(r.state_before.level);
    m.level_histogram[static_cast<size_t>(r.state_before.level - 1)] += 1.0;
    m.mean_level += r.state_before.level;
    m.avg_attribute += r.state_before.attribute;
    m.avg_utility += r.utility;
    m.avg_realized_utility += r.realized_utility;

    const double post_attr = r.action_kind == ActionKind::improvement
                                 ? r.state_before.attribute + r.action_scalar
                                 : r.state_before.attribute;
    const RawDecision d = raw_decision(params, r.y_hat - lv.mu);
    const double correct = post_attr >= lv.mu ? d.sigma : d.sigma_c;
    m.avg_accuracy += (1.0 - d.h) * correct;
  }
  const double n = window_length;
  for (auto& v : m.level_histogram) v /= n;
  m.mean_level /= n;
  m.avg_attribute /= n;
  m.avg_utility /= n;
  m.avg_realized_utility /= n;
  m.avg_accuracy /= n;
  return m;
}

int thread_budget() {
  if (const char* env = std::getenv("LADDER_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 2;
}

namespace {

MetricStats stats_of(const std::vector<double>& xs) {
  MetricStats s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  double sq = 0.0;
  for (double x : xs) sq += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(xs.size()));
  return s;
}

}  // namespace

ExperimentSummary run_experiment(const ModelParams& params, const Ladder& ladder,
                                 const PolicyKind& policy, int trials, int T,
                                 uint64_t base_seed, int window_length, double x0) {
  if (trials < 1) throw std::invalid_argument("run_experiment: trials < 1");
  ExperimentSummary out;
  out.trials.resize(static_cast<size_t>(trials));

  const PolicyWindows windows = compute_policy_windows(params);
  const int workers = std::min(thread_budget(), trials);
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  auto work = [&]() {
    for (;;) {
      const int k = next.fetch_add(1);
      if (k >= trials) return;
      const auto traj = run_trial(params, ladder, policy, windows, T,
                                  base_seed + static_cast<uint64_t>(k), x0);
      out.trials[static_cast<size_t>(k)] =
          summarize(traj, window_length, params, ladder);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    pool.reserve(static_cast<size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  auto collect = [&](auto getter) {
    std::vector<double> xs;
    xs.reserve(out.trials.size());
    for (const auto& m : out.trials) xs.push_back(getter(m));
    return stats_of(xs);
  };
  out.mean_level = collect([](const TrajectoryMetrics& m) { return m.mean_level; });
  out.avg_attribute =
      collect([](const TrajectoryMetrics& m) { return m.avg_attribute; });
  out.avg_utility = collect([](const TrajectoryMetrics& m) { return m.avg_utility; });
  out.avg_accuracy =
      collect([](const TrajectoryMetrics& m) { return m.avg_accuracy; });
  out.level_histogram.resize(static_cast<size_t>(ladder.size()));
  for (int i = 0; i < ladder.size(); ++i) {
    out.level_histogram[static_cast<size_t>(i)] = collect(
        [i](const TrajectoryMetrics& m) { return m.level_histogram[static_cast<size_t>(i)]; });
  }
  return out;
}

}  // namespace ladder
