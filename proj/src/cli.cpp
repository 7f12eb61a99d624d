#include "ladder/cli.hpp"

#include "ladder/config.hpp"
#include "ladder/csv.hpp"
#include "ladder/stationary.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <random>
#include <thread>

namespace ladder {

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNonConvergence = 4;

struct InfeasibleDesign : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string sanitize_key(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-') c = '_';
  }
  return s;
}

std::string sanitize_value(std::string s) {
  for (char& c : s) {
    if (c == '.') c = 'p';
    else if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-') c = '_';
  }
  return s;
}

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return (fs::path(cfg.out_dir) / name).string();
}

/// Resolves the ladder: explicit thresholds verbatim, or Algorithm 1 on the
/// NG windows for the (delta_mu, cap) form.
Ladder resolve_ladder(const ExperimentConfig& cfg, const ModelParams& params) {
  if (cfg.ladder_mode == LadderMode::explicit_list) return Ladder(cfg.thresholds);
  const DirectionChoice ng = select_direction(params, Restriction::improvement_only);
  const ClassWindows w = compute_class_windows(params, ng.unit_cost);
  if (!w.all_valid()) {
    throw InfeasibleDesign("no valid sequence: NG effort windows are degenerate");
  }
  const auto design = design_levels(cfg.delta_mu, cfg.cap, w, cfg.gamma);
  if (!design) {
    throw InfeasibleDesign("no valid sequence for delta_mu=" +
                           format_double(cfg.delta_mu) + ", M=" + format_double(cfg.cap));
  }
  return design->ladder();
}

// ---------------------------------------------------------------- design --

int cmd_design(const ExperimentConfig& cfg) {
  const ModelParams params = cfg.model_params();
  const DirectionChoice ng = select_direction(params, Restriction::improvement_only);
  const ClassWindows w = compute_class_windows(params, ng.unit_cost);
  if (!w.all_valid()) {
    std::cerr << "no valid sequence: NG effort windows are degenerate\n";
    return kExitInfeasible;
  }

  LadderDesign design;
  if (cfg.ladder_mode == LadderMode::design) {
    auto d = design_levels(cfg.delta_mu, cfg.cap, w, cfg.gamma);
    if (!d) {
      std::cerr << "no valid sequence for delta_mu=" << format_double(cfg.delta_mu)
                << ", M=" << format_double(cfg.cap) << "\n";
      return kExitInfeasible;
    }
    design = *d;
  } else {
    // explicit ladder: report Definition-1 compliance for it
    design = make_design(cfg.thresholds, 0.0, cfg.thresholds.back(), cfg.gamma, w);
  }

  {
    CsvWriter csv(out_path(cfg, "thresholds.csv"), cfg.hash(), {"level", "mu"});
    for (int i = 0; i < design.size(); ++i) {
      csv.row({std::to_string(i + 1), format_double(design.thresholds[static_cast<size_t>(i)])});
    }
  }
  const ConditionReport rep = check_incremental_thresholding(design, cfg.gamma);
  {
    CsvWriter csv(out_path(cfg, "design_report.csv"), cfg.hash(),
                  {"check", "value", "pass"});
    csv.row({"cond_a", "", rep.cond_a ? "1" : "0"});
    csv.row({"cond_b", "", rep.cond_b ? "1" : "0"});
    csv.row({"cond_c", "", rep.cond_c ? "1" : "0"});
    for (const auto& s : rep.slacks) {
      csv.row({std::string(1, s.cond) + ":level" + std::to_string(s.level),
               format_double(s.slack), s.slack >= 0.0 ? "1" : "0"});
    }
  }
  std::cout << "design: " << design.size() << " levels, mu_I="
            << format_double(design.thresholds.back())
            << (rep.all() ? " (incremental thresholding holds)"
                          : " (incremental thresholding VIOLATED)")
            << "\n";
  return kExitOk;
}

// -------------------------------------------------------------- simulate --

void write_metrics_csv(const ExperimentConfig& cfg, const std::string& name,
                       const ExperimentSummary& sum) {
  CsvWriter csv(out_path(cfg, name), cfg.hash(),
                {"trial", "mean_level", "avg_attribute", "avg_utility", "avg_accuracy"});
  for (size_t k = 0; k < sum.trials.size(); ++k) {
    const auto& m = sum.trials[k];
    csv.row({std::to_string(k), format_double(m.mean_level),
             format_double(m.avg_attribute), format_double(m.avg_utility),
             format_double(m.avg_accuracy)});
  }
  csv.row({"mean", format_double(sum.mean_level.mean),
           format_double(sum.avg_attribute.mean), format_double(sum.avg_utility.mean),
           format_double(sum.avg_accuracy.mean)});
  csv.row({"std", format_double(sum.mean_level.stddev),
           format_double(sum.avg_attribute.stddev),
           format_double(sum.avg_utility.stddev),
           format_double(sum.avg_accuracy.stddev)});
}

void write_histogram_csv(const ExperimentConfig& cfg, const std::string& name,
                         const ExperimentSummary& sum) {
  CsvWriter csv(out_path(cfg, name), cfg.hash(), {"trial", "level", "frequency"});
  for (size_t k = 0; k < sum.trials.size(); ++k) {
    const auto& h = sum.trials[k].level_histogram;
    for (size_t i = 0; i < h.size(); ++i) {
      csv.row({std::to_string(k), std::to_string(i + 1), format_double(h[i])});
    }
  }
  for (size_t i = 0; i < sum.level_histogram.size(); ++i) {
    csv.row({"mean", std::to_string(i + 1),
             format_double(sum.level_histogram[i].mean)});
  }
}

void write_trajectory_csv(const ExperimentConfig& cfg, const std::string& name,
                          const std::vector<StepRecord>& traj) {
  CsvWriter csv(out_path(cfg, name), cfg.hash(),
                {"t", "level", "x", "action", "kind", "outcome", "utility"});
  for (const auto& r : traj) {
    csv.row({std::to_string(r.time), std::to_string(r.state_before.level),
             format_double(r.state_before.attribute), format_double(r.action_scalar),
             to_string(r.action_kind), to_string(r.outcome),
             format_double(r.utility)});
  }
}

int cmd_simulate(const ExperimentConfig& base, const std::string& sweep_key,
                 const std::vector<std::string>& sweep_values) {
  struct Point {
    std::string label;
    ExperimentConfig cfg;
  };
  std::vector<Point> points;
  if (sweep_key.empty()) {
    points.push_back({"", base});
  } else {
    for (const auto& v : sweep_values) {
      ExperimentConfig cfg = base;
      apply_override(cfg, sweep_key, v);
      points.push_back({sanitize_key(sweep_key) + "_" + sanitize_value(v), cfg});
    }
  }

  std::optional<CsvWriter> sweep_csv;
  if (!sweep_key.empty()) {
    sweep_csv.emplace(out_path(base, "sweep_summary.csv"), base.hash(),
                      std::vector<std::string>{"key", "value", "metric", "mean", "std"});
  }
  std::optional<CsvWriter> dist_csv;
  if (sweep_key == "run.rho" || sweep_key == "ladder.levels") {
    dist_csv.emplace(out_path(base, "level_distribution.csv"), base.hash(),
                     std::vector<std::string>{"value", "level", "mean_frequency",
                                              "std_frequency"});
  }

  for (size_t pi = 0; pi < points.size(); ++pi) {
    const auto& pt = points[pi];
    const ModelParams params = pt.cfg.model_params();
    const Ladder ladder = resolve_ladder(pt.cfg, params);
    const ExperimentSummary sum =
        run_experiment(params, ladder, pt.cfg.policy, pt.cfg.trials, pt.cfg.horizon,
                       pt.cfg.seed, pt.cfg.window, pt.cfg.x0);
    const std::string suffix = pt.label.empty() ? "" : "_" + pt.label;
    write_metrics_csv(pt.cfg, "metrics" + suffix + ".csv", sum);
    write_histogram_csv(pt.cfg, "level_histogram" + suffix + ".csv", sum);
    if (pt.cfg.write_trajectories) {
      const auto traj = run_trial(params, ladder, pt.cfg.policy, pt.cfg.horizon,
                                  pt.cfg.seed, pt.cfg.x0);
      write_trajectory_csv(pt.cfg, "trajectory_trial0" + suffix + ".csv", traj);
    }
    if (sweep_csv) {
      const std::string& v = sweep_values[pi];
      auto put = [&](const char* metric, const MetricStats& s) {
        sweep_csv->row({sweep_key, v, metric, format_double(s.mean),
                        format_double(s.stddev)});
      };
      put("mean_level", sum.mean_level);
      put("avg_attribute", sum.avg_attribute);
      put("avg_utility", sum.avg_utility);
      put("avg_accuracy", sum.avg_accuracy);
    }
    if (dist_csv) {
      for (size_t i = 0; i < sum.level_histogram.size(); ++i) {
        dist_csv->row({sweep_values[pi], std::to_string(i + 1),
                       format_double(sum.level_histogram[i].mean),
                       format_double(sum.level_histogram[i].stddev)});
      }
    }
    std::cout << "simulate" << (pt.label.empty() ? "" : " [" + pt.label + "]")
              << ": mean_level=" << format_double(sum.mean_level.mean)
              << " avg_utility=" << format_double(sum.avg_utility.mean) << "\n";
  }
  return kExitOk;
}

// ------------------------------------------------------------ stationary --

int cmd_stationary(const ExperimentConfig& cfg) {
  const ModelParams params = cfg.model_params();
  const Ladder ladder = resolve_ladder(cfg, params);
  const int I = ladder.size();

  const DirectionChoice ni_dir = select_direction(params, Restriction::gaming_only);
  const DirectionChoice ng_dir = select_direction(params, Restriction::improvement_only);
  const ClassWindows ni_w = compute_class_windows(params, ni_dir.unit_cost);
  const ClassWindows ng_w = compute_class_windows(params, ng_dir.unit_cost);
  if (!ni_w.all_valid() || !ng_w.all_valid()) {
    std::cerr << "stationary: degenerate effort windows for these parameters\n";
    return kExitInfeasible;
  }

  const ChainModel ni_chain = build_ni_chain(params, ladder, ni_w);
  const BalanceResiduals ni_bal = verify_detailed_balance(ni_chain);
  {
    CsvWriter csv(out_path(cfg, "chain_ni.csv"), cfg.hash(), {"level", "attribute", "pi"});
    for (int s = 0; s < ni_chain.size(); ++s) {
      csv.row({std::to_string(ni_chain.states[static_cast<size_t>(s)].first),
               format_double(ni_chain.states[static_cast<size_t>(s)].second),
               format_double(ni_chain.stationary[s])});
    }
  }

  const bool ng_compliant = check_incremental_thresholding(
                                make_design(ladder.mu, 0.0, ladder.mu.back(),
                                            cfg.gamma, ng_w),
                                cfg.gamma)
                                .all();
  std::optional<ChainModel> ng_chain, ng_deeper;
  if (ng_compliant) {
    ng_chain = build_ng_chain(params, ladder, ng_w, cfg.ng_depth);
    ng_deeper = build_ng_chain(params, ladder, ng_w, 2 * cfg.ng_depth);
    CsvWriter csv(out_path(cfg, "chain_ng.csv"), cfg.hash(), {"level", "attribute", "pi"});
    for (int s = 0; s < ng_chain->size(); ++s) {
      csv.row({std::to_string(ng_chain->states[static_cast<size_t>(s)].first),
               format_double(ng_chain->states[static_cast<size_t>(s)].second),
               format_double(ng_chain->stationary[s])});
    }
  }

  const TheoremReport rep =
      theorem_bounds(ni_w, ng_w, ni_dir.unit_cost, ng_dir.unit_cost, ladder, params,
                     &ni_chain, ng_chain ? &*ng_chain : nullptr);

  CsvWriter csv(out_path(cfg, "theorem_report.csv"), cfg.hash(), {"check", "value", "pass"});
  auto put = [&](const std::string& name, double value, int pass) {
    csv.row({name, format_double(value), pass < 0 ? "" : (pass ? "1" : "0")});
  };
  put("l_index", rep.l_index, rep.l_index >= 1);
  put("sigma_ni", rep.sigma_ni, rep.sigma_ni > 0.5 && rep.sigma_ni < 1.0);
  put("sigma_ng", rep.sigma_ng, rep.sigma_ng > 0.5 && rep.sigma_ng < 1.0);
  put("sigma_ni_gt_sigma_ng", rep.sigma_ni - rep.sigma_ng,
      rep.sigma_ni > rep.sigma_ng);
  const double ni_res = *std::max_element(ni_bal.residuals.begin(), ni_bal.residuals.end());
  put("ni_balance_max_residual", ni_res, ni_res < 1e-10);
  {
    const Eigen::VectorXd q = ni_chain.level_marginal(I);
    int argmax = 0;
    q.maxCoeff(&argmax);
    put("ni_marginal_argmax", argmax + 1,
        rep.l_index >= 1 ? (argmax + 1 == rep.l_index) : -1);
  }
  put("delta_w_ng", rep.delta_w_ng, -1);
  put("thm3_delta_mu_bound", rep.utility_bound_delta_mu, -1);
  put("ng_chain_built", ng_chain ? 1 : 0, ng_compliant ? 1 : 0);

  const double u_ni = ni_long_term_utility(ni_chain, ni_w, params, ladder, ni_dir.unit_cost);
  put("u_ni_closed", u_ni, -1);

  if (ng_chain) {
    const BalanceResiduals ng_bal = verify_detailed_balance(*ng_chain);
    const double ng_res =
        *std::max_element(ng_bal.residuals.begin(), ng_bal.residuals.end());
    put("ng_balance_max_residual", ng_res, ng_res < 1e-8);
    put("ng_state_count", ng_chain->size(), -1);
    // depth-doubling total-variation diagnostic on the level marginals
    const Eigen::VectorXd q1 = ng_chain->level_marginal(I);
    const Eigen::VectorXd q2 = ng_deeper->level_marginal(I);
    const double tv = 0.5 * (q1 - q2).lpNorm<1>();
    put("ng_depth_tv", tv, tv < 1e-6);
    double slack_min = 0.0;
    for (double s : rep.ng_concentration_slack) slack_min = std::min(slack_min, s);
    put("ng_concentration_min_slack", slack_min, slack_min >= -1e-12);
    put("x_hat_ng", rep.x_hat_ng, -1);
    put("ng_attribute_floor", rep.ng_attribute_floor,
        rep.x_hat_ng >= rep.ng_attribute_floor - 1e-12);
    const double u_ng = ng_long_term_utility(*ng_chain, params, ng_dir.unit_cost);
    put("u_ng_closed", u_ng, -1);
    const double delta_mu = ladder.mu.size() >= 2 ? ladder.mu[1] - ladder.mu[0] : 0.0;
    const bool bound_applies = delta_mu <= rep.utility_bound_delta_mu;
    put("thm3_bound_satisfied", bound_applies ? 1 : 0, -1);
    put("thm3_utility_order", u_ng - u_ni, bound_applies ? (u_ng >= u_ni) : -1);
  }
  std::cout << "stationary: l=" << rep.l_index << " sigma_ni="
            << format_double(rep.sigma_ni) << " sigma_ng=" << format_double(rep.sigma_ng)
            << (ng_chain ? "" : " (ladder not NG-compliant; NG chain skipped)") << "\n";
  return kExitOk;
}

// -------------------------------------------------------------------- rl --

int cmd_rl(const ExperimentConfig& cfg) {
  const ModelParams params = cfg.model_params();
  const Ladder ladder = resolve_ladder(cfg, params);
  const DiscreteEnv env = build_discrete_env(params, ladder, cfg.rl);

  std::vector<TrainResult> runs(static_cast<size_t>(cfg.rl.seeds));
  {
    std::atomic<int> next{0};
    auto work = [&]() {
      for (;;) {
        const int k = next.fetch_add(1);
        if (k >= cfg.rl.seeds) return;
        runs[static_cast<size_t>(k)] =
            sarsa_train(env, cfg.rl, cfg.seed + static_cast<uint64_t>(k));
      }
    };
    const int workers = std::min(thread_budget(), cfg.rl.seeds);
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  auto last100 = [](const std::vector<double>& r) {
    const size_t n = std::min<size_t>(100, r.size());
    double s = 0.0;
    for (size_t i = r.size() - n; i < r.size(); ++i) s += r[i];
    return s / static_cast<double>(n);
  };
  int best = 0;
  for (int k = 1; k < cfg.rl.seeds; ++k) {
    if (last100(runs[static_cast<size_t>(k)].episode_returns) >
        last100(runs[static_cast<size_t>(best)].episode_returns)) {
      best = k;
    }
  }

  {
    CsvWriter csv(out_path(cfg, "training.csv"), cfg.hash(),
                  {"seed_index", "episode", "return", "return_smooth100"});
    for (int k = 0; k < cfg.rl.seeds; ++k) {
      const auto& r = runs[static_cast<size_t>(k)].episode_returns;
      double acc = 0.0;
      for (size_t e = 0; e < r.size(); ++e) {
        acc += r[e];
        if (e >= 100) acc -= r[e - 100];
        const double smooth = acc / static_cast<double>(std::min<size_t>(e + 1, 100));
        csv.row({std::to_string(k), std::to_string(e), format_double(r[e]),
                 format_double(smooth)});
      }
    }
  }
  {
    CsvWriter csv(out_path(cfg, "selection.csv"), cfg.hash(),
                  {"seed_index", "last100_avg_reward", "selected"});
    for (int k = 0; k < cfg.rl.seeds; ++k) {
      csv.row({std::to_string(k),
               format_double(last100(runs[static_cast<size_t>(k)].episode_returns)),
               k == best ? "1" : "0"});
    }
  }
  const EvalResult ev =
      evaluate_policy(runs[static_cast<size_t>(best)].policy, env, cfg.rl.horizon,
                      cfg.seed + 1000003);
  {
    CsvWriter csv(out_path(cfg, "efforts.csv"), cfg.hash(), {"metric", "value"});
    csv.row({"avg_improve_effort", format_double(ev.avg_improve_effort)});
    csv.row({"avg_game_effort", format_double(ev.avg_game_effort)});
    csv.row({"improve_minus_game", format_double(ev.avg_improve_effort - ev.avg_game_effort)});
    csv.row({"decision_maker_utility", format_double(ev.decision_maker_utility)});
    csv.row({"avg_reward", format_double(ev.avg_reward)});
    csv.row({"best_seed_index", std::to_string(best)});
  }
  std::cout << "rl: best_seed=" << best << " improve-game="
            << format_double(ev.avg_improve_effort - ev.avg_game_effort) << "\n";
  return kExitOk;
}

// -------------------------------------------------------------- validate --

int cmd_validate(const ExperimentConfig& cfg) {
  const ModelParams params = cfg.model_params();
  int failures = 0;
  auto check = [&](const std::string& name, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "[ok]   " : "[FAIL] ") << name
              << (detail.empty() || ok ? "" : ": " + detail) << "\n";
    if (!ok) ++failures;
  };

  // abstention-function invariants on a sigma grid, for every kind
  for (AbstentionKind kind :
       {AbstentionKind::entropy, AbstentionKind::polynomial, AbstentionKind::absolute}) {
    AbstentionSpec spec = params.abstention;
    spec.kind = kind;
    bool sym = true, ends = true, mono = true;
    double prev = -1.0;
    const int N = 10000;
    for (int k = 0; k <= N; ++k) {
      // exact-complement pairs: 1 - s is exact for s in [1/2, 1], which is
      // where the absolute kind must reflect bit-for-bit
      const double s = 0.5 + 0.5 * static_cast<double>(k) / N;
      const double h = abstention(spec, s);
      const double hm = abstention(spec, 1.0 - s);
      if (kind == AbstentionKind::absolute ? (h != hm) : (std::abs(h - hm) > 1e-12)) {
        sym = false;
      }
    }
    for (int k = 0; k <= N; ++k) {
      const double s = 0.5 * static_cast<double>(k) / N;
      const double h = abstention(spec, s);
      if (h + 1e-15 < prev) mono = false;
      prev = h;
    }
    if (std::abs(abstention(spec, 0.0)) != 0.0 || std::abs(abstention(spec, 1.0)) != 0.0) {
      ends = false;
    }
    const std::string k = to_string(kind);
    check("abstention symmetry (" + k + ")", sym);
    check("abstention endpoints h(0)=h(1)=0 (" + k + ")", ends);
    check("abstention monotone on [0,1/2] (" + k + ")", mono);
  }

  // decision probabilities: simplex + monotonicity + mirror swap
  {
    std::mt19937_64 rng(7);
    const Ladder lad({0.0, 1.0, 2.0});
    bool sums = true, mono = true, mirror = true;
    for (int k = 0; k < 10000; ++k) {
      const int li = 1 + static_cast<int>(rng() % 3);
      const double y = 8.0 * uniform01(rng) - 2.0;
      const TransitionProbs p = decision_probabilities(params, lad.level(li), y);
      if (std::abs(p.p_up + p.p_stay + p.p_down - 1.0) > 1e-12) sums = false;
    }
    double prev_up = -1.0, prev_down = 2.0;
    for (int k = 0; k <= 400; ++k) {
      const double z = -5.0 + 10.0 * k / 400.0;
      const RawDecision d = raw_decision(params, z);
      if (d.p_up <= prev_up) mono = false;
      if (d.p_down >= prev_down) mono = false;
      prev_up = d.p_up;
      prev_down = d.p_down;
      const RawDecision m = raw_decision(params, -z);
      if (d.p_up != m.p_down || d.p_down != m.p_up) mirror = false;
    }
    check("decision probabilities sum to 1 (1e-12)", sums);
    check("raw p+ increasing / p- decreasing in y_hat", mono);
    check("mirror symmetry swaps p+ and p- exactly", mirror);
  }

  // direction choice invariant under joint positive rescaling
  {
    std::mt19937_64 rng(11);
    bool ok = true;
    for (int k = 0; k < 200; ++k) {
      const double scale = std::exp(4.0 * uniform01(rng) - 2.0);
      ModelParams scaled(params.alpha, params.gamma, params.reward_per_level,
                         params.theta * scale, params.cost_improve * scale,
                         params.cost_game * scale, params.abstention);
      for (Restriction r : {Restriction::unrestricted, Restriction::improvement_only,
                            Restriction::gaming_only}) {
        if (select_direction(params, r).dimension != select_direction(scaled, r).dimension) {
          ok = false;
        }
      }
    }
    check("direction choice invariant under joint rescaling", ok);
  }

  // effort windows: scan stability and boundary identity
  for (Restriction r : {Restriction::improvement_only, Restriction::gaming_only}) {
    const DirectionChoice dir = select_direction(params, r);
    const ClassWindows w = compute_class_windows(params, dir.unit_cost);
    const std::string tag = r == Restriction::improvement_only ? "NG" : "NI";
    check("effort windows exist (" + tag + ")", w.all_valid());
    if (w.all_valid()) {
      const LevelSpec mid{2, 0.0, BoundaryClass::middle};
      const double g_bar = evaluate_G(params, mid, w.middle.w_bar, dir.unit_cost);
      const double g_under = evaluate_G(params, mid, w.middle.w_under, dir.unit_cost);
      check("G(w_under) = G(w_bar) (" + tag + " middle, 1e-8)",
            std::abs(g_bar - g_under) < 1e-8);
    }
  }

  // dynamics: mixture endpoints reproduce the pure policies draw for draw
  {
    const Ladder lad({0.0, 1.0, 2.0});
    const auto a = run_trial(params, lad, {PolicyType::NG, 0.0}, 500, 42);
    const auto b = run_trial(params, lad, {PolicyType::Mix, 1.0}, 500, 42);
    const auto c = run_trial(params, lad, {PolicyType::NI, 0.0}, 500, 42);
    const auto d = run_trial(params, lad, {PolicyType::Mix, 0.0}, 500, 42);
    bool ng_eq = true, ni_eq = true, bounds = true;
    for (int t = 0; t < 500; ++t) {
      const size_t st = static_cast<size_t>(t);
      if (a[st].y_hat != b[st].y_hat || a[st].outcome != b[st].outcome) ng_eq = false;
      if (c[st].y_hat != d[st].y_hat || c[st].outcome != d[st].outcome) ni_eq = false;
      if (a[st].state_before.level < 1 || a[st].state_before.level > 3 ||
          a[st].state_before.attribute < 0.0) {
        bounds = false;
      }
    }
    check("Mix(1) reproduces NG draw-for-draw", ng_eq);
    check("Mix(0) reproduces NI draw-for-draw", ni_eq);
    check("levels and attributes stay in bounds", bounds);
  }

  std::cout << (failures == 0 ? "validate: all checks passed\n"
                              : "validate: " + std::to_string(failures) + " failures\n");
  return failures == 0 ? kExitOk : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"multi-stage strategic classification toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::string sweep_spec;
  int64_t seed_override = -1;
  int trials_override = -1;
  int horizon_override = -1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config file")->required();
    sub->add_option("--seed", seed_override, "override run.seed");
    sub->add_option("--trials", trials_override, "override run.trials");
    sub->add_option("--horizon", horizon_override, "override run.horizon");
    sub->add_option("--out", out_override, "override run.out output directory");
  };

  CLI::App* design = app.add_subcommand("design", "run the threshold-sequence designer");
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo policy simulation");
  CLI::App* stationary = app.add_subcommand("stationary", "exact chain analysis");
  CLI::App* rl = app.add_subcommand("rl", "tabular SARSA approximation of the optimal policy");
  CLI::App* validate = app.add_subcommand("validate", "run the invariant suite");
  for (CLI::App* sub : {design, simulate, stationary, rl, validate}) add_common(sub);
  simulate->add_option("--sweep", sweep_spec, "KEY=V1,V2,... sweep axis");

  std::vector<std::string> argv_r(args.rbegin(), args.rend());
  try {
    app.parse(argv_r);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      std::cout << app.help();
      return kExitOk;
    }
    std::cerr << e.what() << "\n";
    return kExitConfig;
  }

  try {
    ExperimentConfig cfg = load_config_file(config_path);
    if (seed_override >= 0) cfg.seed = static_cast<uint64_t>(seed_override);
    if (trials_override >= 0) cfg.trials = trials_override;
    if (horizon_override >= 0) cfg.horizon = horizon_override;
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (cfg.window > cfg.horizon) cfg.window = cfg.horizon;

    std::string sweep_key;
    std::vector<std::string> sweep_values;
    if (!sweep_spec.empty()) {
      const auto eq = sweep_spec.find('=');
      if (eq == std::string::npos) throw ConfigError("--sweep: expected KEY=V1,V2,...");
      sweep_key = sweep_spec.substr(0, eq);
      std::string rest = sweep_spec.substr(eq + 1);
      size_t pos = 0;
      while (pos != std::string::npos) {
        const auto comma = rest.find(',', pos);
        sweep_values.push_back(rest.substr(pos, comma == std::string::npos ? comma : comma - pos));
        pos = comma == std::string::npos ? comma : comma + 1;
      }
      if (sweep_values.empty()) throw ConfigError("--sweep: no values");
    }

    if (design->parsed()) return cmd_design(cfg);
    if (simulate->parsed()) return cmd_simulate(cfg, sweep_key, sweep_values);
    if (stationary->parsed()) return cmd_stationary(cfg);
    if (rl->parsed()) return cmd_rl(cfg);
    if (validate->parsed()) return cmd_validate(cfg);
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InfeasibleDesign& e) {
    std::cerr << e.what() << "\n";
    return kExitInfeasible;
  } catch (const NonConvergenceError& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ladder
