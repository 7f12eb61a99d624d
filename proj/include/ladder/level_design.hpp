#pragma once

#include "ladder/best_response.hpp"
#include "ladder/model.hpp"

#include <optional>
#include <vector>

namespace ladder {

/// Effort windows for the three boundary classes, computed at mu = 0.
/// G does not depend on the threshold, so per-rung windows are these shifted
/// by the rung's mu.
struct ClassWindows {
  EffortWindow first;
  EffortWindow middle;
  EffortWindow terminal;

  const EffortWindow& of(BoundaryClass cls) const;
  bool all_valid() const;
};

ClassWindows compute_class_windows(const ModelParams& params, double unit_cost);

/// A ladder plus the no-gaming windows used to judge it.
struct LadderDesign {
  std::vector<double> thresholds;
  double delta_mu = 0.0;
  double terminal_cap = 0.0;  // M
  double gamma = 0.0;
  std::vector<EffortWindow> ng_windows;  // per rung, class-correct

  int size() const { return static_cast<int>(thresholds.size()); }
  Ladder ladder() const { return Ladder(thresholds); }
};

LadderDesign make_design(std::vector<double> thresholds, double delta_mu,
                         double cap, double gamma, const ClassWindows& ng);

struct Violation {
  char cond;  // 'a', 'b', 'c'
  int level;
  double slack;  // negative when violated
};

struct ConditionReport {
  bool cond_a = false;
  bool cond_b = false;
  bool cond_c = false;
  std::vector<Violation> slacks;      // one entry per inequality
  std::vector<Violation> violations;  // the negative-slack subset

  bool all() const { return cond_a && cond_b && cond_c; }
};

/// Definition-1 incremental-thresholding check:
///   (a) mu_under_1 <= 0
///   (b) mu_bar strictly increasing
///   (c) gamma * mu_bar_i >= max(mu_under_{i+1}, mu_under_i), and the
///       terminal self-condition gamma * mu_bar_I >= mu_under_I.
/// Slack values are recorded for every inequality.
ConditionReport check_incremental_thresholding(const LadderDesign& design,
                                               double gamma);

/// Longest constant-increment ladder satisfying Definition 1 with terminal
/// threshold at most M: forward pass grows middle rungs while the
/// depreciation condition holds, one tentative rung is added, and the
/// backward pass returns the longest prefix whose last rung satisfies the
/// terminal-window gate. Null when no I >= 2 sequence exists.
std::optional<LadderDesign> design_levels(double delta_mu, double cap,
                                          const ClassWindows& ng, double gamma);

/// No decision rule incentivizes attributes beyond this (depreciation
/// ceiling max_i (gamma*w_bar_i - w_under_i) / (1 - gamma)).
double incentivability_ceiling(const ClassWindows& ng, double gamma);

}  // namespace ladder
