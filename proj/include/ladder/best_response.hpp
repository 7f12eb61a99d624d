#pragma once

#include "ladder/model.hpp"

#include <vector>

namespace ladder {

enum class ActionKind { improvement, gaming };
enum class Restriction { unrestricted, improvement_only, gaming_only };

std::string to_string(ActionKind k);

/// The tie-broken optimal effort direction: the minimum-index maximizer of
/// theta_l / c_l over the permitted half (or all) of the 2d action space.
/// Independent of the agent's state, so it is computed once per policy.
struct DirectionChoice {
  int dimension = 1;  // 1-based index into [improvement; gaming]
  ActionKind kind = ActionKind::improvement;
  double unit_cost = 1.0;  // scalar cost per unit of feature movement
};

DirectionChoice select_direction(const ModelParams& params, Restriction restriction);

/// Auxiliary objective G(i, z): expected marginal reward of facing the
/// classifier at offset z from the threshold, minus the linear effort cost.
double evaluate_G(const ModelParams& params, const LevelSpec& level, double z,
                  double unit_cost);

/// Analytic dG/dz. For the absolute abstention kind the value is the
/// one-sided derivative away from z = 0.
double evaluate_G_deriv(const ModelParams& params, const LevelSpec& level,
                        double z, double unit_cost);

enum class WindowStatus { ok, empty_lm, assumption3_failed };

/// Local maximizers of G(i, .) and the induced effort window
/// [mu_under, mu_bar): attributes in the window respond with positive effort
/// reaching mu_bar; everything else responds with zero.
struct EffortWindow {
  int level_index = 0;
  BoundaryClass cls = BoundaryClass::middle;
  WindowStatus status = WindowStatus::ok;
  std::vector<double> local_maximizers;  // ascending
  double w_bar = 0.0;    // largest local maximizer
  double w_under = 0.0;  // inf{z : G(z) <= G(w_bar)}
  double mu_bar = 0.0;   // mu + w_bar
  double mu_under = 0.0; // mu + w_under
  double g_at_w_bar = 0.0;

  bool valid() const { return status == WindowStatus::ok; }
};

/// scan_step <= 0 selects the default grid (min(5e-4, 0.02/alpha)).
EffortWindow find_effort_window(const ModelParams& params, const LevelSpec& level,
                                double unit_cost, double scan_step = 0.0);

/// Shifts a threshold-free window (computed at mu = 0) onto a concrete rung.
EffortWindow window_at_level(const EffortWindow& class_window, const LevelSpec& level);

/// Eq.-4 best-response magnitude. Requires a valid window and x >= 0.
double best_response_magnitude(const EffortWindow& window, double x);

/// Direct argmax over {x - mu} union the local maximizers (largest tie-break).
/// Equals Eq. 4 when Assumption 3 holds; otherwise serves as the fallback and
/// is marked non_window.
struct BestResponse {
  double action = 0.0;
  bool non_window = false;
};

BestResponse best_response_action(const ModelParams& params, const LevelSpec& level,
                                  double unit_cost, const EffortWindow& window,
                                  double x);

/// Eq.-2 instantaneous utility of exerting scalar effort a from attribute x.
double instantaneous_utility(const ModelParams& params, const LevelSpec& level,
                             double x, double a, double unit_cost);

/// Prop. 2: at the window top the promotion probability dominates demotion,
/// equivalently w_bar > 0.
bool check_prop2(const EffortWindow& window);

}  // namespace ladder
