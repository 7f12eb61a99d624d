#include "ladder/best_response.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ladder {

std::string to_string(ActionKind k) {
  return k == ActionKind::improvement ? "improvement" : "gaming";
}

DirectionChoice select_direction(const ModelParams& params, Restriction restriction) {
  const int d = params.dims();
  int lo = 1, hi = 2 * d;
  if (restriction == Restriction::improvement_only) hi = d;
  if (restriction == Restriction::gaming_only) lo = d + 1;
  if (lo > hi) throw std::invalid_argument("select_direction: empty action subset");

  int best = -1;
  double best_ratio = -1.0;
  for (int l = lo; l <= hi; ++l) {
    const int j = (l - 1) % d;  // theta is duplicated across both halves
    const double c = (l <= d) ? params.cost_improve[j] : params.cost_game[j];
    const double ratio = params.theta[j] / c;
    if (ratio > best_ratio) {  // strict: ties keep the minimum index
      best_ratio = ratio;
      best = l;
    }
  }
  const int j = (best - 1) % d;
  DirectionChoice choice;
  choice.dimension = best;
  choice.kind = best <= d ? ActionKind::improvement : ActionKind::gaming;
  const double c = best <= d ? params.cost_improve[j] : params.cost_game[j];
  choice.unit_cost = c / params.theta[j];
  return choice;
}

namespace {

// Benefit term of G (everything except the -cz cost), via the stable
// complementary-sigmoid pair.
double benefit(const ModelParams& p, BoundaryClass cls, double z) {
  const RawDecision d = raw_decision(p, z);
  const double r = p.reward_per_level;
  switch (cls) {
    case BoundaryClass::first: return r * (1.0 - d.h) * d.sigma;
    case BoundaryClass::middle: return r * (1.0 - d.h) * (d.sigma - d.sigma_c);
    case BoundaryClass::terminal: return -r * (1.0 - d.h) * d.sigma_c;
  }
  return 0.0;
}

double benefit_deriv(const ModelParams& p, BoundaryClass cls, double z) {
  const double a = p.alpha * z;
  const double s = sigmoid(a);
  const double sc = sigmoid(-a);
  if (s == 0.0 || sc == 0.0) return 0.0;  // fully saturated tail
  const double h = abstention_pair(p.abstention, s, sc);
  const double hp = abstention_deriv_pair(p.abstention, s, sc);
  const double slope = p.alpha * s * sc;  // d sigma / dz
  const double r = p.reward_per_level;
  switch (cls) {
    case BoundaryClass::first: return r * slope * (1.0 - h - hp * s);
    case BoundaryClass::middle: return r * slope * (2.0 * (1.0 - h) - hp * (s - sc));
    case BoundaryClass::terminal: return r * slope * (1.0 - h + hp * sc);
  }
  return 0.0;
}

// Bracket [-Z, Z] that contains every critical point of G and a left tail
// where G exceeds any local-maximum value (the cost term dominates there).
double window_bracket(const ModelParams& p, double unit_cost) {
  const double r = p.reward_per_level;
  const double a = p.alpha;
  double hslope = 2.0;  // bound on |d benefit/d sigma| / r, kind dependent
  switch (p.abstention.kind) {
    case AbstentionKind::entropy: hslope = 2.0 + 2.0 * p.abstention.beta_tilde; break;
    case AbstentionKind::polynomial:
      hslope = 2.0 + 4.0 * p.abstention.beta_tilde * (1.0 + p.abstention.poly_degree);
      break;
    case AbstentionKind::absolute: hslope = 2.0 + 2.0 * p.abstention.beta_tilde; break;
  }
  const double zc = std::log(std::max(4.0 * r * a * hslope / unit_cost, 8.0)) / a;
  return std::max(10.0, 10.0 / a) + zc + 2.2 * r / unit_cost + 2.0;
}

double bisect_deriv_root(const ModelParams& p, BoundaryClass cls, double c,
                         double lo, double hi) {
  // dG > 0 at lo, < 0 at hi
  for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (benefit_deriv(p, cls, mid) - c > 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double ternary_max(const ModelParams& p, BoundaryClass cls, double c, double lo,
                   double hi) {
  auto g = [&](double z) { return benefit(p, cls, z) - c * z; };
  for (int it = 0; it < 300 && hi - lo > 1e-11; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (g(m1) < g(m2)) lo = m1;
    else hi = m2;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> scan_local_maximizers(const ModelParams& p, BoundaryClass cls,
                                          double c, double Z, double step) {
  const int n = static_cast<int>(std::ceil(2.0 * Z / step)) + 1;
  std::vector<double> lm;

  if (p.abstention.kind != AbstentionKind::absolute) {
    double z_prev = -Z;
    double d_prev = benefit_deriv(p, cls, z_prev) - c;
    for (int k = 1; k < n; ++k) {
      const double z = -Z + step * k;
      const double d = benefit_deriv(p, cls, z) - c;
      if (d_prev > 0.0 && d <= 0.0) {
        lm.push_back(bisect_deriv_root(p, cls, c, z_prev, z));
      }
      z_prev = z;
      d_prev = d;
    }
  } else {
    // Non-analytic h: locate discrete maxima of G itself, then refine.
    auto g = [&](double z) { return benefit(p, cls, z) - c * z; };
    double zm1 = -Z, z0 = -Z + step;
    double gm1 = g(zm1), g0 = g(z0);
    for (int k = 2; k < n; ++k) {
      const double z1 = -Z + step * k;
      const double g1 = g(z1);
      if (g0 >= gm1 && g0 > g1) {
        lm.push_back(ternary_max(p, cls, c, zm1, z1));
      }
      zm1 = z0; gm1 = g0;
      z0 = z1; g0 = g1;
    }
  }

  // dedupe refined roots that collapsed into one point
  std::sort(lm.begin(), lm.end());
  std::vector<double> out;
  for (double z : lm) {
    if (out.empty() || z - out.back() > 1e-8) out.push_back(z);
  }
  return out;
}

}  // namespace

double evaluate_G(const ModelParams& params, const LevelSpec& level, double z,
                  double unit_cost) {
  if (!(unit_cost > 0.0)) throw std::invalid_argument("evaluate_G: unit_cost <= 0");
  return benefit(params, level.cls, z) - unit_cost * z;
}

double evaluate_G_deriv(const ModelParams& params, const LevelSpec& level, double z,
                        double unit_cost) {
  return benefit_deriv(params, level.cls, z) - unit_cost;
}

EffortWindow find_effort_window(const ModelParams& params, const LevelSpec& level,
                                double unit_cost, double scan_step) {
  if (!(unit_cost > 0.0)) {
    throw std::invalid_argument("find_effort_window: unit_cost <= 0");
  }
  EffortWindow w;
  w.level_index = level.index;
  w.cls = level.cls;

  const double step0 =
      scan_step > 0.0 ? scan_step : std::min(5e-4, 0.02 / params.alpha);
  const double Z = window_bracket(params, unit_cost);
  w.local_maximizers = scan_local_maximizers(params, level.cls, unit_cost, Z, step0);
  if (w.local_maximizers.empty()) {
    w.status = WindowStatus::empty_lm;
    return w;
  }

  auto g = [&](double z) { return benefit(params, level.cls, z) - unit_cost * z; };
  w.w_bar = w.local_maximizers.back();
  w.g_at_w_bar = g(w.w_bar);

  // Assumption 3: the largest local maximizer attains the max over LM.
  const double tol = 1e-10 * std::max(1.0, std::abs(w.g_at_w_bar));
  for (double z : w.local_maximizers) {
    if (g(z) > w.g_at_w_bar + tol) {
      w.status = WindowStatus::assumption3_failed;
      break;
    }
  }

  // Leftmost crossing of the level G(w_bar); G -> +inf to the left, so march
  // right from -Z until the value first drops to the target.
  {
    const double step = step0;
    double lo = -Z;
    double v = g(lo);
    if (v <= w.g_at_w_bar) {
      // bracket built to make this unreachable for positive costs
      throw std::logic_error("find_effort_window: bracket too small");
    }
    double z = lo;
    while (z < w.w_bar) {
      const double zn = std::min(z + step, w.w_bar);
      const double vn = g(zn);
      if (vn <= w.g_at_w_bar) {
        // refine G(z) == G(w_bar)
        double a = z, b = zn;
        for (int it = 0; it < 200 && b - a > 1e-10; ++it) {
          const double mid = 0.5 * (a + b);
          if (g(mid) > w.g_at_w_bar) a = mid;
          else b = mid;
        }
        w.w_under = 0.5 * (a + b);
        break;
      }
      z = zn;
    }
    if (z >= w.w_bar) w.w_under = w.w_bar;  // degenerate: G never above target
  }

  w.mu_bar = level.mu + w.w_bar;
  w.mu_under = level.mu + w.w_under;
  return w;
}

EffortWindow window_at_level(const EffortWindow& class_window, const LevelSpec& level) {
  if (class_window.cls != level.cls) {
    throw std::invalid_argument("window_at_level: boundary class mismatch");
  }
  EffortWindow w = class_window;
  w.level_index = level.index;
  w.mu_bar = level.mu + w.w_bar;
  w.mu_under = level.mu + w.w_under;
  return w;
}

double best_response_magnitude(const EffortWindow& window, double x) {
  if (!window.valid()) {
    throw std::invalid_argument("best_response_magnitude: invalid effort window");
  }
  if (x < 0.0) throw std::invalid_argument("best_response_magnitude: x < 0");
  if (x >= window.mu_under && x < window.mu_bar) return window.mu_bar - x;
  return 0.0;
}

BestResponse best_response_action(const ModelParams& params, const LevelSpec& level,
                                  double unit_cost, const EffortWindow& window,
                                  double x) {
  if (x < 0.0) throw std::invalid_argument("best_response_action: x < 0");
  if (window.valid()) {
    return BestResponse{best_response_magnitude(window, x), false};
  }
  if (window.status == WindowStatus::empty_lm) {
    return BestResponse{0.0, true};  // G strictly decreasing: zero effort
  }
  // Assumption 3 fails: direct argmax over the zero action and every
  // reachable local maximizer, largest tie-break.
  const double z0 = x - level.mu;
  double best_z = z0;
  double best_g = evaluate_G(params, level, z0, unit_cost);
  for (double z : window.local_maximizers) {
    if (z < z0) continue;
    const double gz = evaluate_G(params, level, z, unit_cost);
    if (gz >= best_g) {  // >= : prefer the larger maximizer on ties
      best_g = gz;
      best_z = z;
    }
  }
  return BestResponse{best_z - z0, true};
}

double instantaneous_utility(const ModelParams& params, const LevelSpec& level,
                             double x, double a, double unit_cost) {
  if (a < 0.0) throw std::invalid_argument("instantaneous_utility: a < 0");
  const TransitionProbs p = decision_probabilities(params, level, x + a);
  const double expected_level = level.index + p.p_up - p.p_down;
  return params.reward_per_level * expected_level - unit_cost * a;
}

bool check_prop2(const EffortWindow& window) { return window.w_bar > 0.0; }

}  // namespace ladder
