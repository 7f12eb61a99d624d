#include "ladder/level_design.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ladder {

const EffortWindow& ClassWindows::of(BoundaryClass cls) const {
  switch (cls) {
    case BoundaryClass::first: return first;
    case BoundaryClass::middle: return middle;
    case BoundaryClass::terminal: return terminal;
  }
  return middle;
}

bool ClassWindows::all_valid() const {
  return first.valid() && middle.valid() && terminal.valid();
}

ClassWindows compute_class_windows(const ModelParams& params, double unit_cost) {
  ClassWindows w;
  w.first = find_effort_window(params, LevelSpec{1, 0.0, BoundaryClass::first}, unit_cost);
  w.middle = find_effort_window(params, LevelSpec{2, 0.0, BoundaryClass::middle}, unit_cost);
  w.terminal = find_effort_window(params, LevelSpec{3, 0.0, BoundaryClass::terminal}, unit_cost);
  return w;
}

LadderDesign make_design(std::vector<double> thresholds, double delta_mu,
                         double cap, double gamma, const ClassWindows& ng) {
  LadderDesign d;
  d.thresholds = std::move(thresholds);
  d.delta_mu = delta_mu;
  d.terminal_cap = cap;
  d.gamma = gamma;
  const Ladder lad(d.thresholds);
  d.ng_windows.reserve(d.thresholds.size());
  for (int i = 1; i <= lad.size(); ++i) {
    const LevelSpec lv = lad.level(i);
    d.ng_windows.push_back(window_at_level(ng.of(lv.cls), lv));
  }
  return d;
}

ConditionReport check_incremental_thresholding(const LadderDesign& design,
                                               double gamma) {
  const int I = design.size();
  if (static_cast<int>(design.ng_windows.size()) != I) {
    throw std::invalid_argument("check_incremental_thresholding: windows missing");
  }
  for (const auto& w : design.ng_windows) {
    if (!w.valid()) {
      throw std::invalid_argument(
          "check_incremental_thresholding: invalid effort window");
    }
  }
  const auto& w = design.ng_windows;

  ConditionReport rep;
  rep.cond_a = rep.cond_b = rep.cond_c = true;
  auto record = [&rep](char cond, int level, double slack, bool ok, bool& flag) {
    rep.slacks.push_back({cond, level, slack});
    if (!ok) {
      flag = false;
      rep.violations.push_back({cond, level, slack});
    }
  };

  // (a) zero-attribute agents at level 1 are incentivized
  {
    const double slack = -w[0].mu_under;
    record('a', 1, slack, slack >= 0.0, rep.cond_a);
  }
  // (b) post-response attribute strictly increases with the level
  for (int i = 2; i <= I; ++i) {
    const double slack = w[i - 1].mu_bar - w[i - 2].mu_bar;
    record('b', i, slack, slack > 0.0, rep.cond_b);
  }
  // (c) depreciation keeps the agent inside or above the next window
  for (int i = 1; i <= I - 1; ++i) {
    const double need = std::max(w[i].mu_under, w[i - 1].mu_under);
    const double slack = gamma * w[i - 1].mu_bar - need;
    record('c', i, slack, slack >= 0.0, rep.cond_c);
  }
  {
    const double slack = gamma * w[I - 1].mu_bar - w[I - 1].mu_under;
    record('c', I, slack, slack >= 0.0, rep.cond_c);
  }
  return rep;
}

std::optional<LadderDesign> design_levels(double delta_mu, double cap,
                                          const ClassWindows& ng, double gamma) {
  if (!(delta_mu > 0.0) || !(cap > delta_mu)) {
    throw std::invalid_argument("design_levels: need M > delta_mu > 0");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("design_levels: gamma outside (0,1)");
  }
  if (!ng.all_valid()) {
    throw std::invalid_argument("design_levels: invalid NG windows");
  }
  // Definition 1(a) with mu_1 = 0 needs w_under_1 <= 0; otherwise no design
  // can be certified.
  if (ng.first.w_under > 0.0) return std::nullopt;

  const double w1b = ng.first.w_bar, w1u = ng.first.w_under;
  const double w2b = ng.middle.w_bar, w2u = ng.middle.w_under;
  const double wIb = ng.terminal.w_bar, wIu = ng.terminal.w_under;
  (void)w1u;

  const double rel = 1.0 + 1e-12;
  auto mu_of = [&](int k) { return (k - 1) * delta_mu; };  // 1-based rung index

  // forward pass
  int count = 2;  // mu_1 = 0, mu_2 = delta_mu
  if (w1b - w2b < delta_mu && delta_mu <= gamma * w1b - w2u) {
    while (mu_of(count) + delta_mu <= cap * rel + 1e-12 &&
           delta_mu <= (gamma - 1.0) * mu_of(count) + gamma * w2b - w2u) {
      ++count;
    }
  }
  ++count;  // tentative rung for the backward pass to examine

  // backward pass: find the longest prefix whose last rung can be terminal
  for (int j = count; j >= 2; --j) {
    const double mu_j = mu_of(j);
    if (mu_j > cap * rel + 1e-12) continue;  // keep the terminal threshold <= M
    const double w_prev = (j - 1 == 1) ? w1b : w2b;
    const double lower = mu_of(j - 1) + w_prev - wIb;
    const double upper = gamma * (mu_of(j - 1) + w_prev) - wIu;
    if (lower < mu_j && mu_j <= upper) {
      std::vector<double> mu(static_cast<size_t>(j));
      for (int k = 1; k <= j; ++k) mu[static_cast<size_t>(k - 1)] = mu_of(k);
      LadderDesign d = make_design(std::move(mu), delta_mu, cap, gamma, ng);
      // The gate-failure corner can reach here with an inconsistent middle
      // rung; certify before returning so every non-null design is valid.
      if (check_incremental_thresholding(d, gamma).all()) return d;
    }
  }
  return std::nullopt;
}

double incentivability_ceiling(const ClassWindows& ng, double gamma) {
  const double a = gamma * ng.first.w_bar - ng.first.w_under;
  const double b = gamma * ng.middle.w_bar - ng.middle.w_under;
  const double c = gamma * ng.terminal.w_bar - ng.terminal.w_under;
  return std::max({a, b, c}) / (1.0 - gamma);
}

}  // namespace ladder
