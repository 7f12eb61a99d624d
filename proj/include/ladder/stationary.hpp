#pragma once

#include "ladder/level_design.hpp"

#include <Eigen/Dense>

#include <vector>

namespace ladder {

struct NonConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Finite chain over (level, attribute) states with its stationary vector.
struct ChainModel {
  enum class Kind { ni_levels, ng_truncated };
  Kind kind = Kind::ni_levels;
  std::vector<std::pair<int, double>> states;  // (level, attribute)
  Eigen::MatrixXd transition;                  // row-stochastic
  Eigen::VectorXd stationary;
  int l = 0;  // NI: concentration level max{i : mu_under_i <= 0}; 0 when none
  std::vector<uint8_t> improving;  // NG: state responds with positive effort
  std::vector<double> effort;      // NG: mu_bar_i - x for improving states

  int size() const { return static_cast<int>(states.size()); }
  /// Marginal level distribution q_hat.
  Eigen::VectorXd level_marginal(int n_levels) const;
  double mean_attribute() const;
};

/// NI level chain: rows 1..l act at mu_bar_i, rows l+1..I at y_hat = 0.
ChainModel build_ni_chain(const ModelParams& params, const Ladder& ladder,
                          const ClassWindows& ni);

/// Solves pi P = pi, sum pi = 1. Dense solve for <= 200 states, power
/// iteration to a 1e-12 residual otherwise. Throws NonConvergenceError when
/// the iteration cap is hit.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition);

/// Truncated NG chain over the recurrent class: attributes gamma^t * mu_bar_j
/// for t in [1, depth], reachable from the first improvement at level 1.
/// Requires a Definition-1-compliant ladder.
ChainModel build_ng_chain(const ModelParams& params, const Ladder& ladder,
                          const ClassWindows& ng, int depth);

struct BalanceResiduals {
  std::vector<double> residuals;      // |up-flow_i - down-flow_{i+1}|, i = 1..I-1
  std::vector<double> paper_literal;  // NI only: the appendix's literal third regime
};

/// Detailed-balance residuals. NI uses the three-regime rows; NG mixes the
/// per-attribute rows exactly as the stationary decomposition prescribes.
BalanceResiduals verify_detailed_balance(const ChainModel& chain);

/// Closed-form long-term utilities from the stationary distributions.
double ni_long_term_utility(const ChainModel& ni_chain, const ClassWindows& ni,
                            const ModelParams& params, const Ladder& ladder,
                            double unit_cost_ni);
double ng_long_term_utility(const ChainModel& ng_chain,
                            const ModelParams& params, double unit_cost_ng);

struct TheoremReport {
  int l_index = 0;
  bool ni_never_acts = false;  // l = 0: every row at y_hat = x with x -> 0
  double sigma_ni = 0.0;       // sigma(alpha w_bar_2^NI)
  double sigma_ng = 0.0;
  // exact NI balance-ratio residuals (index i=1..I-1) and NG concentration
  // slacks ((ratio)^(I-i) q_I - q_i for i >= 2; negative = violated)
  std::vector<double> ni_ratio_residuals;
  std::vector<double> ng_concentration_slack;
  double x_hat_ni = 0.0;
  double x_hat_ng = 0.0;
  double ng_attribute_floor = 0.0;  // gamma * min_i mu_bar_i^NG
  double delta_w_ng = 0.0;          // max_i (w_bar_i - w_under_i) over the ladder
  double utility_bound_delta_mu = 0.0;  // Theorem-3 right-hand side
};

TheoremReport theorem_bounds(const ClassWindows& ni, const ClassWindows& ng,
                             double cost_ni, double cost_ng, const Ladder& ladder,
                             const ModelParams& params, const ChainModel* ni_chain,
                             const ChainModel* ng_chain);

}  // namespace ladder
