#include "ladder/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <tuple>

namespace ladder {

Eigen::VectorXd ChainModel::level_marginal(int n_levels) const {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(n_levels);
  for (int s = 0; s < size(); ++s) {
    q[states[static_cast<size_t>(s)].first - 1] += stationary[s];
  }
  return q;
}

double ChainModel::mean_attribute() const {
  double x = 0.0;
  for (int s = 0; s < size(); ++s) {
    x += states[static_cast<size_t>(s)].second * stationary[s];
  }
  return x;
}

namespace {

int ni_concentration_level(const Ladder& ladder, const ClassWindows& ni) {
  int l = 0;
  for (int i = 1; i <= ladder.size(); ++i) {
    const LevelSpec lv = ladder.level(i);
    if (lv.mu + ni.of(lv.cls).w_under <= 0.0) l = i;
  }
  return l;
}

void fill_row(Eigen::MatrixXd& P, int row, int level, int n_levels,
              const TransitionProbs& p) {
  if (level > 1) P(row, level - 2) = p.p_down;
  P(row, level - 1) = p.p_stay;
  if (level < n_levels) P(row, level) = p.p_up;
}

}  // namespace

ChainModel build_ni_chain(const ModelParams& params, const Ladder& ladder,
                          const ClassWindows& ni) {
  if (!ni.all_valid()) {
    throw std::invalid_argument("build_ni_chain: invalid NI windows");
  }
  const int I = ladder.size();
  ChainModel chain;
  chain.kind = ChainModel::Kind::ni_levels;
  chain.l = ni_concentration_level(ladder, ni);
  chain.states.reserve(static_cast<size_t>(I));
  chain.transition = Eigen::MatrixXd::Zero(I, I);
  for (int i = 1; i <= I; ++i) {
    const LevelSpec lv = ladder.level(i);
    chain.states.emplace_back(i, 0.0);
    const double y_hat = i <= chain.l ? lv.mu + ni.of(lv.cls).w_bar : 0.0;
    fill_row(chain.transition, i - 1, i, I,
             decision_probabilities(params, lv, y_hat));
  }
  chain.stationary = stationary_distribution(chain.transition);
  return chain;
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& P) {
  const int n = static_cast<int>(P.rows());
  if (n != P.cols() || n < 1) {
    throw std::invalid_argument("stationary_distribution: square matrix required");
  }
  auto residual = [&](const Eigen::VectorXd& pi) {
    return (P.transpose() * pi - pi).lpNorm<Eigen::Infinity>();
  };

  if (n <= 200) {
    // (P^T - I) pi = 0 with the normalization row appended
    Eigen::MatrixXd A = P.transpose() - Eigen::MatrixXd::Identity(n, n);
    A.row(n - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b[n - 1] = 1.0;
    Eigen::VectorXd pi = A.partialPivLu().solve(b);
    if (pi.allFinite() && pi.minCoeff() > -1e-9 && residual(pi) < 1e-10) {
      return pi.cwiseMax(0.0) / pi.cwiseMax(0.0).sum();
    }
    // fall through to power iteration on a numerically awkward solve
  }

  Eigen::VectorXd pi = Eigen::VectorXd::Constant(n, 1.0 / n);
  for (long it = 0; it < 4000000; ++it) {
    Eigen::VectorXd next = P.transpose() * pi;
    next /= next.sum();
    const double res = (next - pi).lpNorm<Eigen::Infinity>();
    pi = next;
    if (res < 1e-12) return pi;
  }
  throw NonConvergenceError(
      "stationary_distribution: power iteration did not converge "
      "(reducible chain?)");
}

ChainModel build_ng_chain(const ModelParams& params, const Ladder& ladder,
                          const ClassWindows& ng, int depth) {
  if (depth < 1) throw std::invalid_argument("build_ng_chain: depth < 1");
  const int I = ladder.size();
  {
    LadderDesign d = make_design(ladder.mu, 0.0, ladder.mu.back(), params.gamma, ng);
    if (!check_incremental_thresholding(d, params.gamma).all()) {
      throw std::invalid_argument(
          "build_ng_chain: ladder violates incremental thresholding; the "
          "recurrent class is not closed");
    }
  }

  std::vector<double> mu_bar(static_cast<size_t>(I)), mu_under(static_cast<size_t>(I)),
      w_bar(static_cast<size_t>(I));
  for (int i = 1; i <= I; ++i) {
    const LevelSpec lv = ladder.level(i);
    const EffortWindow w = window_at_level(ng.of(lv.cls), lv);
    mu_bar[static_cast<size_t>(i - 1)] = w.mu_bar;
    mu_under[static_cast<size_t>(i - 1)] = w.mu_under;
    w_bar[static_cast<size_t>(i - 1)] = w.w_bar;
  }

  // State = (level, trajectory j, decay count t), attribute gamma^t mu_bar_j.
  struct Key {
    int level, j, t;
    bool operator<(const Key& o) const {
      return std::tie(level, j, t) < std::tie(o.level, o.j, o.t);
    }
  };
  auto attr_of = [&](const Key& k) {
    return std::pow(params.gamma, k.t) * mu_bar[static_cast<size_t>(k.j - 1)];
  };

  std::map<Key, int> index;
  std::vector<Key> keys;
  std::vector<Key> frontier;
  auto intern = [&](const Key& k) {
    auto [it, fresh] = index.emplace(k, static_cast<int>(keys.size()));
    if (fresh) {
      keys.push_back(k);
      frontier.push_back(k);
    }
    return it->second;
  };

  // After the first improvement at level 1 the attribute is gamma*mu_bar_1.
  intern(Key{1, 1, 1});
  intern(Key{2, 1, 1});

  struct Arc { int from, to; double p; };
  std::vector<Arc> arcs;
  const double tol = 1e-12;

  while (!frontier.empty()) {
    const Key k = frontier.back();
    frontier.pop_back();
    const int from = index.at(k);
    const int i = k.level;
    const double x = attr_of(k);
    const LevelSpec lv = ladder.level(i);

    double y_hat;
    Key next_attr{0, 0, 0};
    if (x < mu_under[static_cast<size_t>(i - 1)] - tol) {
      throw std::logic_error(
          "build_ng_chain: reached an attribute below the effort window; "
          "recurrent class not closed");
    } else if (x < mu_bar[static_cast<size_t>(i - 1)] - tol) {
      // in-window: improve to mu_bar_i, land at gamma*mu_bar_i
      y_hat = lv.mu + w_bar[static_cast<size_t>(i - 1)];
      next_attr = Key{0, i, 1};
    } else {
      // at or above the window top: no action, pure depreciation
      y_hat = x;
      next_attr = Key{0, k.j, std::min(k.t + 1, depth)};
    }

    const TransitionProbs p = decision_probabilities(params, lv, y_hat);
    auto push = [&](int level_next, double prob) {
      if (prob <= 0.0) return;
      Key nk = next_attr;
      nk.level = level_next;
      arcs.push_back({from, intern(nk), prob});
    };
    push(i + 1, p.p_up);
    push(i, p.p_stay);
    push(i - 1, p.p_down);
  }

  const int n = static_cast<int>(keys.size());
  ChainModel chain;
  chain.kind = ChainModel::Kind::ng_truncated;
  chain.states.reserve(static_cast<size_t>(n));
  chain.improving.resize(static_cast<size_t>(n));
  chain.effort.resize(static_cast<size_t>(n), 0.0);
  for (int s = 0; s < n; ++s) {
    const Key& k = keys[static_cast<size_t>(s)];
    const double x = attr_of(k);
    chain.states.emplace_back(k.level, x);
    const bool improve = x < mu_bar[static_cast<size_t>(k.level - 1)] - tol;
    chain.improving[static_cast<size_t>(s)] = improve ? 1 : 0;
    if (improve) {
      chain.effort[static_cast<size_t>(s)] = mu_bar[static_cast<size_t>(k.level - 1)] - x;
    }
  }
  chain.transition = Eigen::MatrixXd::Zero(n, n);
  for (const Arc& a : arcs) chain.transition(a.from, a.to) += a.p;
  chain.stationary = stationary_distribution(chain.transition);
  return chain;
}

BalanceResiduals verify_detailed_balance(const ChainModel& chain) {
  BalanceResiduals out;
  if (chain.kind == ChainModel::Kind::ni_levels) {
    const int I = chain.size();
    const auto& P = chain.transition;
    const auto& pi = chain.stationary;
    for (int i = 0; i + 1 < I; ++i) {
      out.residuals.push_back(std::abs(P(i, i + 1) * pi[i] - P(i + 1, i) * pi[i + 1]));
    }
    // The appendix's literal third regime p_i^+(0) pi_i = p_{i+1}^+(0) pi_i,
    // reported alongside the induction-consistent form above.
    for (int i = chain.l; i + 1 < I; ++i) {
      const double p_up_i = P(i, i + 1);
      const double p_up_next = i + 2 < I ? P(i + 1, i + 2) : 0.0;  // folded at I
      out.paper_literal.push_back(std::abs(p_up_i * pi[i] - p_up_next * pi[i]));
    }
    return out;
  }

  // NG: mixture flows between adjacent level marginals.
  int n_levels = 0;
  for (const auto& [lvl, x] : chain.states) n_levels = std::max(n_levels, lvl);
  Eigen::VectorXd up_flow = Eigen::VectorXd::Zero(n_levels);
  Eigen::VectorXd down_flow = Eigen::VectorXd::Zero(n_levels);
  for (int s = 0; s < chain.size(); ++s) {
    const int lvl = chain.states[static_cast<size_t>(s)].first;
    for (int t = 0; t < chain.size(); ++t) {
      const double f = chain.stationary[s] * chain.transition(s, t);
      if (f == 0.0) continue;
      const int lvl_t = chain.states[static_cast<size_t>(t)].first;
      if (lvl_t == lvl + 1) up_flow[lvl - 1] += f;
      if (lvl_t == lvl - 1) down_flow[lvl_t - 1] += f;  // indexed by lower level
    }
  }
  for (int i = 0; i + 1 < n_levels; ++i) {
    out.residuals.push_back(std::abs(up_flow[i] - down_flow[i]));
  }
  return out;
}

double ni_long_term_utility(const ChainModel& ni_chain, const ClassWindows& ni,
                            const ModelParams& params, const Ladder& ladder,
                            double unit_cost_ni) {
  const double r = params.reward_per_level;
  double u = 0.0;
  for (int i = 1; i <= ladder.size(); ++i) {
    u += r * i * ni_chain.stationary[i - 1];
    if (i <= ni_chain.l) {
      const LevelSpec lv = ladder.level(i);
      const double mu_bar = lv.mu + ni.of(lv.cls).w_bar;
      u -= unit_cost_ni * mu_bar * ni_chain.stationary[i - 1];
    }
  }
  return u;
}

double ng_long_term_utility(const ChainModel& ng_chain, const ModelParams& params,
                            double unit_cost_ng) {
  if (ng_chain.kind != ChainModel::Kind::ng_truncated) {
    throw std::invalid_argument("ng_long_term_utility: NG chain required");
  }
  int n_levels = 0;
  for (const auto& [lvl, x] : ng_chain.states) n_levels = std::max(n_levels, lvl);
  const Eigen::VectorXd q = ng_chain.level_marginal(n_levels);
  double u = 0.0;
  for (int i = 1; i <= n_levels; ++i) u += params.reward_per_level * i * q[i - 1];
  for (int s = 0; s < ng_chain.size(); ++s) {
    u -= unit_cost_ng * ng_chain.effort[static_cast<size_t>(s)] * ng_chain.stationary[s];
  }
  return u;
}

TheoremReport theorem_bounds(const ClassWindows& ni, const ClassWindows& ng,
                             double cost_ni, double cost_ng, const Ladder& ladder,
                             const ModelParams& params, const ChainModel* ni_chain,
                             const ChainModel* ng_chain) {
  TheoremReport rep;
  const int I = ladder.size();
  rep.l_index = ni_concentration_level(ladder, ni);
  rep.ni_never_acts = rep.l_index == 0;
  rep.sigma_ni = sigmoid(params.alpha * ni.middle.w_bar);
  rep.sigma_ng = sigmoid(params.alpha * ng.middle.w_bar);

  // Delta w^NG over the classes present in the ladder
  {
    double dw = std::max(ng.first.w_bar - ng.first.w_under,
                         ng.terminal.w_bar - ng.terminal.w_under);
    if (I >= 3) dw = std::max(dw, ng.middle.w_bar - ng.middle.w_under);
    rep.delta_w_ng = dw;
  }

  double floor = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= I; ++i) {
    const LevelSpec lv = ladder.level(i);
    floor = std::min(floor, lv.mu + ng.of(lv.cls).w_bar);
  }
  rep.ng_attribute_floor = params.gamma * floor;

  rep.x_hat_ni = 0.0;
  if (ng_chain) rep.x_hat_ng = ng_chain->mean_attribute();

  // Theorem-3 right-hand side, as stated
  {
    const double s_ni = rep.sigma_ni, s_ng = rep.sigma_ng;
    const int l = std::max(rep.l_index, 1);
    const LevelSpec lv = ladder.level(l);
    const double w_bar_l_ni = ni.of(lv.cls).w_bar;
    const double inner = (2.0 * s_ni - 1.0) / (s_ni * s_ni) * w_bar_l_ni -
                         ni.middle.w_under -
                         cost_ng / (cost_ni * s_ni) * rep.delta_w_ng;
    const double tail = params.reward_per_level / (cost_ni * s_ni) *
                        (s_ng * (2.0 * s_ni - 1.0) / (s_ni * (2.0 * s_ng - 1.0)) - 1.0);
    rep.utility_bound_delta_mu = (2.0 * s_ni - 1.0) / s_ni * inner - tail;
  }

  if (ni_chain) {
    const auto& q = ni_chain->stationary;
    const auto& P = ni_chain->transition;
    for (int i = 0; i + 1 < I; ++i) {
      rep.ni_ratio_residuals.push_back(
          std::abs(P(i, i + 1) * q[i] - P(i + 1, i) * q[i + 1]));
    }
  }
  if (ng_chain) {
    int n_levels = 0;
    for (const auto& [lvl, x] : ng_chain->states) n_levels = std::max(n_levels, lvl);
    const Eigen::VectorXd q = ng_chain->level_marginal(n_levels);
    const double ratio = (1.0 - rep.sigma_ng) / rep.sigma_ng;
    for (int i = 2; i <= n_levels; ++i) {
      const double bound = std::pow(ratio, n_levels - i) * q[n_levels - 1];
      rep.ng_concentration_slack.push_back(bound - q[i - 1]);
    }
  }
  return rep;
}

}  // namespace ladder
