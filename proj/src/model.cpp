#include "ladder/model.hpp"

#include <cmath>
#include <stdexcept>

namespace ladder {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

void AbstentionSpec::validate() const {
  require(beta_tilde > 0.0 && beta_tilde < 1.0,
          "abstention.beta_tilde must lie in (0,1)");
  if (kind == AbstentionKind::polynomial) {
    require(poly_degree > 0.0, "abstention.poly_degree must be positive");
  }
}

AbstentionKind abstention_kind_from_string(const std::string& s) {
  if (s == "entropy") return AbstentionKind::entropy;
  if (s == "polynomial") return AbstentionKind::polynomial;
  if (s == "absolute") return AbstentionKind::absolute;
  throw std::invalid_argument("unknown abstention kind: " + s);
}

std::string to_string(AbstentionKind k) {
  switch (k) {
    case AbstentionKind::entropy: return "entropy";
    case AbstentionKind::polynomial: return "polynomial";
    case AbstentionKind::absolute: return "absolute";
  }
  return "?";
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double abstention_pair(const AbstentionSpec& spec, double s_plus, double s_minus) {
  switch (spec.kind) {
    case AbstentionKind::entropy: {
      // beta * H(sigma) / ln 2, with x ln x -> 0 at the endpoints. Normalizing
      // before scaling makes h(1/2) = beta exactly.
      auto xlnx = [](double v) { return v > 0.0 ? v * std::log(v) : 0.0; };
      return spec.beta_tilde * (-(xlnx(s_plus) + xlnx(s_minus)) / M_LN2);
    }
    case AbstentionKind::polynomial:
      return spec.beta_tilde * std::pow(4.0 * s_plus * s_minus, spec.poly_degree);
    case AbstentionKind::absolute:
      return spec.beta_tilde * 2.0 * std::min(s_plus, s_minus);
  }
  return 0.0;
}

double abstention(const AbstentionSpec& spec, double sigma) {
  if (!(sigma >= 0.0 && sigma <= 1.0)) {
    throw std::invalid_argument("abstention: sigma outside [0,1]");
  }
  return abstention_pair(spec, sigma, 1.0 - sigma);
}

double abstention_deriv_pair(const AbstentionSpec& spec, double s_plus,
                             double s_minus) {
  switch (spec.kind) {
    case AbstentionKind::entropy:
      if (s_plus <= 0.0 || s_minus <= 0.0) return 0.0;  // consumers multiply by s(1-s)
      return spec.beta_tilde * (std::log(s_minus) - std::log(s_plus)) / M_LN2;
    case AbstentionKind::polynomial: {
      const double u = 4.0 * s_plus * s_minus;
      if (u <= 0.0) return 0.0;
      return spec.beta_tilde * spec.poly_degree *
             std::pow(u, spec.poly_degree - 1.0) * 4.0 * (s_minus - s_plus);
    }
    case AbstentionKind::absolute:
      if (s_plus == s_minus) return 0.0;
      return s_plus < s_minus ? 2.0 * spec.beta_tilde : -2.0 * spec.beta_tilde;
  }
  return 0.0;
}

double abstention_deriv(const AbstentionSpec& spec, double sigma) {
  return abstention_deriv_pair(spec, sigma, 1.0 - sigma);
}

Ladder::Ladder(std::vector<double> thresholds) : mu(std::move(thresholds)) {
  if (mu.size() < 2) throw std::invalid_argument("ladder needs at least 2 levels");
  for (double m : mu) {
    if (!(m >= 0.0)) throw std::invalid_argument("ladder thresholds must be >= 0");
  }
}

LevelSpec Ladder::level(int i) const {
  if (i < 1 || i > size()) throw std::out_of_range("ladder level index");
  BoundaryClass cls = BoundaryClass::middle;
  if (i == 1) cls = BoundaryClass::first;
  else if (i == size()) cls = BoundaryClass::terminal;
  return LevelSpec{i, mu[static_cast<size_t>(i - 1)], cls};
}

ModelParams::ModelParams(double alpha_, double gamma_, double r_,
                         Eigen::VectorXd theta_, Eigen::VectorXd cost_improve_,
                         Eigen::VectorXd cost_game_, AbstentionSpec abst)
    : alpha(alpha_),
      gamma(gamma_),
      reward_per_level(r_),
      theta(std::move(theta_)),
      cost_improve(std::move(cost_improve_)),
      cost_game(std::move(cost_game_)),
      abstention(abst) {
  require(alpha > 0.0, "model.alpha must be positive");
  require(gamma > 0.0 && gamma < 1.0, "model.gamma must lie in (0,1)");
  require(reward_per_level > 0.0, "model.reward must be positive");
  const auto d = theta.size();
  require(d >= 1, "model.theta must be non-empty");
  require(cost_improve.size() == d && cost_game.size() == d,
          "model cost vectors must match theta dimension");
  require((theta.array() >= 0.0).all() && theta.maxCoeff() > 0.0,
          "model.theta must be >= 0 with at least one positive entry");
  for (Eigen::Index i = 0; i < d; ++i) {
    // Assumption 1: cheating is cheaper than improving, both positive.
    require(cost_game[i] > 0.0 && cost_game[i] < cost_improve[i] &&
                std::isfinite(cost_improve[i]),
            "Assumption 1 violated: need 0 < cost_game < cost_improve "
            "componentwise");
  }
  abstention.validate();
}

ModelParams ModelParams::scalar(double alpha_, double gamma_, double r_,
                                double cost_improve_, double cost_game_,
                                AbstentionSpec abst) {
  Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
  Eigen::VectorXd ci = Eigen::VectorXd::Constant(1, cost_improve_);
  Eigen::VectorXd cg = Eigen::VectorXd::Constant(1, cost_game_);
  return ModelParams(alpha_, gamma_, r_, one, ci, cg, abst);
}

RawDecision raw_decision(const ModelParams& params, double z) {
  const double a = params.alpha * z;
  RawDecision d;
  d.sigma = sigmoid(a);
  d.sigma_c = sigmoid(-a);
  d.h = abstention_pair(params.abstention, d.sigma, d.sigma_c);
  d.p_up = (1.0 - d.h) * d.sigma;
  d.p_down = (1.0 - d.h) * d.sigma_c;
  d.p_stay = d.h;
  return d;
}

TransitionProbs decision_probabilities(const ModelParams& params,
                                       const LevelSpec& level, double y_hat) {
  const RawDecision d = raw_decision(params, y_hat - level.mu);
  TransitionProbs p{d.p_up, d.p_stay, d.p_down};
  if (level.cls == BoundaryClass::first) {
    p.p_stay += p.p_down;
    p.p_down = 0.0;
  } else if (level.cls == BoundaryClass::terminal) {
    p.p_stay += p.p_up;
    p.p_up = 0.0;
  }
  return p;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Outcome sample_decision(const TransitionProbs& probs, std::mt19937_64& rng) {
  const double u = uniform01(rng);
  if (u < probs.p_up) return Outcome::promote;
  if (u < probs.p_up + probs.p_stay) return Outcome::stay;
  return Outcome::demote;
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::promote: return "promote";
    case Outcome::stay: return "stay";
    case Outcome::demote: return "demote";
  }
  return "?";
}

}  // namespace ladder
