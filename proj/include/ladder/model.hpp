#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace ladder {

/// Abstention probability as a function of the classifier confidence sigma.
/// All kinds vanish at sigma = 0 and 1, are symmetric around 1/2, strictly
/// increase on [0, 1/2), and peak at h(1/2) = beta_tilde.
enum class AbstentionKind { entropy, polynomial, absolute };

struct AbstentionSpec {
  AbstentionKind kind = AbstentionKind::entropy;
  double beta_tilde = 0.604;  // h(1/2)
  double poly_degree = 25.5;  // exponent t, polynomial kind only

  void validate() const;  // throws std::invalid_argument
};

AbstentionKind abstention_kind_from_string(const std::string& s);
std::string to_string(AbstentionKind k);

/// Logistic sigmoid, numerically stable at both tails.
double sigmoid(double x);

/// h(sigma). Throws if sigma is outside [0, 1].
double abstention(const AbstentionSpec& spec, double sigma);

/// dh/dsigma. For the absolute kind this is the one-sided slope +-2*beta
/// (sign of (1/2 - sigma)); the kink at 1/2 returns 0.
double abstention_deriv(const AbstentionSpec& spec, double sigma);

/// dh/dsigma from the complementary pair; stable in the saturated tails.
double abstention_deriv_pair(const AbstentionSpec& spec, double s_plus,
                             double s_minus);

/// h evaluated from the complementary pair (s, 1-s) computed independently.
/// Symmetric in its two arguments bit-for-bit, which gives the decision
/// probabilities their exact mirror symmetry.
double abstention_pair(const AbstentionSpec& spec, double s_plus, double s_minus);

enum class BoundaryClass { first, middle, terminal };

/// One classifier rung: a threshold plus its position in the ladder.
struct LevelSpec {
  int index = 1;  // 1-based
  double mu = 0.0;
  BoundaryClass cls = BoundaryClass::middle;
};

/// Thresholds mu_1..mu_I. Level classes derive from position alone.
struct Ladder {
  std::vector<double> mu;

  explicit Ladder(std::vector<double> thresholds);
  Ladder() = default;

  int size() const { return static_cast<int>(mu.size()); }
  LevelSpec level(int i) const;  // i in [1, size()]
};

/// Global model constants. Construction enforces Assumption 1
/// (0 < cost_game < cost_improve componentwise) and basic positivity.
struct ModelParams {
  double alpha = 4.0;             // sigmoid sensitivity
  double gamma = 0.9;             // retention factor in (0,1)
  double reward_per_level = 1.0;  // r
  Eigen::VectorXd theta;          // classifier weights, >= 0, not all zero
  Eigen::VectorXd cost_improve;   // c+
  Eigen::VectorXd cost_game;      // c-
  AbstentionSpec abstention;

  ModelParams(double alpha_, double gamma_, double r_, Eigen::VectorXd theta_,
              Eigen::VectorXd cost_improve_, Eigen::VectorXd cost_game_,
              AbstentionSpec abst);

  /// One-dimensional convenience: theta = (1).
  static ModelParams scalar(double alpha_, double gamma_, double r_,
                            double cost_improve_, double cost_game_,
                            AbstentionSpec abst);

  int dims() const { return static_cast<int>(theta.size()); }
};

/// Ternary decision distribution after boundary folding.
struct TransitionProbs {
  double p_up = 0.0;
  double p_stay = 1.0;
  double p_down = 0.0;
};

/// Unfolded quantities at feature offset z = y_hat - mu.
struct RawDecision {
  double sigma;    // sigma(alpha z)
  double sigma_c;  // sigma(-alpha z), exact complement
  double h;        // abstention probability
  double p_up;     // (1-h) sigma
  double p_stay;   // h
  double p_down;   // (1-h)(1-sigma)
};

RawDecision raw_decision(const ModelParams& params, double y_hat_minus_mu);

/// Eq.-1 outcome distribution at estimated qualification y_hat. At a first
/// (terminal) level the demote (promote) branch folds into stay.
TransitionProbs decision_probabilities(const ModelParams& params,
                                       const LevelSpec& level, double y_hat);

enum class Outcome { promote, stay, demote };

/// 53-bit uniform in [0,1); deterministic given the engine state.
double uniform01(std::mt19937_64& rng);

Outcome sample_decision(const TransitionProbs& probs, std::mt19937_64& rng);

std::string to_string(Outcome o);

}  // namespace ladder
