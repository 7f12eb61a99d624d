#pragma once

#include "ladder/dynamics.hpp"
#include "ladder/rl.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ladder {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class LadderMode { explicit_list, design };

/// Flat-section key-value experiment description. Unknown keys, missing
/// required keys, and invariant violations are rejected with the offending
/// section.key in the message.
struct ExperimentConfig {
  // [model]
  double alpha = 4.0;
  double gamma = 0.9;
  double reward = 1.0;
  std::vector<double> theta{1.0};
  std::vector<double> cost_improve{0.80};
  std::vector<double> cost_game{0.75};
  AbstentionSpec abstention;

  // [ladder] — exactly one of the two forms
  LadderMode ladder_mode = LadderMode::design;
  std::vector<double> thresholds;  // explicit_list
  double delta_mu = 0.0;           // design
  double cap = 0.0;                // design (M)

  // [run]
  PolicyKind policy{PolicyType::NG, 0.0};
  int trials = 30;
  int horizon = 10000;
  uint64_t seed = 1;
  int window = 2000;
  double x0 = 0.0;
  std::string out_dir = "out";
  bool write_trajectories = false;
  int ng_depth = 66;  // NG chain truncation depth for the stationary command

  // [rl]
  RLConfig rl;

  ModelParams model_params() const;

  /// Canonical serialization; equal configs produce equal text.
  std::string canonical() const;
  /// FNV-1a hash of canonical(), as fixed-width hex.
  std::string hash() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

/// Applies a sweep/CLI override like "model.alpha=6" or "ladder.levels=8".
/// ladder.levels=L replaces the ladder with L rungs evenly spaced on
/// [0, cap] (requires the design form to supply cap).
void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);

}  // namespace ladder
