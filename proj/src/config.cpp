#include "ladder/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace ladder {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a number: '" + v + "'");
  }
}

long parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": not an integer: '" + v + "'");
  }
}

std::vector<double> parse_vector(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::string item;
  std::istringstream ss(v);
  while (ss >> item) {
    if (!item.empty() && item.back() == ',') item.pop_back();
    if (item.empty()) continue;
    out.push_back(parse_double(key, item));
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true/false");
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) x[static_cast<Eigen::Index>(i)] = v[i];
  return x;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

ModelParams ExperimentConfig::model_params() const {
  try {
    return ModelParams(alpha, gamma, reward, to_eigen(theta), to_eigen(cost_improve),
                       to_eigen(cost_game), abstention);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  os << "model.alpha=" << fmt(alpha) << "\nmodel.gamma=" << fmt(gamma)
     << "\nmodel.reward=" << fmt(reward) << "\nmodel.theta=";
  for (double v : theta) os << fmt(v) << ",";
  os << "\nmodel.cost_improve=";
  for (double v : cost_improve) os << fmt(v) << ",";
  os << "\nmodel.cost_game=";
  for (double v : cost_game) os << fmt(v) << ",";
  os << "\nmodel.abstention=" << to_string(abstention.kind)
     << "\nmodel.beta_tilde=" << fmt(abstention.beta_tilde);
  if (abstention.kind == AbstentionKind::polynomial) {
    os << "\nmodel.poly_degree=" << fmt(abstention.poly_degree);
  }
  os << "\nladder.mode=" << (ladder_mode == LadderMode::design ? "design" : "explicit");
  if (ladder_mode == LadderMode::design) {
    os << "\nladder.delta_mu=" << fmt(delta_mu) << "\nladder.cap=" << fmt(cap);
  } else {
    os << "\nladder.thresholds=";
    for (double v : thresholds) os << fmt(v) << ",";
  }
  os << "\nrun.policy=" << to_string(policy.kind);
  if (policy.kind == PolicyType::Mix) os << "\nrun.rho=" << fmt(policy.rho);
  os << "\nrun.trials=" << trials << "\nrun.horizon=" << horizon
     << "\nrun.seed=" << seed << "\nrun.window=" << window << "\nrun.x0=" << fmt(x0)
     << "\nrun.ng_depth=" << ng_depth << "\nrl.dx=" << fmt(rl.dx) << "\nrl.nx=" << rl.n_x
     << "\nrl.da=" << fmt(rl.da) << "\nrl.na=" << rl.n_a
     << "\nrl.episodes=" << rl.episodes << "\nrl.ep_horizon=" << rl.horizon
     << "\nrl.discount=" << fmt(rl.discount) << "\nrl.ucb=" << fmt(rl.ucb_coefficient)
     << "\nrl.seeds=" << rl.seeds << "\n";
  return os.str();
}

std::string ExperimentConfig::hash() const {
  const std::string s = canonical();
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::string section;
  std::istringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = section + "." + trim(line.substr(0, eq));
    if (kv.count(key)) throw ConfigError(key + ": duplicate key");
    kv[key] = trim(line.substr(eq + 1));
  }

  ExperimentConfig cfg;
  std::set<std::string> seen;
  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    seen.insert(key);
    return it->second;
  };

  if (auto v = take("model.alpha")) cfg.alpha = parse_double("model.alpha", *v);
  if (auto v = take("model.gamma")) cfg.gamma = parse_double("model.gamma", *v);
  if (auto v = take("model.reward")) cfg.reward = parse_double("model.reward", *v);
  if (auto v = take("model.theta")) cfg.theta = parse_vector("model.theta", *v);
  if (auto v = take("model.cost_improve")) cfg.cost_improve = parse_vector("model.cost_improve", *v);
  if (auto v = take("model.cost_game")) cfg.cost_game = parse_vector("model.cost_game", *v);
  if (auto v = take("model.abstention")) cfg.abstention.kind = abstention_kind_from_string(*v);
  if (auto v = take("model.beta_tilde")) cfg.abstention.beta_tilde = parse_double("model.beta_tilde", *v);
  if (auto v = take("model.poly_degree")) cfg.abstention.poly_degree = parse_double("model.poly_degree", *v);

  const auto thresholds = take("ladder.thresholds");
  const auto delta_mu = take("ladder.delta_mu");
  const auto cap = take("ladder.cap");
  if (thresholds && (delta_mu || cap)) {
    throw ConfigError("ladder: give either thresholds or (delta_mu, cap), not both");
  }
  if (thresholds) {
    cfg.ladder_mode = LadderMode::explicit_list;
    cfg.thresholds = parse_vector("ladder.thresholds", *thresholds);
  } else if (delta_mu && cap) {
    cfg.ladder_mode = LadderMode::design;
    cfg.delta_mu = parse_double("ladder.delta_mu", *delta_mu);
    cfg.cap = parse_double("ladder.cap", *cap);
  } else {
    throw ConfigError("ladder: need thresholds or both of (delta_mu, cap)");
  }

  if (auto v = take("run.policy")) cfg.policy.kind = policy_type_from_string(*v);
  if (auto v = take("run.rho")) cfg.policy.rho = parse_double("run.rho", *v);
  if (auto v = take("run.trials")) cfg.trials = static_cast<int>(parse_int("run.trials", *v));
  if (auto v = take("run.horizon")) cfg.horizon = static_cast<int>(parse_int("run.horizon", *v));
  if (auto v = take("run.seed")) cfg.seed = static_cast<uint64_t>(parse_int("run.seed", *v));
  if (auto v = take("run.window")) cfg.window = static_cast<int>(parse_int("run.window", *v));
  if (auto v = take("run.x0")) cfg.x0 = parse_double("run.x0", *v);
  if (auto v = take("run.out")) cfg.out_dir = *v;
  if (auto v = take("run.write_trajectories")) cfg.write_trajectories = parse_bool("run.write_trajectories", *v);
  if (auto v = take("run.ng_depth")) cfg.ng_depth = static_cast<int>(parse_int("run.ng_depth", *v));

  if (auto v = take("rl.dx")) cfg.rl.dx = parse_double("rl.dx", *v);
  if (auto v = take("rl.nx")) cfg.rl.n_x = static_cast<int>(parse_int("rl.nx", *v));
  if (auto v = take("rl.da")) cfg.rl.da = parse_double("rl.da", *v);
  if (auto v = take("rl.na")) cfg.rl.n_a = static_cast<int>(parse_int("rl.na", *v));
  if (auto v = take("rl.episodes")) cfg.rl.episodes = static_cast<int>(parse_int("rl.episodes", *v));
  if (auto v = take("rl.ep_horizon")) cfg.rl.horizon = static_cast<int>(parse_int("rl.ep_horizon", *v));
  if (auto v = take("rl.discount")) cfg.rl.discount = parse_double("rl.discount", *v);
  if (auto v = take("rl.ucb")) cfg.rl.ucb_coefficient = parse_double("rl.ucb", *v);
  if (auto v = take("rl.seeds")) cfg.rl.seeds = static_cast<int>(parse_int("rl.seeds", *v));

  for (const auto& [key, value] : kv) {
    if (!seen.count(key)) throw ConfigError(key + ": unknown key");
  }

  // invariants beyond per-key parsing
  cfg.model_params();  // throws ConfigError on Assumption-1 or shape violations
  if (cfg.ladder_mode == LadderMode::design) {
    if (!(cfg.delta_mu > 0.0)) throw ConfigError("ladder.delta_mu: must be positive");
    if (!(cfg.cap > cfg.delta_mu)) throw ConfigError("ladder.cap: must exceed delta_mu");
  } else {
    if (cfg.thresholds.size() < 2) throw ConfigError("ladder.thresholds: need at least 2 levels");
    for (size_t i = 0; i < cfg.thresholds.size(); ++i) {
      if (!(cfg.thresholds[i] >= 0.0)) throw ConfigError("ladder.thresholds: must be >= 0");
      if (i > 0 && !(cfg.thresholds[i] > cfg.thresholds[i - 1])) {
        throw ConfigError("ladder.thresholds: must be strictly increasing");
      }
    }
  }
  if (cfg.policy.kind == PolicyType::Mix && !(cfg.policy.rho >= 0.0 && cfg.policy.rho <= 1.0)) {
    throw ConfigError("run.rho: must lie in [0,1]");
  }
  if (cfg.trials < 1) throw ConfigError("run.trials: must be >= 1");
  if (cfg.horizon < 0) throw ConfigError("run.horizon: must be >= 0");
  if (cfg.window > cfg.horizon) throw ConfigError("run.window: longer than run.horizon");
  if (cfg.x0 < 0.0) throw ConfigError("run.x0: must be >= 0");
  if (cfg.ng_depth < 1) throw ConfigError("run.ng_depth: must be >= 1");
  try {
    cfg.rl.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value) {
  if (key == "model.alpha") cfg.alpha = parse_double(key, value);
  else if (key == "model.gamma") cfg.gamma = parse_double(key, value);
  else if (key == "model.reward") cfg.reward = parse_double(key, value);
  else if (key == "model.beta_tilde") cfg.abstention.beta_tilde = parse_double(key, value);
  else if (key == "model.poly_degree") cfg.abstention.poly_degree = parse_double(key, value);
  else if (key == "run.rho") cfg.policy.rho = parse_double(key, value);
  else if (key == "run.seed") cfg.seed = static_cast<uint64_t>(parse_int(key, value));
  else if (key == "run.trials") cfg.trials = static_cast<int>(parse_int(key, value));
  else if (key == "run.horizon") cfg.horizon = static_cast<int>(parse_int(key, value));
  else if (key == "ladder.delta_mu") cfg.delta_mu = parse_double(key, value);
  else if (key == "ladder.levels") {
    // L rungs evenly spaced on [0, cap]; increment cap/(L-1)
    if (cfg.ladder_mode != LadderMode::design || !(cfg.cap > 0.0)) {
      throw ConfigError("ladder.levels: requires the (delta_mu, cap) ladder form");
    }
    const long L = parse_int(key, value);
    if (L < 2) throw ConfigError("ladder.levels: need at least 2");
    cfg.ladder_mode = LadderMode::explicit_list;
    cfg.thresholds.clear();
    for (long k = 0; k < L; ++k) {
      cfg.thresholds.push_back(cfg.cap * static_cast<double>(k) / static_cast<double>(L - 1));
    }
  } else {
    throw ConfigError("unsupported sweep/override key: " + key);
  }
  cfg.model_params();  // re-validate
}

}  // namespace ladder
