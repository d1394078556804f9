// Copyright 2026 The bdplan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bdplan/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "bdplan/augmented_game.hpp"
#include "bdplan/rng.hpp"
#include "bdplan/verification.hpp"

#ifndef BDPLAN_VERSION_STRING
#define BDPLAN_VERSION_STRING "unknown"
#endif

namespace bdplan::harness {
namespace fs = std::filesystem;
namespace {

const std::set<std::string>& KnownKeys() {
  static const std::set<std::string> keys = {
      "layout",          "reward_preset",    "victim_high",
      "victim_low",      "victim_trap",      "attacker_high",
      "attacker_low",    "attacker_trap",    "slip",
      "discount",        "p_obs",            "delta",
      "alphas",          "extra_kernels",    "kernel_budget",
      "memory_bound",    "memory_capacity",  "optimal_value",
      "q_learning_episodes", "q_learning_episode_length",
      "q_learning_rate", "q_learning_exploration",
      "epsilon",         "batch_size",       "horizon",
      "max_iters",       "lr0",              "lr1",
      "lr0_decay",       "lr1_decay",        "stop_threshold",
      "baseline",        "discount_scores",  "stop_at_absorbing",
      "exact_metrics",   "seed"};
  return keys;
}

std::string Num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

std::string JoinNumbers(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) out += ", ";
    out += Num(xs[i]);
  }
  return out;
}

std::vector<std::string> SplitPaths(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::string Resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || fs::path(path).is_absolute() || base_dir.empty()) {
    return path;
  }
  return (fs::path(base_dir) / path).lexically_normal().string();
}

void Require(bool ok, const std::string& key, const std::string& message) {
  if (!ok) throw ConfigError(key + ": " + message);
}

std::ofstream OpenOutput(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

const char* PresetName(RewardPreset preset) {
  switch (preset) {
    case RewardPreset::kZeroSum:
      return "zero_sum";
    case RewardPreset::kNonZeroSum:
      return "non_zero_sum";
    case RewardPreset::kCustom:
      return "custom";
  }
  return "custom";
}

gridworld::Payoffs AttackerPayoffs(const ExperimentConfig& config) {
  switch (config.reward_preset) {
    case RewardPreset::kZeroSum:
      return gridworld::ZeroSumAttacker(config.victim);
    case RewardPreset::kNonZeroSum:
      return gridworld::NonZeroSumAttacker();
    case RewardPreset::kCustom:
      return config.attacker;
  }
  return config.attacker;
}

void WriteMetadata(std::ostream& out, const ExperimentConfig& config,
                   const TrainRun& run) {
  out << "version = " << VersionString() << "\n";
  WriteConfig(out, config);
  out << "# results\n";
  out << "optimal_value_estimate = " << Num(run.optimal_value) << "\n";
  out << "threshold = " << Num(run.result.threshold) << "\n";
  out << "kernel_distance = " << Num(run.rectangularity.max_deviation) << "\n";
  out << "iterations = " << run.result.history.size() << "\n";
  out << "stopped_early = " << (run.result.stopped_early ? "true" : "false")
      << "\n";
  const FinalEvaluation& f = run.result.final;
  out << "final_v0_original_exact = " << Num(f.v0_original_exact) << "\n";
  out << "final_v0_attacked_exact = " << Num(f.v0_attacked_exact) << "\n";
  out << "final_v1_attacked_exact = " << Num(f.v1_attacked_exact) << "\n";
  out << "final_v1_untriggered_exact = " << Num(f.v1_untriggered_exact) << "\n";
}

bool IsZeroSum(const Mdp& mdp) {
  return mdp.reward_attacker == -mdp.reward_victim;
}

CheckResult Check(std::string name, bool passed, double measured,
                  std::string detail) {
  return {std::move(name), passed, measured, std::move(detail)};
}

}  // namespace

const char* VersionString() { return BDPLAN_VERSION_STRING; }

std::vector<double> ExperimentConfig::EffectiveAlphas() const {
  if (delta) return gridworld::SlipsForDelta(slip, *delta);
  return alphas;
}

ExperimentConfig ParseExperimentConfig(const KeyValueConfig& kv,
                                       const std::string& base_dir) {
  if (const auto unknown = kv.UnknownKeys(KnownKeys()); !unknown.empty()) {
    throw ConfigError(unknown.front() + ": unknown key");
  }
  ExperimentConfig c;
  const std::string layout = kv.GetString("layout", "");
  if (!layout.empty() && layout != "default") {
    c.layout_path = Resolve(layout, base_dir);
    Require(fs::exists(c.layout_path), "layout",
            "file not found: " + c.layout_path);
  }

  const std::string preset = kv.GetString("reward_preset", "zero_sum");
  if (preset == "zero_sum") {
    c.reward_preset = RewardPreset::kZeroSum;
  } else if (preset == "non_zero_sum") {
    c.reward_preset = RewardPreset::kNonZeroSum;
  } else if (preset == "custom") {
    c.reward_preset = RewardPreset::kCustom;
  } else {
    throw ConfigError("reward_preset: expected zero_sum, non_zero_sum or custom");
  }
  c.victim.high_target = kv.GetDouble("victim_high", c.victim.high_target);
  c.victim.low_target = kv.GetDouble("victim_low", c.victim.low_target);
  c.victim.trap = kv.GetDouble("victim_trap", c.victim.trap);
  const bool has_attacker = kv.Has("attacker_high") ||
                            kv.Has("attacker_low") || kv.Has("attacker_trap");
  Require(!has_attacker || c.reward_preset == RewardPreset::kCustom,
          "reward_preset", "attacker_* payoffs require reward_preset = custom");
  c.attacker = gridworld::ZeroSumAttacker(c.victim);
  c.attacker.high_target = kv.GetDouble("attacker_high", c.attacker.high_target);
  c.attacker.low_target = kv.GetDouble("attacker_low", c.attacker.low_target);
  c.attacker.trap = kv.GetDouble("attacker_trap", c.attacker.trap);

  c.slip = kv.GetDouble("slip", c.slip);
  Require(c.slip >= 0.0 && c.slip < 0.5, "slip", "must lie in [0, 0.5)");
  c.discount = kv.GetDouble("discount", c.discount);
  Require(c.discount > 0.0 && c.discount < 1.0, "discount", "must lie in (0, 1)");
  c.p_obs = kv.GetDouble("p_obs", c.p_obs);
  Require(c.p_obs >= 0.0 && c.p_obs <= 1.0, "p_obs", "must lie in [0, 1]");

  Require(!(kv.Has("delta") && kv.Has("alphas")), "delta",
          "set either delta or alphas, not both");
  if (kv.Has("delta")) {
    c.delta = kv.GetDouble("delta", 0.0);
    Require(*c.delta >= 0.0 && c.slip + *c.delta < 0.5, "delta",
            "must satisfy 0 <= delta and slip + delta < 0.5");
  }
  c.alphas = kv.GetDoubleList("alphas", c.alphas);
  for (double a : c.alphas) {
    Require(a >= 0.0 && a < 0.5, "alphas", "each value must lie in [0, 0.5)");
  }
  for (const std::string& p : SplitPaths(kv.GetString("extra_kernels", ""))) {
    const std::string path = Resolve(p, base_dir);
    Require(fs::exists(path), "extra_kernels", "file not found: " + path);
    c.extra_kernel_files.push_back(path);
  }
  Require(!c.EffectiveAlphas().empty() || !c.extra_kernel_files.empty(), "alphas",
          "at least one perturbed kernel is required");
  if (kv.Has("kernel_budget")) {
    c.kernel_budget = kv.GetDouble("kernel_budget", 0.0);
    Require(*c.kernel_budget >= 0.0, "kernel_budget", "must be nonnegative");
  }

  c.memory_bound = kv.GetInt("memory_bound", c.memory_bound);
  Require(c.memory_bound >= 1, "memory_bound", "must be positive");
  c.memory_capacity = static_cast<std::size_t>(
      kv.GetUint64("memory_capacity", c.memory_capacity));
  Require(c.memory_capacity >= 1, "memory_capacity", "must be positive");

  const std::string method = kv.GetString("optimal_value", "value_iteration");
  if (method == "value_iteration") {
    c.optimal_value_method = OptimalValueMethod::kValueIteration;
  } else if (method == "q_learning") {
    c.optimal_value_method = OptimalValueMethod::kQLearning;
  } else {
    throw ConfigError("optimal_value: expected value_iteration or q_learning");
  }
  c.q_learning.episodes = kv.GetInt("q_learning_episodes", c.q_learning.episodes);
  Require(c.q_learning.episodes >= 1, "q_learning_episodes", "must be positive");
  c.q_learning.episode_length =
      kv.GetInt("q_learning_episode_length", c.q_learning.episode_length);
  Require(c.q_learning.episode_length >= 1, "q_learning_episode_length",
          "must be positive");
  c.q_learning.learning_rate =
      kv.GetDouble("q_learning_rate", c.q_learning.learning_rate);
  Require(c.q_learning.learning_rate > 0.0 && c.q_learning.learning_rate <= 1.0,
          "q_learning_rate", "must lie in (0, 1]");
  c.q_learning.exploration =
      kv.GetDouble("q_learning_exploration", c.q_learning.exploration);
  Require(c.q_learning.exploration >= 0.0 && c.q_learning.exploration <= 1.0,
          "q_learning_exploration", "must lie in [0, 1]");

  TrainConfig& t = c.train;
  t.epsilon = kv.GetDouble("epsilon", t.epsilon);
  t.batch_size = kv.GetInt("batch_size", t.batch_size);
  t.horizon = kv.GetInt("horizon", t.horizon);
  t.max_iters = kv.GetInt("max_iters", t.max_iters);
  t.lr_backdoor.initial = kv.GetDouble("lr0", t.lr_backdoor.initial);
  t.lr_trigger.initial = kv.GetDouble("lr1", t.lr_trigger.initial);
  t.lr_backdoor.decay = kv.GetDouble("lr0_decay", t.lr_backdoor.decay);
  t.lr_trigger.decay = kv.GetDouble("lr1_decay", t.lr_trigger.decay);
  t.stop_threshold = kv.GetDouble("stop_threshold", t.stop_threshold);
  t.baseline = kv.GetBool("baseline", t.baseline);
  t.discount_scores = kv.GetBool("discount_scores", t.discount_scores);
  t.stop_at_absorbing = kv.GetBool("stop_at_absorbing", t.stop_at_absorbing);
  t.exact_metrics = kv.GetBool("exact_metrics", t.exact_metrics);
  t.seed = kv.GetUint64("seed", t.seed);
  if (const std::string err = t.Validate(); !err.empty()) {
    throw ConfigError(err);
  }
  return c;
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  const KeyValueConfig kv = KeyValueConfig::Load(path);
  return ParseExperimentConfig(kv, fs::path(path).parent_path().string());
}

void WriteConfig(std::ostream& out, const ExperimentConfig& c) {
  out << "layout = " << (c.layout_path.empty() ? "default" : c.layout_path)
      << "\n";
  out << "reward_preset = " << PresetName(c.reward_preset) << "\n";
  out << "victim_high = " << Num(c.victim.high_target) << "\n";
  out << "victim_low = " << Num(c.victim.low_target) << "\n";
  out << "victim_trap = " << Num(c.victim.trap) << "\n";
  if (c.reward_preset == RewardPreset::kCustom) {
    out << "attacker_high = " << Num(c.attacker.high_target) << "\n";
    out << "attacker_low = " << Num(c.attacker.low_target) << "\n";
    out << "attacker_trap = " << Num(c.attacker.trap) << "\n";
  }
  out << "slip = " << Num(c.slip) << "\n";
  out << "discount = " << Num(c.discount) << "\n";
  out << "p_obs = " << Num(c.p_obs) << "\n";
  if (c.delta) {
    out << "delta = " << Num(*c.delta) << "\n";
  } else {
    out << "alphas = " << JoinNumbers(c.alphas) << "\n";
  }
  if (!c.extra_kernel_files.empty()) {
    out << "extra_kernels = ";
    for (std::size_t i = 0; i < c.extra_kernel_files.size(); ++i) {
      out << (i ? ", " : "") << c.extra_kernel_files[i];
    }
    out << "\n";
  }
  if (c.kernel_budget) out << "kernel_budget = " << Num(*c.kernel_budget) << "\n";
  out << "memory_bound = " << c.memory_bound << "\n";
  out << "memory_capacity = " << c.memory_capacity << "\n";
  if (c.optimal_value_method == OptimalValueMethod::kQLearning) {
    out << "optimal_value = q_learning\n";
    out << "q_learning_episodes = " << c.q_learning.episodes << "\n";
    out << "q_learning_episode_length = " << c.q_learning.episode_length << "\n";
    out << "q_learning_rate = " << Num(c.q_learning.learning_rate) << "\n";
    out << "q_learning_exploration = " << Num(c.q_learning.exploration) << "\n";
  } else {
    out << "optimal_value = value_iteration\n";
  }
  const TrainConfig& t = c.train;
  out << "epsilon = " << Num(t.epsilon) << "\n";
  out << "batch_size = " << t.batch_size << "\n";
  out << "horizon = " << t.horizon << "\n";
  out << "max_iters = " << t.max_iters << "\n";
  out << "lr0 = " << Num(t.lr_backdoor.initial) << "\n";
  out << "lr1 = " << Num(t.lr_trigger.initial) << "\n";
  out << "lr0_decay = " << Num(t.lr_backdoor.decay) << "\n";
  out << "lr1_decay = " << Num(t.lr_trigger.decay) << "\n";
  out << "stop_threshold = " << Num(t.stop_threshold) << "\n";
  out << "baseline = " << (t.baseline ? "true" : "false") << "\n";
  out << "discount_scores = " << (t.discount_scores ? "true" : "false") << "\n";
  out << "stop_at_absorbing = " << (t.stop_at_absorbing ? "true" : "false")
      << "\n";
  out << "exact_metrics = " << (t.exact_metrics ? "true" : "false") << "\n";
  out << "seed = " << t.seed << "\n";
}

void WriteMatrix(std::ostream& out, const Eigen::MatrixXd& matrix) {
  out << matrix.rows() << " " << matrix.cols() << "\n";
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      out << (j ? " " : "") << Num(matrix(i, j));
    }
    out << "\n";
  }
}

Eigen::MatrixXd ReadMatrix(std::istream& in, const std::string& what) {
  long rows = 0;
  long cols = 0;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) {
    throw ConfigError(what + ": expected a 'rows cols' header");
  }
  Eigen::MatrixXd m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < cols; ++j) {
      if (!(in >> m(i, j))) {
        throw ConfigError(what + ": missing or malformed entry at row " +
                          std::to_string(i) + ", column " + std::to_string(j));
      }
    }
  }
  std::string extra;
  if (in >> extra) throw ConfigError(what + ": trailing data '" + extra + "'");
  return m;
}

Kernel LoadKernel(const std::string& path, int n_states, int n_actions) {
  std::ifstream in(path);
  if (!in) throw ConfigError("extra_kernels: cannot open " + path);
  const Eigen::MatrixXd m = ReadMatrix(in, path);
  if (m.rows() != static_cast<long>(n_states) * n_actions || m.cols() != n_states) {
    std::ostringstream msg;
    msg << path << ": expected a " << n_states * n_actions << " x " << n_states
        << " matrix, got " << m.rows() << " x " << m.cols();
    throw ConfigError(msg.str());
  }
  Kernel kernel(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      for (int t = 0; t < n_states; ++t) kernel(s, a, t) = m(s * n_actions + a, t);
    }
  }
  return kernel;
}

Experiment BuildExperiment(const ExperimentConfig& config) {
  Experiment e;
  try {
    e.spec.layout = config.layout_path.empty()
                        ? gridworld::DefaultLayout()
                        : gridworld::LoadLayout(config.layout_path);
  } catch (const gridworld::LayoutError& err) {
    throw ConfigError(std::string("layout: ") + err.what());
  }
  e.spec.slip = config.slip;
  e.spec.discount = config.discount;
  e.spec.p_obs = config.p_obs;
  e.spec.victim = config.victim;
  e.spec.attacker = AttackerPayoffs(config);
  try {
    e.spec.Validate();
  } catch (const std::exception& err) {
    throw ConfigError(std::string("layout: ") + err.what());
  }

  Mdp mdp = gridworld::BuildGridworldMdp(e.spec);
  const std::vector<double> alphas = config.EffectiveAlphas();
  PerturbationSet pset = gridworld::BuildPerturbationSet(e.spec, alphas);
  for (const std::string& path : config.extra_kernel_files) {
    pset.kernels.push_back(LoadKernel(path, mdp.n_states(), mdp.n_actions()));
    pset.budget = std::max(pset.budget, KernelDistance(pset.kernels.back(),
                                                       pset.nominal()));
  }
  if (config.kernel_budget) pset.budget = *config.kernel_budget;
  Emission emission = gridworld::BuildEmission(e.spec);
  MemoryAutomaton memory;
  try {
    memory = BuildSuffixMemory(emission.n_obs(), config.memory_bound,
                               config.memory_capacity);
  } catch (const CapacityError& err) {
    throw ConfigError(std::string("memory_bound: ") + err.what());
  }
  e.model = std::make_unique<AttackModel>(AttackModel{
      std::move(mdp), std::move(pset), std::move(emission), std::move(memory)});
  return e;
}

double QLearningOptimalValue(const Mdp& mdp, const QLearningOptions& options,
                             std::uint64_t seed) {
  const int n = mdp.n_states();
  const int na = mdp.n_actions();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, na);
  Rng rng(seed);
  const std::span<const double> mu(mdp.initial_dist.data(), n);
  for (int ep = 0; ep < options.episodes; ++ep) {
    int s = rng.Categorical(mu);
    for (int t = 0; t < options.episode_length; ++t) {
      int a = 0;
      if (rng.Uniform() < options.exploration) {
        a = std::min(na - 1, static_cast<int>(rng.Uniform() * na));
      } else {
        q.row(s).maxCoeff(&a);
      }
      const int next = rng.Categorical(mdp.transition.Row(s, a));
      const double target = mdp.reward_victim(s, a) +
                            mdp.discount * q.row(next).maxCoeff();
      q(s, a) += options.learning_rate * (target - q(s, a));
      if (mdp.IsAbsorbingZeroReward(next)) break;
      s = next;
    }
  }
  Eigen::VectorXi greedy(n);
  for (int s = 0; s < n; ++s) q.row(s).maxCoeff(&greedy(s));
  return PolicyValueExact(mdp, SharpenedPolicy(greedy, na, 50.0),
                          RewardSelector::kVictim)
      .scalar_value;
}

double ComputeOptimalValue(const Mdp& mdp, const ExperimentConfig& config) {
  if (config.optimal_value_method == OptimalValueMethod::kQLearning) {
    return QLearningOptimalValue(
        mdp, config.q_learning,
        DeriveSeed(config.train.seed, std::numeric_limits<std::uint64_t>::max()));
  }
  return OptimalValue(mdp).value.scalar_value;
}

void WriteMetricsHeader(std::ostream& out) { out << kMetricsHeader << "\n"; }

void WriteMetricsRow(std::ostream& out, const IterationMetrics& m) {
  out << m.iter << "," << BranchName(m.branch) << "," << Num(m.v0_original_mc)
      << "," << Num(m.v0_original_exact) << "," << Num(m.v0_attacked_exact)
      << "," << Num(m.v1_attacked_exact) << ","
      << (m.constraint_satisfied ? 1 : 0) << "," << Num(m.dtheta0) << ","
      << Num(m.dtheta1) << "\n";
}

TrainRun RunTrain(const ExperimentConfig& config, const std::string& out_dir,
                  const TrainObserver& observer) {
  const Experiment experiment = BuildExperiment(config);
  const AttackModel& model = *experiment.model;

  if (const ValidationReport report = ValidateMdp(model.mdp); !report.ok()) {
    throw ConfigError("model: " + report.ToString());
  }
  TrainRun run;
  run.rectangularity = CheckDRectangular(model.perturbations);
  if (!run.rectangularity.ok()) {
    throw ConfigError("kernel_budget: " + run.rectangularity.ToString());
  }
  for (std::size_t k = 1; k < model.perturbations.kernels.size(); ++k) {
    Mdp perturbed = model.mdp;
    perturbed.transition = model.perturbations.kernels[k];
    if (const ValidationReport report = ValidateMdp(perturbed); !report.ok()) {
      throw ConfigError("kernel " + std::to_string(k) + ": " + report.ToString());
    }
  }

  run.optimal_value = ComputeOptimalValue(model.mdp, config);
  run.result = Train(model, config.train, run.optimal_value, observer);

  if (out_dir.empty()) return run;
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  {
    std::ofstream out = OpenOutput(dir / "metrics.csv");
    WriteMetricsHeader(out);
    for (const IterationMetrics& m : run.result.history) WriteMetricsRow(out, m);
  }
  {
    std::ofstream out = OpenOutput(dir / "theta0.txt");
    WriteMatrix(out, run.result.backdoor.params());
  }
  {
    std::ofstream out = OpenOutput(dir / "theta1.txt");
    WriteMatrix(out, run.result.trigger.params());
  }
  {
    std::ofstream out = OpenOutput(dir / "metadata.txt");
    WriteMetadata(out, config, run);
  }
  return run;
}

SweepVariable ParseSweepVariable(const std::string& name) {
  if (name == "epsilon") return SweepVariable::kEpsilon;
  if (name == "delta") return SweepVariable::kDelta;
  throw ConfigError("var: expected epsilon or delta, got '" + name + "'");
}

const char* SweepVariableName(SweepVariable var) {
  return var == SweepVariable::kEpsilon ? "epsilon" : "delta";
}

std::vector<SweepPoint> RunSweep(const ExperimentConfig& config,
                                 SweepVariable var,
                                 const std::vector<double>& values,
                                 const std::string& out_dir) {
  if (values.empty()) throw ConfigError("values: empty sweep");
  std::vector<SweepPoint> points;
  points.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    ExperimentConfig point = config;
    if (var == SweepVariable::kEpsilon) {
      point.train.epsilon = values[i];
      if (const std::string err = point.train.Validate(); !err.empty()) {
        throw ConfigError("values: " + err);
      }
    } else {
      Require(values[i] >= 0.0 && point.slip + values[i] < 0.5, "values",
              "delta must satisfy 0 <= delta and slip + delta < 0.5");
      point.delta = values[i];
    }
    point.train.seed = DeriveSeed(config.train.seed, i);
    std::string point_dir;
    if (!out_dir.empty()) {
      point_dir = (fs::path(out_dir) /
                   (std::string(SweepVariableName(var)) + "_" + std::to_string(i)))
                      .string();
    }
    SweepPoint sp;
    sp.value = values[i];
    sp.seed = point.train.seed;
    sp.run = RunTrain(point, point_dir);
    points.push_back(std::move(sp));
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream out = OpenOutput(fs::path(out_dir) / "summary.csv");
    WriteSweepSummary(out, var, points);
  }
  return points;
}

void WriteSweepSummary(std::ostream& out, SweepVariable var,
                       const std::vector<SweepPoint>& points) {
  out << SweepVariableName(var)
      << ",seed,optimal_value,threshold,v0_original_exact,v0_attacked_exact,"
         "v1_attacked_exact,v1_untriggered_exact,iterations,stopped_early\n";
  for (const SweepPoint& p : points) {
    const FinalEvaluation& f = p.run.result.final;
    out << Num(p.value) << "," << p.seed << "," << Num(p.run.optimal_value)
        << "," << Num(p.run.result.threshold) << "," << Num(f.v0_original_exact)
        << "," << Num(f.v0_attacked_exact) << "," << Num(f.v1_attacked_exact)
        << "," << Num(f.v1_untriggered_exact) << ","
        << p.run.result.history.size() << ","
        << (p.run.result.stopped_early ? 1 : 0) << "\n";
  }
}

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.passed; });
}

std::string VerifyReport::ToString() const {
  std::ostringstream out;
  for (const CheckResult& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name << " measured=" << Num(c.measured);
    if (!c.detail.empty()) {
      std::string detail = c.detail;
      while (!detail.empty() && detail.back() == '\n') detail.pop_back();
      std::replace(detail.begin(), detail.end(), '\n', ';');
      out << " " << detail;
    }
    out << "\n";
  }
  out << (passed() ? "all checks passed" : "verification FAILED") << "\n";
  return out.str();
}

VerifyReport RunVerify(const ExperimentConfig& config,
                       const std::string& out_dir) {
  constexpr double kEquivalenceTol = 1e-8;
  constexpr double kGradientTol = 1e-5;
  constexpr double kZeroSumTol = 1e-10;
  constexpr double kResidualTol = 1e-8;

  VerifyReport report;
  const Experiment experiment = BuildExperiment(config);
  const AttackModel& model = *experiment.model;
  Rng rng(DeriveSeed(config.train.seed, 0));

  {
    ValidationReport mdp_report = ValidateMdp(model.mdp);
    for (std::size_t k = 1; k < model.perturbations.kernels.size(); ++k) {
      Mdp perturbed = model.mdp;
      perturbed.transition = model.perturbations.kernels[k];
      for (Violation v : ValidateMdp(perturbed).violations) {
        v.mode = static_cast<int>(k);
        mdp_report.violations.push_back(std::move(v));
      }
    }
    for (const Violation& v : model.emission.Validate().violations) {
      mdp_report.violations.push_back(v);
    }
    report.checks.push_back(Check("model_valid", mdp_report.ok(),
                                  static_cast<double>(mdp_report.violations.size()),
                                  mdp_report.ok() ? "" : mdp_report.ToString()));
  }

  const RectangularityReport rect = CheckDRectangular(model.perturbations);
  {
    std::ostringstream detail;
    detail << "budget=" << Num(model.perturbations.budget);
    if (!rect.ok()) detail << " " << rect.ToString();
    report.checks.push_back(
        Check("d_rectangular", rect.ok(), rect.max_deviation, detail.str()));
  }
  if (!report.checks.front().passed) {
    // Exact solves need stochastic kernels; stop here.
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      std::ofstream out = OpenOutput(fs::path(out_dir) / "verify_report.txt");
      out << report.ToString();
    }
    return report;
  }

  {
    RandomInstanceOptions options;
    double worst = 0.0;
    constexpr int kInstances = 25;
    for (int i = 0; i < kInstances; ++i) {
      const AttackModel inst = RandomAttackModel(options, rng);
      const AugmentedGame game = BuildAugmentedGame(
          inst.mdp, inst.perturbations, inst.emission, inst.memory);
      const SoftmaxPolicy backdoor = RandomSoftmaxPolicy(
          inst.mdp.n_states(), inst.mdp.n_actions(), 2.0, rng);
      const SoftmaxPolicy trig = RandomSoftmaxPolicy(
          inst.memory.size(), inst.perturbations.num_modes(), 2.0, rng);
      const TriggerAutomaton trigger{inst.memory, trig};
      for (RewardSelector which : {RewardSelector::kVictim, RewardSelector::kAttacker}) {
        const double joint =
            EvaluateJointExact(game, JointPolicy::FromPolicies(backdoor, trig), which)
                .scalar_value;
        const double direct = EvaluateBackdoorDirect(inst.mdp, inst.perturbations,
                                                     inst.emission, trigger,
                                                     backdoor, which)
                                  .scalar_value;
        worst = std::max(worst, std::abs(joint - direct));
      }
    }
    report.checks.push_back(Check("equivalence_random", worst <= kEquivalenceTol,
                                  worst,
                                  std::to_string(kInstances) + " instances"));
  }

  const AugmentedGame game = BuildAugmentedGame(
      model.mdp, model.perturbations, model.emission, model.memory);
  {
    const ValidationReport game_report = ValidateGame(game, &model.mdp);
    report.checks.push_back(Check("game_valid", game_report.ok(),
                                  static_cast<double>(game_report.violations.size()),
                                  game_report.ok() ? "" : game_report.ToString()));
  }

  {
    double worst_equiv = 0.0;
    double worst_residual = 0.0;
    double worst_zero_sum = 0.0;
    const bool zero_sum = IsZeroSum(model.mdp);
    for (int i = 0; i < 3; ++i) {
      const SoftmaxPolicy backdoor = RandomSoftmaxPolicy(
          model.mdp.n_states(), model.mdp.n_actions(), 2.0, rng);
      const SoftmaxPolicy trig = RandomSoftmaxPolicy(
          model.memory.size(), model.perturbations.num_modes(), 2.0, rng);
      const TriggerAutomaton trigger{model.memory, trig};
      const JointValues joint =
          EvaluateJointExactBoth(game, JointPolicy::FromPolicies(backdoor, trig));
      for (RewardSelector which : {RewardSelector::kVictim, RewardSelector::kAttacker}) {
        const ValueResult& j =
            which == RewardSelector::kVictim ? joint.victim : joint.attacker;
        const ValueResult direct = EvaluateBackdoorDirect(
            model.mdp, model.perturbations, model.emission, trigger, backdoor, which);
        worst_equiv = std::max(worst_equiv, std::abs(j.scalar_value - direct.scalar_value));
        worst_residual = std::max({worst_residual, j.residual, direct.residual});
      }
      const ValueResult nominal =
          PolicyValueExact(model.mdp, backdoor, RewardSelector::kVictim);
      const ValueResult nominal_attacker =
          PolicyValueExact(model.mdp, backdoor, RewardSelector::kAttacker);
      worst_residual = std::max({worst_residual, nominal.residual,
                                 nominal_attacker.residual});
      if (zero_sum) {
        worst_zero_sum = std::max(
            {worst_zero_sum,
             (joint.victim.state_values + joint.attacker.state_values)
                 .cwiseAbs()
                 .maxCoeff(),
             (nominal.state_values + nominal_attacker.state_values)
                 .cwiseAbs()
                 .maxCoeff()});
      }
    }
    report.checks.push_back(Check("equivalence_configured",
                                  worst_equiv <= kEquivalenceTol, worst_equiv,
                                  "3 random policy pairs"));
    report.checks.push_back(Check("solve_residuals", worst_residual <= kResidualTol,
                                  worst_residual, ""));
    if (zero_sum) {
      report.checks.push_back(Check("zero_sum_identity",
                                    worst_zero_sum <= kZeroSumTol, worst_zero_sum,
                                    ""));
    } else {
      report.checks.push_back(
          Check("zero_sum_identity", true, 0.0, "skipped: rewards are not zero-sum"));
    }
  }

  {
    RandomInstanceOptions options;
    options.max_states = 3;
    options.max_actions = 2;
    options.max_obs = 2;
    options.max_perturbed = 1;
    options.max_memory_bound = 1;
    double worst = 0.0;
    constexpr int kInstances = 4;
    constexpr int kHorizon = 3;
    for (int i = 0; i < kInstances; ++i) {
      const AttackModel inst = RandomAttackModel(options, rng);
      const SoftmaxPolicy backdoor = RandomSoftmaxPolicy(
          inst.mdp.n_states(), inst.mdp.n_actions(), 1.0, rng);
      const SoftmaxPolicy trig = RandomSoftmaxPolicy(
          inst.memory.size(), inst.perturbations.num_modes(), 1.0, rng);
      worst = std::max(worst,
                       CheckGradients(inst, backdoor, trig, kHorizon).max_abs_error());
    }
    report.checks.push_back(Check("gradient_enumeration", worst <= kGradientTol,
                                  worst,
                                  std::to_string(kInstances) +
                                      " instances, horizon " +
                                      std::to_string(kHorizon)));
  }

  {
    const OptimalSolution opt = OptimalValue(model.mdp);
    double worst_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 100; ++i) {
      const SoftmaxPolicy policy = RandomSoftmaxPolicy(
          model.mdp.n_states(), model.mdp.n_actions(), 3.0, rng);
      const double v =
          PolicyValueExact(model.mdp, policy, RewardSelector::kVictim).scalar_value;
      worst_gap = std::min(worst_gap, opt.value.scalar_value - v);
    }
    report.checks.push_back(Check("optimal_dominance", worst_gap >= -1e-9,
                                  worst_gap, "min V* - V(pi) over 100 policies"));
  }

  {
    bool ok = model.memory.has_words();
    int mismatches = 0;
    const int bound = config.memory_bound;
    for (int trial = 0; ok && trial < 50; ++trial) {
      std::vector<int> obs(static_cast<std::size_t>(bound + 5));
      for (int& o : obs) {
        o = std::min(model.emission.n_obs() - 1,
                     static_cast<int>(rng.Uniform() * model.emission.n_obs()));
      }
      const int q = model.memory.Run(obs);
      const std::vector<int> expected(obs.end() - bound, obs.end());
      if (model.memory.Word(q) != expected) ++mismatches;
    }
    report.checks.push_back(Check("suffix_replay", ok && mismatches == 0, mismatches,
                                  "50 random observation strings"));
  }

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream out = OpenOutput(fs::path(out_dir) / "verify_report.txt");
    out << report.ToString();
  }
  return report;
}

}  // namespace bdplan::harness
