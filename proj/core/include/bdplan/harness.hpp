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

#ifndef BDPLAN_HARNESS_HPP_
#define BDPLAN_HARNESS_HPP_

#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bdplan/config.hpp"
#include "bdplan/gridworld.hpp"
#include "bdplan/learn.hpp"
#include "bdplan/mdp.hpp"
#include "bdplan/trigger.hpp"

namespace bdplan::harness {

const char* VersionString();

enum class RewardPreset { kZeroSum, kNonZeroSum, kCustom };
enum class OptimalValueMethod { kValueIteration, kQLearning };

struct QLearningOptions {
  int episodes = 20000;
  int episode_length = 200;
  double learning_rate = 0.1;
  double exploration = 0.1;
};

struct ExperimentConfig {
  // Empty selects the built-in default layout.
  std::string layout_path;
  RewardPreset reward_preset = RewardPreset::kZeroSum;
  gridworld::Payoffs victim = gridworld::VictimPayoffs();
  // Used only with the custom preset.
  gridworld::Payoffs attacker = gridworld::ZeroSumAttacker(gridworld::VictimPayoffs());
  double slip = 0.1;
  double discount = 0.99;
  double p_obs = 0.8;
  // When set, alphas = {max(slip - delta, 0), slip + delta}.
  std::optional<double> delta;
  std::vector<double> alphas = {0.0, 0.3};
  // Extra perturbed kernels appended after the slip kernels.
  std::vector<std::string> extra_kernel_files;
  // Declared budget d; defaults to the realized kernel distance.
  std::optional<double> kernel_budget;
  int memory_bound = 1;
  std::size_t memory_capacity = 1000000;
  OptimalValueMethod optimal_value_method = OptimalValueMethod::kValueIteration;
  QLearningOptions q_learning;
  TrainConfig train;

  // Slip values for the perturbed kernels.
  std::vector<double> EffectiveAlphas() const;
};

// Throws ConfigError naming the offending key. Relative paths resolve
// against `base_dir`.
ExperimentConfig ParseExperimentConfig(const KeyValueConfig& kv,
                                       const std::string& base_dir);
ExperimentConfig LoadExperimentConfig(const std::string& path);

// key = value lines that reproduce the configuration.
void WriteConfig(std::ostream& out, const ExperimentConfig& config);

// Flat text matrix: a "rows cols" header line, then one row per line.
void WriteMatrix(std::ostream& out, const Eigen::MatrixXd& matrix);
Eigen::MatrixXd ReadMatrix(std::istream& in, const std::string& what);

// Kernel file: a (S*A) x S matrix, row s*A + a.
Kernel LoadKernel(const std::string& path, int n_states, int n_actions);

// The attack model is heap-allocated so evaluators holding references stay
// valid when the experiment is moved.
struct Experiment {
  gridworld::GridSpec spec;
  std::unique_ptr<AttackModel> model;
};
Experiment BuildExperiment(const ExperimentConfig& config);

// Tabular Q-learning on the simulator; returns the exact value of the
// greedy policy it learns.
double QLearningOptimalValue(const Mdp& mdp, const QLearningOptions& options,
                             std::uint64_t seed);
double ComputeOptimalValue(const Mdp& mdp, const ExperimentConfig& config);

inline constexpr const char* kMetricsHeader =
    "iter,branch,v0_original_mc,v0_original_exact,v0_attacked_exact,"
    "v1_attacked_exact,constraint_satisfied,dtheta0,dtheta1";

void WriteMetricsHeader(std::ostream& out);
void WriteMetricsRow(std::ostream& out, const IterationMetrics& metrics);

struct TrainRun {
  double optimal_value = 0.0;
  RectangularityReport rectangularity;
  TrainResult result;
};

// Trains and writes metrics.csv, theta0.txt, theta1.txt and metadata.txt
// into `out_dir` (created if missing). An empty `out_dir` writes nothing.
TrainRun RunTrain(const ExperimentConfig& config, const std::string& out_dir,
                  const TrainObserver& observer = {});

enum class SweepVariable { kEpsilon, kDelta };
SweepVariable ParseSweepVariable(const std::string& name);
const char* SweepVariableName(SweepVariable var);

struct SweepPoint {
  double value = 0.0;
  std::uint64_t seed = 0;
  TrainRun run;
};

// One training run per value with seed DeriveSeed(config seed, index). Each
// run writes into `out_dir`/<var>_<index>/ and the final values go to
// `out_dir`/summary.csv.
std::vector<SweepPoint> RunSweep(const ExperimentConfig& config,
                                 SweepVariable var,
                                 const std::vector<double>& values,
                                 const std::string& out_dir);

void WriteSweepSummary(std::ostream& out, SweepVariable var,
                       const std::vector<SweepPoint>& points);

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool passed() const;
  std::string ToString() const;
};

// Structural checks on the configured instance plus randomized instances.
// Failures are report content, never exceptions. Writes
// verify_report.txt when `out_dir` is non-empty.
VerifyReport RunVerify(const ExperimentConfig& config,
                       const std::string& out_dir);

}  // namespace bdplan::harness

#endif  // BDPLAN_HARNESS_HPP_
