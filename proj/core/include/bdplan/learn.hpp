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

#ifndef BDPLAN_LEARN_HPP_
#define BDPLAN_LEARN_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bdplan/augmented_game.hpp"
#include "bdplan/mdp.hpp"
#include "bdplan/policy.hpp"
#include "bdplan/trigger.hpp"

namespace bdplan {

// Everything the attacker plans against: the nominal MDP (with both reward
// tables), the kernels the trigger may switch to, the attacker's
// observation model and the trigger memory.
struct AttackModel {
  Mdp mdp;
  PerturbationSet perturbations;
  Emission emission;
  MemoryAutomaton memory;
};

// ---------------------------------------------------------------------------
// REINFORCE

struct Decision {
  int row;
  int col;
};

// One sampled trajectory reduced to the decisions of a single parameter
// block and the return it earned.
struct ScoredEpisode {
  std::vector<Decision> decisions;
  double discounted_return = 0.0;
  // Sampling weight; 1 for Monte-Carlo batches, the trajectory probability
  // for exhaustive enumeration.
  double weight = 1.0;
};

enum class BaselineMode { kNone, kBatchMean, kConstant };

struct GradientOptions {
  BaselineMode baseline = BaselineMode::kBatchMean;
  double constant_baseline = 0.0;
  // Weight the score of step t by discount^t instead of 1.
  bool discount_scores = false;
  double discount = 1.0;
};

// sum_i w_i [sum_t c_t grad log pi(col_t | row_t)] (R_i - b) / sum_i w_i.
// Throws std::invalid_argument on an empty batch.
Eigen::MatrixXd ReinforceGradient(std::span<const ScoredEpisode> episodes,
                                  const SoftmaxPolicy& policy,
                                  const GradientOptions& options);

enum class ParamBlock { kBackdoor, kTrigger };

ScoredEpisode EpisodeFromTrajectory(const MdpTrajectory& trajectory,
                                    double discount, RewardSelector which);
// kBackdoor scores the (state, action) pairs, kTrigger the (memory, mode)
// pairs.
ScoredEpisode EpisodeFromTrajectory(const AugTrajectory& trajectory,
                                    double discount, RewardSelector which,
                                    ParamBlock block);

// ---------------------------------------------------------------------------
// Switching gradient

struct LearningRate {
  double initial = 1.0;
  double decay = 0.0;
  // initial / (1 + decay * t)
  double At(int t) const { return initial / (1.0 + decay * t); }
};

struct TrainConfig {
  double epsilon = 0.2;
  int batch_size = 200;
  int horizon = 1500;
  int max_iters = 2000;
  LearningRate lr_backdoor{1.0, 0.0};
  LearningRate lr_trigger{0.2, 0.0};
  double stop_threshold = 1e-4;
  bool baseline = true;
  bool discount_scores = false;
  bool stop_at_absorbing = true;
  // Log exact values every iteration; Monte-Carlo estimates always drive
  // the branch decision.
  bool exact_metrics = true;
  std::uint64_t seed = 0;

  // Empty when valid, otherwise names the first offending field.
  std::string Validate() const;
};

struct TrainState {
  SoftmaxPolicy backdoor;
  SoftmaxPolicy trigger;
  // (1 - epsilon) * V0*(M), fixed for the run.
  double threshold = 0.0;
  int iteration = 0;
  double last_dtheta0 = 0.0;
  double last_dtheta1 = 0.0;
};

enum class Branch { kRepair, kAttack };
const char* BranchName(Branch branch);

struct IterationMetrics {
  int iter = 0;
  Branch branch = Branch::kRepair;
  double v0_original_mc = 0.0;
  double v0_original_exact = 0.0;
  double v0_attacked_exact = 0.0;
  double v1_attacked_exact = 0.0;
  bool constraint_satisfied = false;
  double dtheta0 = 0.0;
  double dtheta1 = 0.0;
};

class TrainingDivergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exact (linear-solve) evaluation of a backdoor strategy on a fixed attack
// model. Owns the explicit product game.
class ExactEvaluator {
 public:
  explicit ExactEvaluator(const AttackModel& model);

  const AugmentedGame& game() const { return game_; }

  // V0(theta0, M): victim value in the nominal MDP.
  double NominalVictimValue(const SoftmaxPolicy& backdoor) const;
  // V0 and V1 with the trigger active.
  JointValues Attacked(const SoftmaxPolicy& backdoor,
                       const SoftmaxPolicy& trigger) const;
  // Attacker value when the trigger always picks the nominal kernel.
  double UntriggeredAttackerValue(const SoftmaxPolicy& backdoor) const;

 private:
  const AttackModel& model_;
  AugmentedGame game_;
};

// theta0 = theta1 = 0 and b = (1 - epsilon) * optimal_value.
TrainState InitTrainState(const AttackModel& model, double optimal_value,
                          const TrainConfig& config);

// One iteration: samples batch_size nominal trajectories under theta0 and
// batch_size triggered trajectories under (theta0, theta1). If the nominal
// estimate is below the threshold, ascends V0 in theta0 alone; otherwise
// ascends V1 in both blocks. `evaluator` may be null when
// config.exact_metrics is false.
IterationMetrics TrainStep(TrainState& state, const TrainConfig& config,
                           const AttackModel& model,
                           const ExactEvaluator* evaluator);

struct FinalEvaluation {
  double v0_original_exact = 0.0;
  double v0_attacked_exact = 0.0;
  double v1_attacked_exact = 0.0;
  double v1_untriggered_exact = 0.0;
  double v0_residual = 0.0;
  double attacked_residual = 0.0;
};

struct TrainResult {
  SoftmaxPolicy backdoor;
  SoftmaxPolicy trigger;
  double optimal_value = 0.0;
  double threshold = 0.0;
  std::vector<IterationMetrics> history;
  bool stopped_early = false;
  FinalEvaluation final;
};

// Called after every iteration with the post-update state.
using TrainObserver =
    std::function<void(const IterationMetrics&, const TrainState&)>;

// Runs TrainStep up to max_iters times, or until both parameter updates have
// norm <= stop_threshold. `optimal_value` is V0*(M).
TrainResult Train(const AttackModel& model, const TrainConfig& config,
                  double optimal_value, const TrainObserver& observer = {});

FinalEvaluation EvaluateFinal(const AttackModel& model,
                              const ExactEvaluator& evaluator,
                              const SoftmaxPolicy& backdoor,
                              const SoftmaxPolicy& trigger);

}  // namespace bdplan

#endif  // BDPLAN_LEARN_HPP_
