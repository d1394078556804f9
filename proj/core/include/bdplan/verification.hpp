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

#ifndef BDPLAN_VERIFICATION_HPP_
#define BDPLAN_VERIFICATION_HPP_

#include <vector>

#include <Eigen/Dense>

#include "bdplan/augmented_game.hpp"
#include "bdplan/learn.hpp"
#include "bdplan/mdp.hpp"
#include "bdplan/policy.hpp"
#include "bdplan/rng.hpp"

namespace bdplan {

// Size limits for RandomAttackModel; each dimension is drawn uniformly from
// [min, max].
struct RandomInstanceOptions {
  int min_states = 2;
  int max_states = 6;
  int max_actions = 3;
  int max_obs = 3;
  int max_perturbed = 2;
  int max_memory_bound = 2;
  double min_discount = 0.5;
  double max_discount = 0.95;
};

// Dense random kernels, emission and rewards. Perturbed kernels are convex
// mixtures of P0 with a fresh random kernel, so supports always nest; the
// budget is set to the realized distance.
AttackModel RandomAttackModel(const RandomInstanceOptions& options, Rng& rng);

// Softmax parameters drawn uniformly from [-scale, scale].
SoftmaxPolicy RandomSoftmaxPolicy(int rows, int cols, double scale, Rng& rng);

// sum_{t < horizon} gamma^t E[r_t] by forward propagation of the state
// distribution.
double TruncatedValue(const Mdp& mdp, const Eigen::MatrixXd& policy,
                      int horizon, RewardSelector which);
double TruncatedValue(const AugmentedGame& game, const JointPolicy& policy,
                      int horizon, RewardSelector which);

// Every length-`horizon` trajectory with its exact probability as the
// episode weight. Feeding these to ReinforceGradient gives the exact
// gradient of the truncated value.
std::vector<ScoredEpisode> EnumerateNominal(const Mdp& mdp,
                                            const SoftmaxPolicy& policy,
                                            int horizon, RewardSelector which);
// Enumerates the backdoor process itself (state, observation, memory, action,
// mode), without going through the product game.
std::vector<ScoredEpisode> EnumerateAttacked(const AttackModel& model,
                                             const SoftmaxPolicy& backdoor,
                                             const SoftmaxPolicy& trigger,
                                             int horizon, RewardSelector which,
                                             ParamBlock block);

struct GradientCheck {
  double max_abs_error = 0.0;
  int entries = 0;
};

// Compares enumerated REINFORCE gradients with central differences of
// TruncatedValue for the nominal victim objective (theta0) and the attacked
// attacker objective (theta0 and theta1).
struct GradientCheckResult {
  GradientCheck nominal_backdoor;
  GradientCheck attacked_backdoor;
  GradientCheck attacked_trigger;

  double max_abs_error() const;
};

GradientCheckResult CheckGradients(const AttackModel& model,
                                   const SoftmaxPolicy& backdoor,
                                   const SoftmaxPolicy& trigger, int horizon,
                                   double step = 1e-5);

}  // namespace bdplan

#endif  // BDPLAN_VERIFICATION_HPP_
