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

#ifndef BDPLAN_AUGMENTED_GAME_HPP_
#define BDPLAN_AUGMENTED_GAME_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "bdplan/mdp.hpp"
#include "bdplan/policy.hpp"
#include "bdplan/trigger.hpp"

namespace bdplan {

// Product game over S x Q with joint actions A x K. Product state
// x = (s, q) is flattened as s * n_memory + q, joint action u = (a, k) as
// a * n_modes + k.
struct AugmentedGame {
  using RowMajorSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  int n_states = 0;
  int n_memory = 0;
  int n_actions = 0;
  int n_modes = 0;
  double discount = 0.0;

  // Row x * n_joint_actions() + u holds T(. | x, u) over product states.
  RowMajorSparse transition;
  Eigen::VectorXd initial_dist;     // over product states
  Eigen::MatrixXd reward_victim;    // product states x joint actions
  Eigen::MatrixXd reward_attacker;  // product states x joint actions

  int n_product_states() const { return n_states * n_memory; }
  int n_joint_actions() const { return n_actions * n_modes; }
  int StateIndex(int s, int q) const { return s * n_memory + q; }
  int ActionIndex(int a, int k) const { return a * n_modes + k; }
  int TransitionRow(int x, int u) const { return x * n_joint_actions() + u; }

  const Eigen::MatrixXd& reward(RewardSelector which) const {
    return which == RewardSelector::kVictim ? reward_victim : reward_attacker;
  }
};

// T((s',q') | (s,q),(a,k)) = sum over o with next(q,o) = q' of
//   E(o|s') P_k(s'|s,a),
// mu0_hat(s,q) = sum over o with next(q0,o) = q of mu0(s) E(o|s),
// and both reward tables lifted from the MDP (independent of q and k).
AugmentedGame BuildAugmentedGame(const Mdp& mdp, const PerturbationSet& pset,
                                 const Emission& emission,
                                 const MemoryAutomaton& memory);

// Row sums of T, mass of the initial distribution and the lifting of the
// rewards.
ValidationReport ValidateGame(const AugmentedGame& game,
                              const Mdp* source = nullptr);

// Factored joint policy pi((a,k) | (s,q)) = backdoor(a|s) * trigger(k|q),
// held as probability tables.
struct JointPolicy {
  Eigen::MatrixXd backdoor;  // n_states x n_actions
  Eigen::MatrixXd trigger;   // n_memory x n_modes

  static JointPolicy FromPolicies(const SoftmaxPolicy& backdoor,
                                  const SoftmaxPolicy& trigger) {
    return {backdoor.Probs(), trigger.Probs()};
  }

  double Prob(int s, int q, int a, int k) const {
    return backdoor(s, a) * trigger(q, k);
  }
};

ValueResult EvaluateJointExact(const AugmentedGame& game,
                               const JointPolicy& policy, RewardSelector which);

struct JointValues {
  ValueResult victim;
  ValueResult attacker;
};

// Both players' values from a single factorization of the induced chain.
JointValues EvaluateJointExactBoth(const AugmentedGame& game,
                                   const JointPolicy& policy);

// Evaluates the trigger-induced backdoor process directly: over (s, q) the
// next state is drawn from sum_k trigger(k|q) P_k(.|s,a) with a ~ backdoor,
// and the memory moves on the observation of the state just entered. Never
// touches an AugmentedGame. `mode_probs` is n_memory x n_modes.
ValueResult EvaluateBackdoorDirect(const Mdp& mdp, const PerturbationSet& pset,
                                   const Emission& emission,
                                   const MemoryAutomaton& memory,
                                   const Eigen::MatrixXd& mode_probs,
                                   const Eigen::MatrixXd& backdoor_probs,
                                   RewardSelector which);

ValueResult EvaluateBackdoorDirect(const Mdp& mdp, const PerturbationSet& pset,
                                   const Emission& emission,
                                   const TriggerAutomaton& trigger,
                                   const SoftmaxPolicy& backdoor,
                                   RewardSelector which);

struct AugStep {
  int state;
  int memory;
  int action;
  int mode;
  // Observation that moved the memory into `memory`.
  int observation;
  double reward_victim;
  double reward_attacker;
};
using AugTrajectory = std::vector<AugStep>;

// Blackbox simulation of the triggered system: s0 ~ mu0, o ~ E(.|s) on
// every entered state, q <- next(q, o), a ~ backdoor(.|s),
// k ~ trigger(.|q), s' ~ P_k(.|s,a).
AugTrajectory SampleTrajectoryAug(const Mdp& mdp, const PerturbationSet& pset,
                                  const Emission& emission,
                                  const TriggerAutomaton& trigger,
                                  const SoftmaxPolicy& backdoor,
                                  const SampleOptions& options,
                                  std::uint64_t seed);

double DiscountedReturn(const AugTrajectory& trajectory, double discount,
                        RewardSelector which);

}  // namespace bdplan

#endif  // BDPLAN_AUGMENTED_GAME_HPP_
