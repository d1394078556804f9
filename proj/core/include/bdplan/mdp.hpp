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

#ifndef BDPLAN_MDP_HPP_
#define BDPLAN_MDP_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bdplan/policy.hpp"

namespace bdplan {

inline constexpr double kStochasticTolerance = 1e-9;

enum class RewardSelector { kVictim, kAttacker };

// Dense transition kernel P(s' | s, a). Rows (s, a) are stored contiguously.
class Kernel {
 public:
  Kernel() = default;
  Kernel(int n_states, int n_actions);

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }

  double operator()(int s, int a, int next) const {
    return p_[Offset(s, a) + next];
  }
  double& operator()(int s, int a, int next) { return p_[Offset(s, a) + next]; }

  std::span<const double> Row(int s, int a) const {
    return {p_.data() + Offset(s, a), static_cast<std::size_t>(n_states_)};
  }
  std::span<double> Row(int s, int a) {
    return {p_.data() + Offset(s, a), static_cast<std::size_t>(n_states_)};
  }

  bool SameShape(const Kernel& other) const {
    return n_states_ == other.n_states_ && n_actions_ == other.n_actions_;
  }

 private:
  std::size_t Offset(int s, int a) const {
    return (static_cast<std::size_t>(s) * n_actions_ + a) * n_states_;
  }

  int n_states_ = 0;
  int n_actions_ = 0;
  std::vector<double> p_;
};

// A finite discounted MDP carrying both the victim reward r and the
// attacker reward r1.
struct Mdp {
  Kernel transition;
  Eigen::MatrixXd reward_victim;    // n_states x n_actions
  Eigen::MatrixXd reward_attacker;  // n_states x n_actions
  Eigen::VectorXd initial_dist;
  double discount = 0.99;

  int n_states() const { return transition.n_states(); }
  int n_actions() const { return transition.n_actions(); }

  const Eigen::MatrixXd& reward(RewardSelector which) const {
    return which == RewardSelector::kVictim ? reward_victim : reward_attacker;
  }

  // True when s loops to itself under every action and pays nothing to
  // either player.
  bool IsAbsorbingZeroReward(int s) const;
};

struct Violation {
  enum class Kind {
    kShape,
    kDiscount,
    kEntryRange,
    kRowSum,
    kInitialEntry,
    kInitialSum,
    kSupport,
    kBudget,
  };
  Kind kind;
  // Indices are -1 when not applicable.
  int state = -1;
  int action = -1;
  int next_state = -1;
  int mode = -1;
  double value = 0.0;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string ToString() const;
};

ValidationReport ValidateMdp(const Mdp& mdp);

// Throws std::invalid_argument carrying the report text when the MDP is not
// valid.
void RequireValid(const Mdp& mdp);

struct ValueResult {
  Eigen::VectorXd state_values;
  // Weighted by the initial distribution of the evaluated model.
  double scalar_value = 0.0;
  // Max-norm residual of the Bellman system that produced state_values.
  double residual = 0.0;
};

// Exact evaluation by a direct sparse solve of (I - gamma P_pi) v = r_pi.
ValueResult PolicyValueExact(const Mdp& mdp, const SoftmaxPolicy& policy,
                             RewardSelector which);

struct OptimalSolution {
  ValueResult value;
  Eigen::VectorXi greedy_action;
  int iterations = 0;
};

// Value iteration on the victim reward until the Bellman residual drops
// below `tolerance`.
OptimalSolution OptimalValue(const Mdp& mdp, double tolerance = 1e-9,
                             int max_iterations = 1000000);

struct MdpStep {
  int state;
  int action;
  double reward_victim;
  double reward_attacker;
};
using MdpTrajectory = std::vector<MdpStep>;

struct SampleOptions {
  int horizon = 1500;
  // Cut the trajectory on entering an absorbing zero-reward state. All
  // later rewards are zero, so returns are unchanged.
  bool stop_at_absorbing = false;
};

// s0 ~ mu0, a_t ~ pi(.|s_t), s_{t+1} ~ P(.|s_t, a_t). Exactly `horizon` steps
// unless options.stop_at_absorbing cuts it short.
MdpTrajectory SampleTrajectoryMdp(const Mdp& mdp, const SoftmaxPolicy& policy,
                                  const SampleOptions& options,
                                  std::uint64_t seed);

inline MdpTrajectory SampleTrajectoryMdp(const Mdp& mdp,
                                         const SoftmaxPolicy& policy,
                                         int horizon, std::uint64_t seed) {
  return SampleTrajectoryMdp(mdp, policy, SampleOptions{horizon, false}, seed);
}

double DiscountedReturn(const MdpTrajectory& trajectory, double discount,
                        RewardSelector which);

}  // namespace bdplan

#endif  // BDPLAN_MDP_HPP_
