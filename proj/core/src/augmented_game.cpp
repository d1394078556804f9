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

#include "bdplan/augmented_game.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "bdplan/chain.hpp"
#include "bdplan/rng.hpp"

namespace bdplan {

namespace {

void CheckDimensions(const Mdp& mdp, const PerturbationSet& pset,
                     const Emission& emission, const MemoryAutomaton& memory) {
  std::ostringstream err;
  if (pset.kernels.empty()) err << "perturbation set has no kernels; ";
  for (std::size_t k = 0; k < pset.kernels.size(); ++k) {
    if (!pset.kernels[k].SameShape(mdp.transition)) {
      err << "kernel " << k << " shape differs from the MDP; ";
    }
  }
  if (emission.n_states() != mdp.n_states()) {
    err << "emission has " << emission.n_states() << " states, MDP has "
        << mdp.n_states() << "; ";
  }
  if (memory.n_obs() != emission.n_obs()) {
    err << "memory reads " << memory.n_obs() << " symbols, emission emits "
        << emission.n_obs() << "; ";
  }
  if (!pset.kernels.empty() && pset.kernels[0].SameShape(mdp.transition) &&
      KernelDistance(pset.kernels[0], mdp.transition) > 1e-12) {
    err << "kernel 0 is not the MDP's nominal kernel; ";
  }
  const std::string msg = err.str();
  if (!msg.empty()) throw std::invalid_argument("dimension mismatch: " + msg);
}

ValueResult SolveChain(SparseMatrix transition, const Eigen::VectorXd& reward,
                       const Eigen::VectorXd& initial, double discount) {
  const DiscountedChain chain(std::move(transition), discount);
  ValueResult result;
  result.state_values = chain.Solve(reward);
  result.residual = chain.Residual(result.state_values, reward);
  result.scalar_value = initial.dot(result.state_values);
  return result;
}

SparseMatrix InducedChain(const AugmentedGame& game, const JointPolicy& policy) {
  const int nx = game.n_product_states();
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(game.transition.nonZeros()));
  for (int s = 0; s < game.n_states; ++s) {
    for (int q = 0; q < game.n_memory; ++q) {
      const int x = game.StateIndex(s, q);
      for (int a = 0; a < game.n_actions; ++a) {
        for (int k = 0; k < game.n_modes; ++k) {
          const double w = policy.Prob(s, q, a, k);
          if (w == 0.0) continue;
          const int row = game.TransitionRow(x, game.ActionIndex(a, k));
          for (AugmentedGame::RowMajorSparse::InnerIterator it(game.transition, row);
               it; ++it) {
            entries.emplace_back(x, static_cast<int>(it.col()), w * it.value());
          }
        }
      }
    }
  }
  SparseMatrix p(nx, nx);
  p.setFromTriplets(entries.begin(), entries.end());
  return p;
}

Eigen::VectorXd InducedReward(const AugmentedGame& game,
                              const JointPolicy& policy, RewardSelector which) {
  const Eigen::MatrixXd& reward = game.reward(which);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(game.n_product_states());
  for (int s = 0; s < game.n_states; ++s) {
    for (int q = 0; q < game.n_memory; ++q) {
      const int x = game.StateIndex(s, q);
      double acc = 0.0;
      for (int a = 0; a < game.n_actions; ++a) {
        for (int k = 0; k < game.n_modes; ++k) {
          acc += policy.Prob(s, q, a, k) * reward(x, game.ActionIndex(a, k));
        }
      }
      r(x) = acc;
    }
  }
  return r;
}

void CheckJointShape(const AugmentedGame& game, const JointPolicy& policy) {
  if (policy.backdoor.rows() != game.n_states ||
      policy.backdoor.cols() != game.n_actions ||
      policy.trigger.rows() != game.n_memory ||
      policy.trigger.cols() != game.n_modes) {
    throw std::invalid_argument("joint policy shape does not match the game");
  }
}

bool AbsorbingUnderAllModes(const Mdp& mdp, const PerturbationSet& pset, int s) {
  if (!mdp.IsAbsorbingZeroReward(s)) return false;
  for (const Kernel& kernel : pset.kernels) {
    for (int a = 0; a < mdp.n_actions(); ++a) {
      if (kernel(s, a, s) != 1.0) return false;
    }
  }
  return true;
}

}  // namespace

AugmentedGame BuildAugmentedGame(const Mdp& mdp, const PerturbationSet& pset,
                                 const Emission& emission,
                                 const MemoryAutomaton& memory) {
  CheckDimensions(mdp, pset, emission, memory);
  AugmentedGame game;
  game.n_states = mdp.n_states();
  game.n_memory = memory.size();
  game.n_actions = mdp.n_actions();
  game.n_modes = pset.num_modes();
  game.discount = mdp.discount;

  const int nx = game.n_product_states();
  const int nu = game.n_joint_actions();
  const int n_obs = emission.n_obs();

  std::vector<Eigen::Triplet<double>> entries;
  for (int s = 0; s < game.n_states; ++s) {
    for (int q = 0; q < game.n_memory; ++q) {
      const int x = game.StateIndex(s, q);
      for (int a = 0; a < game.n_actions; ++a) {
        for (int k = 0; k < game.n_modes; ++k) {
          const int row = game.TransitionRow(x, game.ActionIndex(a, k));
          const Kernel& kernel = pset.kernels[k];
          for (int next = 0; next < game.n_states; ++next) {
            const double p = kernel(s, a, next);
            if (p == 0.0) continue;
            for (int o = 0; o < n_obs; ++o) {
              const double e = emission.prob(next, o);
              if (e == 0.0) continue;
              entries.emplace_back(row, game.StateIndex(next, memory.Next(q, o)),
                                   e * p);
            }
          }
        }
      }
    }
  }
  game.transition.resize(static_cast<Eigen::Index>(nx) * nu, nx);
  game.transition.setFromTriplets(entries.begin(), entries.end());
  game.transition.makeCompressed();

  game.initial_dist = Eigen::VectorXd::Zero(nx);
  for (int s = 0; s < game.n_states; ++s) {
    for (int o = 0; o < n_obs; ++o) {
      const int q = memory.Next(memory.initial(), o);
      game.initial_dist(game.StateIndex(s, q)) +=
          mdp.initial_dist(s) * emission.prob(s, o);
    }
  }

  game.reward_victim.resize(nx, nu);
  game.reward_attacker.resize(nx, nu);
  for (int s = 0; s < game.n_states; ++s) {
    for (int q = 0; q < game.n_memory; ++q) {
      for (int a = 0; a < game.n_actions; ++a) {
        for (int k = 0; k < game.n_modes; ++k) {
          const int x = game.StateIndex(s, q);
          const int u = game.ActionIndex(a, k);
          game.reward_victim(x, u) = mdp.reward_victim(s, a);
          game.reward_attacker(x, u) = mdp.reward_attacker(s, a);
        }
      }
    }
  }
  return game;
}

ValidationReport ValidateGame(const AugmentedGame& game, const Mdp* source) {
  ValidationReport report;
  const int nx = game.n_product_states();
  const int nu = game.n_joint_actions();
  for (int x = 0; x < nx; ++x) {
    for (int u = 0; u < nu; ++u) {
      const int row = game.TransitionRow(x, u);
      double sum = 0.0;
      for (AugmentedGame::RowMajorSparse::InnerIterator it(game.transition, row);
           it; ++it) {
        sum += it.value();
      }
      if (!(std::abs(sum - 1.0) <= kStochasticTolerance)) {
        std::ostringstream msg;
        msg.precision(12);
        msg << "T row (x=" << x << ", u=" << u << ") sums to " << sum;
        report.violations.push_back(
            {Violation::Kind::kRowSum, x, u, -1, -1, sum, msg.str()});
      }
    }
  }
  const double mass = game.initial_dist.sum();
  if (!(std::abs(mass - 1.0) <= kStochasticTolerance)) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "initial distribution sums to " << mass;
    report.violations.push_back(
        {Violation::Kind::kInitialSum, -1, -1, -1, -1, mass, msg.str()});
  }
  if (source != nullptr) {
    for (int s = 0; s < game.n_states; ++s) {
      for (int q = 0; q < game.n_memory; ++q) {
        for (int a = 0; a < game.n_actions; ++a) {
          for (int k = 0; k < game.n_modes; ++k) {
            const int x = game.StateIndex(s, q);
            const int u = game.ActionIndex(a, k);
            if (game.reward_victim(x, u) != source->reward_victim(s, a) ||
                game.reward_attacker(x, u) != source->reward_attacker(s, a)) {
              std::ostringstream msg;
              msg << "reward at (s=" << s << ", q=" << q << ", a=" << a
                  << ", k=" << k << ") is not lifted from the MDP";
              report.violations.push_back(
                  {Violation::Kind::kEntryRange, x, u, -1, k, 0.0, msg.str()});
            }
          }
        }
      }
    }
  }
  return report;
}

ValueResult EvaluateJointExact(const AugmentedGame& game,
                               const JointPolicy& policy, RewardSelector which) {
  CheckJointShape(game, policy);
  return SolveChain(InducedChain(game, policy), InducedReward(game, policy, which),
                    game.initial_dist, game.discount);
}

JointValues EvaluateJointExactBoth(const AugmentedGame& game,
                                   const JointPolicy& policy) {
  CheckJointShape(game, policy);
  const DiscountedChain chain(InducedChain(game, policy), game.discount);
  JointValues out;
  for (RewardSelector which : {RewardSelector::kVictim, RewardSelector::kAttacker}) {
    const Eigen::VectorXd r = InducedReward(game, policy, which);
    ValueResult& result =
        which == RewardSelector::kVictim ? out.victim : out.attacker;
    result.state_values = chain.Solve(r);
    result.residual = chain.Residual(result.state_values, r);
    result.scalar_value = game.initial_dist.dot(result.state_values);
  }
  return out;
}

ValueResult EvaluateBackdoorDirect(const Mdp& mdp, const PerturbationSet& pset,
                                   const Emission& emission,
                                   const MemoryAutomaton& memory,
                                   const Eigen::MatrixXd& mode_probs,
                                   const Eigen::MatrixXd& backdoor_probs,
                                   RewardSelector which) {
  CheckDimensions(mdp, pset, emission, memory);
  const int ns = mdp.n_states();
  const int na = mdp.n_actions();
  const int nq = memory.size();
  const int nk = pset.num_modes();
  if (mode_probs.rows() != nq || mode_probs.cols() != nk ||
      backdoor_probs.rows() != ns || backdoor_probs.cols() != na) {
    throw std::invalid_argument("EvaluateBackdoorDirect: policy shape mismatch");
  }
  const int n_obs = emission.n_obs();
  const int nx = ns * nq;
  auto index = [nq](int s, int q) { return s * nq + q; };

  const Eigen::MatrixXd& reward = mdp.reward(which);
  std::vector<Eigen::Triplet<double>> entries;
  Eigen::VectorXd r(nx);
  Eigen::VectorXd next_state_prob(ns);
  for (int s = 0; s < ns; ++s) {
    const double r_s = backdoor_probs.row(s).dot(reward.row(s));
    for (int q = 0; q < nq; ++q) {
      r(index(s, q)) = r_s;
      // Distribution of s_{t+1}: the policy's action mixed with the
      // trigger's kernel choice.
      next_state_prob.setZero();
      for (int a = 0; a < na; ++a) {
        const double pa = backdoor_probs(s, a);
        if (pa == 0.0) continue;
        for (int next = 0; next < ns; ++next) {
          double mixed = 0.0;
          for (int k = 0; k < nk; ++k) mixed += mode_probs(q, k) * pset.kernels[k](s, a, next);
          next_state_prob(next) += pa * mixed;
        }
      }
      for (int next = 0; next < ns; ++next) {
        if (next_state_prob(next) == 0.0) continue;
        for (int o = 0; o < n_obs; ++o) {
          const double e = emission.prob(next, o);
          if (e == 0.0) continue;
          entries.emplace_back(index(s, q), index(next, memory.Next(q, o)),
                               next_state_prob(next) * e);
        }
      }
    }
  }
  SparseMatrix p(nx, nx);
  p.setFromTriplets(entries.begin(), entries.end());

  Eigen::VectorXd initial = Eigen::VectorXd::Zero(nx);
  for (int s = 0; s < ns; ++s) {
    for (int o = 0; o < n_obs; ++o) {
      initial(index(s, memory.Next(memory.initial(), o))) +=
          mdp.initial_dist(s) * emission.prob(s, o);
    }
  }
  return SolveChain(std::move(p), r, initial, mdp.discount);
}

ValueResult EvaluateBackdoorDirect(const Mdp& mdp, const PerturbationSet& pset,
                                   const Emission& emission,
                                   const TriggerAutomaton& trigger,
                                   const SoftmaxPolicy& backdoor,
                                   RewardSelector which) {
  return EvaluateBackdoorDirect(mdp, pset, emission, trigger.memory,
                                trigger.output.Probs(), backdoor.Probs(), which);
}

AugTrajectory SampleTrajectoryAug(const Mdp& mdp, const PerturbationSet& pset,
                                  const Emission& emission,
                                  const TriggerAutomaton& trigger,
                                  const SoftmaxPolicy& backdoor,
                                  const SampleOptions& options,
                                  std::uint64_t seed) {
  if (options.horizon < 1) {
    throw std::invalid_argument("SampleTrajectoryAug: horizon must be >= 1");
  }
  CheckDimensions(mdp, pset, emission, trigger.memory);
  Rng rng(seed);
  thread_local Eigen::VectorXd emission_row;
  auto observe = [&](int s) {
    emission_row = emission.prob.row(s).transpose();
    return rng.Categorical(
        std::span<const double>(emission_row.data(), emission_row.size()));
  };

  AugTrajectory trajectory;
  trajectory.reserve(options.stop_at_absorbing ? 64 : options.horizon);
  const Eigen::VectorXd& mu = mdp.initial_dist;
  int s = rng.Categorical(std::span<const double>(mu.data(), mu.size()));
  int o = observe(s);
  int q = trigger.memory.Next(trigger.memory.initial(), o);
  for (int t = 0; t < options.horizon; ++t) {
    if (options.stop_at_absorbing && AbsorbingUnderAllModes(mdp, pset, s)) break;
    const int a = backdoor.Sample(s, rng);
    const int k = trigger.output.Sample(q, rng);
    trajectory.push_back({s, q, a, k, o, mdp.reward_victim(s, a),
                          mdp.reward_attacker(s, a)});
    s = rng.Categorical(pset.kernels[k].Row(s, a));
    o = observe(s);
    q = trigger.memory.Next(q, o);
  }
  return trajectory;
}

double DiscountedReturn(const AugTrajectory& trajectory, double discount,
                        RewardSelector which) {
  double total = 0.0;
  double weight = 1.0;
  for (const AugStep& step : trajectory) {
    total += weight * (which == RewardSelector::kVictim ? step.reward_victim
                                                        : step.reward_attacker);
    weight *= discount;
  }
  return total;
}

}  // namespace bdplan
