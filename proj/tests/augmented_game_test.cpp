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
#include <random>

#include <gtest/gtest.h>

#include "bdplan/learn.hpp"
#include "bdplan/verification.hpp"
#include "oracles.hpp"

namespace bdplan {
namespace {

double Entry(const AugmentedGame& game, int x, int u, int y) {
  return game.transition.coeff(game.TransitionRow(x, u), y);
}

AttackModel TwoStateModel() {
  std::mt19937_64 gen(21);
  Mdp mdp = oracle::RandomMdp(2, 2, 0.9, gen);
  Kernel p1(2, 2);
  for (int s = 0; s < 2; ++s) {
    for (int a = 0; a < 2; ++a) {
      p1(s, a, 0) = 0.5 * mdp.transition(s, a, 0);
      p1(s, a, 1) = 1.0 - p1(s, a, 0);
    }
  }
  Emission e;
  e.prob.resize(2, 2);
  e.prob << 0.7, 0.3, 0.4, 0.6;
  PerturbationSet pset{{mdp.transition, p1}, 1.0};
  return {std::move(mdp), std::move(pset), std::move(e), BuildSuffixMemory(2, 1)};
}

TEST(BuildAugmentedGameTest, ConstantObservationCollapsesMemory) {
  std::mt19937_64 gen(20);
  Mdp mdp = oracle::RandomMdp(3, 2, 0.9, gen);
  const Kernel p1 = oracle::RandomMdp(3, 2, 0.9, gen).transition;
  const PerturbationSet pset{{mdp.transition, p1}, 1.0};
  const Emission e{Eigen::MatrixXd::Ones(3, 1)};
  const MemoryAutomaton mem = BuildSuffixMemory(1, 1);
  const AugmentedGame game = BuildAugmentedGame(mdp, pset, e, mem);
  const int q_star = mem.Next(mem.initial(), 0);
  EXPECT_EQ(mem.Next(q_star, 0), q_star);
  for (int s = 0; s < 3; ++s) {
    for (int a = 0; a < 2; ++a) {
      for (int k = 0; k < 2; ++k) {
        for (int t = 0; t < 3; ++t) {
          EXPECT_EQ(Entry(game, game.StateIndex(s, q_star), game.ActionIndex(a, k),
                          game.StateIndex(t, q_star)),
                    pset.kernels[k](s, a, t));
        }
      }
    }
  }
  for (int s = 0; s < 3; ++s) {
    EXPECT_DOUBLE_EQ(game.initial_dist(game.StateIndex(s, q_star)), mdp.initial_dist(s));
  }
}

TEST(BuildAugmentedGameTest, EntriesMatchBruteForceSum) {
  const AttackModel m = TwoStateModel();
  const AugmentedGame game =
      BuildAugmentedGame(m.mdp, m.perturbations, m.emission, m.memory);
  const int nq = m.memory.size();
  for (int s = 0; s < 2; ++s) {
    for (int q = 0; q < nq; ++q) {
      for (int a = 0; a < 2; ++a) {
        for (int k = 0; k < 2; ++k) {
          for (int t = 0; t < 2; ++t) {
            for (int q2 = 0; q2 < nq; ++q2) {
              double expected = 0.0;
              for (int o = 0; o < 2; ++o) {
                if (m.memory.Next(q, o) == q2) {
                  expected += m.emission.prob(t, o) * m.perturbations.kernels[k](s, a, t);
                }
              }
              EXPECT_NEAR(Entry(game, game.StateIndex(s, q), game.ActionIndex(a, k),
                                game.StateIndex(t, q2)),
                          expected, 1e-15);
            }
          }
        }
      }
    }
  }
  // Hand expansion of one entry: land in s0 and observe o0.
  const int q_o0 = m.memory.Next(m.memory.initial(), 0);
  EXPECT_NEAR(Entry(game, game.StateIndex(1, q_o0), game.ActionIndex(0, 1),
                    game.StateIndex(0, q_o0)),
              0.7 * 0.5 * m.mdp.transition(1, 0, 0), 1e-15);
  EXPECT_NEAR(game.initial_dist(game.StateIndex(0, q_o0)), 0.7 * m.mdp.initial_dist(0),
              1e-15);
}

TEST(BuildAugmentedGameTest, RowsAreStochastic) {
  Rng rng(22);
  for (int i = 0; i < 20; ++i) {
    const AttackModel m = RandomAttackModel({}, rng);
    const AugmentedGame game =
        BuildAugmentedGame(m.mdp, m.perturbations, m.emission, m.memory);
    for (int r = 0; r < game.transition.rows(); ++r) {
      ASSERT_NEAR(game.transition.row(r).sum(), 1.0, 1e-12);
    }
    EXPECT_NEAR(game.initial_dist.sum(), 1.0, 1e-12);
    EXPECT_TRUE(ValidateGame(game, &m.mdp).ok());
  }
}

TEST(BuildAugmentedGameTest, RewardIgnoresMemoryAndMode) {
  const AttackModel m = TwoStateModel();
  const AugmentedGame game =
      BuildAugmentedGame(m.mdp, m.perturbations, m.emission, m.memory);
  for (int s = 0; s < 2; ++s) {
    for (int q = 0; q < m.memory.size(); ++q) {
      for (int a = 0; a < 2; ++a) {
        for (int k = 0; k < 2; ++k) {
          const int x = game.StateIndex(s, q);
          const int u = game.ActionIndex(a, k);
          EXPECT_EQ(game.reward_victim(x, u), m.mdp.reward_victim(s, a));
          EXPECT_EQ(game.reward_attacker(x, u), m.mdp.reward_attacker(s, a));
        }
      }
    }
  }
}

TEST(BuildAugmentedGameTest, DimensionMismatchThrows) {
  AttackModel m = TwoStateModel();
  m.emission.prob = Eigen::MatrixXd::Constant(3, 2, 0.5);
  EXPECT_THROW(BuildAugmentedGame(m.mdp, m.perturbations, m.emission, m.memory),
               std::invalid_argument);
}

TEST(EvaluateJointExactTest, ZeroAttackerRewardGivesZero) {
  AttackModel m = TwoStateModel();
  m.mdp.reward_attacker.setZero();
  const AugmentedGame game =
      BuildAugmentedGame(m.mdp, m.perturbations, m.emission, m.memory);
  const JointPolicy pi =
      JointPolicy::FromPolicies(SoftmaxPolicy(2, 2), SoftmaxPolicy(m.memory.size(), 2));
  EXPECT_EQ(EvaluateJointExact(game, pi, RewardSelector::kAttacker).scalar_value, 0.0);
}

TEST(EvaluateJointExactTest, ZeroSumIdentityIsExact) {
  Rng rng(23);
  for (int i = 0; i < 10; ++i) {
    AttackModel m = RandomAttackModel({}, rng);
    m.mdp.reward_attacker = -m.mdp.reward_victim;
    const AugmentedGame game =
        BuildAugmentedGame(m.mdp, m.perturbations, m.emission, m.memory);
    const JointPolicy pi = JointPolicy::FromPolicies(
        RandomSoftmaxPolicy(m.mdp.n_states(), m.mdp.n_actions(), 2.0, rng),
        RandomSoftmaxPolicy(m.memory.size(), m.perturbations.num_modes(), 2.0, rng));
    const JointValues both = EvaluateJointExactBoth(game, pi);
    EXPECT_LE((both.victim.state_values + both.attacker.state_values).cwiseAbs().maxCoeff(),
              1e-10);
  }
}

TEST(EvaluateJointExactTest, MatchesProcessIteration) {
  Rng rng(24);
  RandomInstanceOptions options;
  options.max_states = 4;
  for (int i = 0; i < 5; ++i) {
    const AttackModel m = RandomAttackModel(options, rng);
    const SoftmaxPolicy backdoor =
        RandomSoftmaxPolicy(m.mdp.n_states(), m.mdp.n_actions(), 1.5, rng);
    const SoftmaxPolicy trig =
        RandomSoftmaxPolicy(m.memory.size(), m.perturbations.num_modes(), 1.5, rng);
    const AugmentedGame game =
        BuildAugmentedGame(m.mdp, m.perturbations, m.emission, m.memory);
    for (RewardSelector which : {RewardSelector::kVictim, RewardSelector::kAttacker}) {
      const double oracle_value =
          oracle::BackdoorIterate(m, backdoor.Probs(), trig.Probs(), which, 2000);
      const double joint =
          EvaluateJointExact(game, JointPolicy::FromPolicies(backdoor, trig), which)
              .scalar_value;
      EXPECT_NEAR(joint, oracle_value, 1e-6);
    }
  }
}

TEST(EvaluateBackdoorDirectTest, AgreesWithProductGame) {
  Rng rng(25);
  for (int i = 0; i < 20; ++i) {
    const AttackModel m = RandomAttackModel({}, rng);
    const SoftmaxPolicy backdoor =
        RandomSoftmaxPolicy(m.mdp.n_states(), m.mdp.n_actions(), 2.0, rng);
    const SoftmaxPolicy trig =
        RandomSoftmaxPolicy(m.memory.size(), m.perturbations.num_modes(), 2.0, rng);
    const AugmentedGame game =
        BuildAugmentedGame(m.mdp, m.perturbations, m.emission, m.memory);
    for (RewardSelector which : {RewardSelector::kVictim, RewardSelector::kAttacker}) {
      const double direct = EvaluateBackdoorDirect(m.mdp, m.perturbations, m.emission,
                                                   TriggerAutomaton{m.memory, trig},
                                                   backdoor, which)
                                .scalar_value;
      const double joint =
          EvaluateJointExact(game, JointPolicy::FromPolicies(backdoor, trig), which)
              .scalar_value;
      EXPECT_LE(std::abs(direct - joint), 1e-8);
    }
  }
}

TEST(EvaluateBackdoorDirectTest, NominalOnlyReducesToMdp) {
  std::mt19937_64 gen(26);
  const Mdp mdp = oracle::RandomMdp(4, 3, 0.9, gen);
  const PerturbationSet pset{{mdp.transition}, 0.0};
  const Emission e{oracle::RandomStochastic(4, 2, gen)};
  const MemoryAutomaton mem = BuildSuffixMemory(2, 2);
  Eigen::MatrixXd theta(4, 3);
  theta << 0.1, 0.5, -1, 2, 0, 0, -0.3, 0.3, 1, 0, 0, 0;
  const SoftmaxPolicy backdoor(theta);
  const double direct =
      EvaluateBackdoorDirect(mdp, pset, e, MakeUniformTrigger(mem, 1), backdoor,
                             RewardSelector::kVictim)
          .scalar_value;
  EXPECT_NEAR(direct,
              PolicyValueExact(mdp, backdoor, RewardSelector::kVictim).scalar_value,
              1e-10);
}

TEST(EvaluateBackdoorDirectTest, DeterministicTriggerUsesThatKernel) {
  const AttackModel m = TwoStateModel();
  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(m.memory.size(), 2);
  theta.col(1).setConstant(60.0);
  const SoftmaxPolicy backdoor(2, 2);
  const double direct =
      EvaluateBackdoorDirect(m.mdp, m.perturbations, m.emission,
                             TriggerAutomaton{m.memory, SoftmaxPolicy(theta)},
                             backdoor, RewardSelector::kAttacker)
          .scalar_value;
  Mdp switched = m.mdp;
  switched.transition = m.perturbations.kernels[1];
  EXPECT_NEAR(direct,
              PolicyValueExact(switched, backdoor, RewardSelector::kAttacker).scalar_value,
              1e-10);
}

TEST(SampleTrajectoryAugTest, MonteCarloMatchesDirectValue) {
  const AttackModel m = TwoStateModel();
  const SoftmaxPolicy backdoor(2, 2);
  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(m.memory.size(), 2);
  theta(1, 1) = 1.0;
  const TriggerAutomaton trigger{m.memory, SoftmaxPolicy(theta)};
  const SampleOptions options{200, false};
  const int n = 100000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = DiscountedReturn(
        SampleTrajectoryAug(m.mdp, m.perturbations, m.emission, trigger, backdoor,
                            options, DeriveSeed(99, i)),
        m.mdp.discount, RewardSelector::kAttacker);
    sum += g;
    sum_sq += g * g;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / n);
  const double tail = std::pow(m.mdp.discount, 200) *
                      m.mdp.reward_attacker.cwiseAbs().maxCoeff() / (1 - m.mdp.discount);
  const double exact = EvaluateBackdoorDirect(m.mdp, m.perturbations, m.emission, trigger,
                                              backdoor, RewardSelector::kAttacker)
                           .scalar_value;
  EXPECT_NEAR(mean, exact, 3 * se + tail);
}

TEST(SampleTrajectoryAugTest, ConstantObservationKeepsMemory) {
  std::mt19937_64 gen(27);
  const Mdp mdp = oracle::RandomMdp(3, 2, 0.9, gen);
  const PerturbationSet pset{{mdp.transition, mdp.transition}, 0.0};
  const Emission e{Eigen::MatrixXd::Ones(3, 1)};
  const TriggerAutomaton trigger = MakeUniformTrigger(BuildSuffixMemory(1, 2), 2);
  const AugTrajectory traj =
      SampleTrajectoryAug(mdp, pset, e, trigger, SoftmaxPolicy(3, 2), {100, false}, 4);
  ASSERT_EQ(traj.size(), 100u);
  // After the first observation the window is "0"; later ones are "00".
  for (std::size_t t = 1; t < traj.size(); ++t) EXPECT_EQ(traj[t].memory, traj[1].memory);
}

TEST(SampleTrajectoryAugTest, SameSeedSameTrajectory) {
  const AttackModel m = TwoStateModel();
  const TriggerAutomaton trigger = MakeUniformTrigger(m.memory, 2);
  const auto a = SampleTrajectoryAug(m.mdp, m.perturbations, m.emission, trigger,
                                     SoftmaxPolicy(2, 2), {50, false}, 8);
  const auto b = SampleTrajectoryAug(m.mdp, m.perturbations, m.emission, trigger,
                                     SoftmaxPolicy(2, 2), {50, false}, 8);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    EXPECT_EQ(a[t].state, b[t].state);
    EXPECT_EQ(a[t].memory, b[t].memory);
    EXPECT_EQ(a[t].action, b[t].action);
    EXPECT_EQ(a[t].mode, b[t].mode);
    EXPECT_EQ(a[t].observation, b[t].observation);
  }
}

}  // namespace
}  // namespace bdplan
