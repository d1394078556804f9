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

#include "bdplan/verification.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bdplan/trigger.hpp"

namespace bdplan {
namespace {

int UniformInt(Rng& rng, int lo, int hi) {
  const int span = hi - lo + 1;
  return lo + std::min(span - 1, static_cast<int>(rng.Uniform() * span));
}

Eigen::VectorXd RandomDistribution(int n, Rng& rng) {
  Eigen::VectorXd p(n);
  for (int i = 0; i < n; ++i) p(i) = 0.05 + rng.Uniform();
  return p / p.sum();
}

Kernel RandomKernel(int n_states, int n_actions, Rng& rng) {
  Kernel kernel(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      const Eigen::VectorXd p = RandomDistribution(n_states, rng);
      for (int t = 0; t < n_states; ++t) kernel(s, a, t) = p(t);
    }
  }
  return kernel;
}

void CheckHorizon(int horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be positive");
}

struct AttackedEnumerator {
  const AttackModel& model;
  const Eigen::MatrixXd& backdoor;
  const Eigen::MatrixXd& trigger;
  int horizon;
  RewardSelector which;
  ParamBlock block;
  std::vector<ScoredEpisode>* out;
  std::vector<Decision> decisions;

  void Visit(int t, int s, int q, double weight, double ret) {
    const Eigen::MatrixXd& reward = model.mdp.reward(which);
    const double gamma_t = std::pow(model.mdp.discount, t);
    const int n_states = model.mdp.n_states();
    const int n_obs = model.emission.n_obs();
    for (int a = 0; a < model.mdp.n_actions(); ++a) {
      const double pa = backdoor(s, a);
      if (pa == 0.0) continue;
      for (int k = 0; k < model.perturbations.num_modes(); ++k) {
        const double pk = trigger(q, k);
        if (pk == 0.0) continue;
        decisions.push_back(block == ParamBlock::kBackdoor ? Decision{s, a}
                                                           : Decision{q, k});
        const double w = weight * pa * pk;
        const double r = ret + gamma_t * reward(s, a);
        if (t + 1 == horizon) {
          out->push_back({decisions, r, w});
        } else {
          const Kernel& kernel = model.perturbations.kernels[k];
          for (int next = 0; next < n_states; ++next) {
            const double ps = kernel(s, a, next);
            if (ps == 0.0) continue;
            for (int o = 0; o < n_obs; ++o) {
              const double po = model.emission.prob(next, o);
              if (po == 0.0) continue;
              Visit(t + 1, next, model.memory.Next(q, o), w * ps * po, r);
            }
          }
        }
        decisions.pop_back();
      }
    }
  }
};

void NominalVisit(const Mdp& mdp, const Eigen::MatrixXd& policy, int horizon,
                  RewardSelector which, int t, int s, double weight, double ret,
                  std::vector<Decision>& decisions,
                  std::vector<ScoredEpisode>& out) {
  const double gamma_t = std::pow(mdp.discount, t);
  for (int a = 0; a < mdp.n_actions(); ++a) {
    const double pa = policy(s, a);
    if (pa == 0.0) continue;
    decisions.push_back({s, a});
    const double w = weight * pa;
    const double r = ret + gamma_t * mdp.reward(which)(s, a);
    if (t + 1 == horizon) {
      out.push_back({decisions, r, w});
    } else {
      for (int next = 0; next < mdp.n_states(); ++next) {
        const double ps = mdp.transition(s, a, next);
        if (ps == 0.0) continue;
        NominalVisit(mdp, policy, horizon, which, t + 1, next, w * ps, r,
                     decisions, out);
      }
    }
    decisions.pop_back();
  }
}

template <typename ValueFn>
GradientCheck CompareWithDifferences(const Eigen::MatrixXd& reinforce,
                                     const Eigen::MatrixXd& params, double step,
                                     ValueFn value) {
  GradientCheck check;
  for (int i = 0; i < params.rows(); ++i) {
    for (int j = 0; j < params.cols(); ++j) {
      Eigen::MatrixXd plus = params;
      Eigen::MatrixXd minus = params;
      plus(i, j) += step;
      minus(i, j) -= step;
      const double fd = (value(plus) - value(minus)) / (2.0 * step);
      check.max_abs_error =
          std::max(check.max_abs_error, std::abs(fd - reinforce(i, j)));
      ++check.entries;
    }
  }
  return check;
}

}  // namespace

AttackModel RandomAttackModel(const RandomInstanceOptions& options, Rng& rng) {
  const int n_states = UniformInt(rng, options.min_states, options.max_states);
  const int n_actions = UniformInt(rng, 1, options.max_actions);
  const int n_obs = UniformInt(rng, 1, options.max_obs);
  const int n_perturbed = UniformInt(rng, 1, options.max_perturbed);
  const int bound = UniformInt(rng, 1, options.max_memory_bound);

  Mdp mdp;
  mdp.transition = RandomKernel(n_states, n_actions, rng);
  mdp.reward_victim.resize(n_states, n_actions);
  mdp.reward_attacker.resize(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      mdp.reward_victim(s, a) = 2.0 * rng.Uniform() - 1.0;
      mdp.reward_attacker(s, a) = 2.0 * rng.Uniform() - 1.0;
    }
  }
  mdp.initial_dist = RandomDistribution(n_states, rng);
  mdp.discount = options.min_discount +
                 (options.max_discount - options.min_discount) * rng.Uniform();

  PerturbationSet pset;
  pset.kernels.push_back(mdp.transition);
  for (int k = 0; k < n_perturbed; ++k) {
    const Kernel other = RandomKernel(n_states, n_actions, rng);
    const double mix = rng.Uniform();
    Kernel mixed(n_states, n_actions);
    for (int s = 0; s < n_states; ++s) {
      for (int a = 0; a < n_actions; ++a) {
        for (int t = 0; t < n_states; ++t) {
          mixed(s, a, t) =
              (1.0 - mix) * mdp.transition(s, a, t) + mix * other(s, a, t);
        }
      }
    }
    pset.budget = std::max(pset.budget, KernelDistance(mixed, mdp.transition));
    pset.kernels.push_back(std::move(mixed));
  }

  Emission emission;
  emission.prob.resize(n_states, n_obs);
  for (int s = 0; s < n_states; ++s) {
    emission.prob.row(s) = RandomDistribution(n_obs, rng).transpose();
  }

  return {std::move(mdp), std::move(pset), std::move(emission),
          BuildSuffixMemory(n_obs, bound)};
}

SoftmaxPolicy RandomSoftmaxPolicy(int rows, int cols, double scale, Rng& rng) {
  Eigen::MatrixXd params(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      params(i, j) = scale * (2.0 * rng.Uniform() - 1.0);
    }
  }
  return SoftmaxPolicy(std::move(params));
}

double TruncatedValue(const Mdp& mdp, const Eigen::MatrixXd& policy,
                      int horizon, RewardSelector which) {
  CheckHorizon(horizon);
  const int n = mdp.n_states();
  const Eigen::MatrixXd& reward = mdp.reward(which);
  Eigen::VectorXd dist = mdp.initial_dist;
  double value = 0.0;
  double gamma_t = 1.0;
  for (int t = 0; t < horizon; ++t) {
    Eigen::VectorXd next = Eigen::VectorXd::Zero(n);
    for (int s = 0; s < n; ++s) {
      if (dist(s) == 0.0) continue;
      for (int a = 0; a < mdp.n_actions(); ++a) {
        const double w = dist(s) * policy(s, a);
        value += gamma_t * w * reward(s, a);
        for (int u = 0; u < n; ++u) next(u) += w * mdp.transition(s, a, u);
      }
    }
    dist = std::move(next);
    gamma_t *= mdp.discount;
  }
  return value;
}

double TruncatedValue(const AugmentedGame& game, const JointPolicy& policy,
                      int horizon, RewardSelector which) {
  CheckHorizon(horizon);
  const int nx = game.n_product_states();
  const Eigen::MatrixXd& reward = game.reward(which);
  Eigen::VectorXd dist = game.initial_dist;
  double value = 0.0;
  double gamma_t = 1.0;
  for (int t = 0; t < horizon; ++t) {
    Eigen::VectorXd next = Eigen::VectorXd::Zero(nx);
    for (int s = 0; s < game.n_states; ++s) {
      for (int q = 0; q < game.n_memory; ++q) {
        const int x = game.StateIndex(s, q);
        if (dist(x) == 0.0) continue;
        for (int a = 0; a < game.n_actions; ++a) {
          for (int k = 0; k < game.n_modes; ++k) {
            const int u = game.ActionIndex(a, k);
            const double w = dist(x) * policy.Prob(s, q, a, k);
            value += gamma_t * w * reward(x, u);
            for (AugmentedGame::RowMajorSparse::InnerIterator it(
                     game.transition, game.TransitionRow(x, u));
                 it; ++it) {
              next(it.col()) += w * it.value();
            }
          }
        }
      }
    }
    dist = std::move(next);
    gamma_t *= game.discount;
  }
  return value;
}

std::vector<ScoredEpisode> EnumerateNominal(const Mdp& mdp,
                                            const SoftmaxPolicy& policy,
                                            int horizon, RewardSelector which) {
  CheckHorizon(horizon);
  std::vector<ScoredEpisode> out;
  std::vector<Decision> decisions;
  for (int s = 0; s < mdp.n_states(); ++s) {
    const double p0 = mdp.initial_dist(s);
    if (p0 == 0.0) continue;
    NominalVisit(mdp, policy.Probs(), horizon, which, 0, s, p0, 0.0, decisions,
                 out);
  }
  return out;
}

std::vector<ScoredEpisode> EnumerateAttacked(const AttackModel& model,
                                             const SoftmaxPolicy& backdoor,
                                             const SoftmaxPolicy& trigger,
                                             int horizon, RewardSelector which,
                                             ParamBlock block) {
  CheckHorizon(horizon);
  std::vector<ScoredEpisode> out;
  AttackedEnumerator walker{model, backdoor.Probs(), trigger.Probs(), horizon,
                            which, block, &out, {}};
  for (int s = 0; s < model.mdp.n_states(); ++s) {
    const double p0 = model.mdp.initial_dist(s);
    if (p0 == 0.0) continue;
    for (int o = 0; o < model.emission.n_obs(); ++o) {
      const double po = model.emission.prob(s, o);
      if (po == 0.0) continue;
      walker.Visit(0, s, model.memory.Next(model.memory.initial(), o), p0 * po,
                   0.0);
    }
  }
  return out;
}

double GradientCheckResult::max_abs_error() const {
  return std::max({nominal_backdoor.max_abs_error,
                   attacked_backdoor.max_abs_error,
                   attacked_trigger.max_abs_error});
}

GradientCheckResult CheckGradients(const AttackModel& model,
                                   const SoftmaxPolicy& backdoor,
                                   const SoftmaxPolicy& trigger, int horizon,
                                   double step) {
  const AugmentedGame game = BuildAugmentedGame(
      model.mdp, model.perturbations, model.emission, model.memory);
  const GradientOptions plain{BaselineMode::kNone, 0.0, false, 1.0};
  GradientCheckResult result;

  const auto nominal_episodes =
      EnumerateNominal(model.mdp, backdoor, horizon, RewardSelector::kVictim);
  result.nominal_backdoor = CompareWithDifferences(
      ReinforceGradient(nominal_episodes, backdoor, plain), backdoor.params(),
      step, [&](const Eigen::MatrixXd& p) {
        return TruncatedValue(model.mdp, SoftmaxPolicy(p).Probs(), horizon,
                              RewardSelector::kVictim);
      });

  const auto backdoor_episodes =
      EnumerateAttacked(model, backdoor, trigger, horizon,
                        RewardSelector::kAttacker, ParamBlock::kBackdoor);
  result.attacked_backdoor = CompareWithDifferences(
      ReinforceGradient(backdoor_episodes, backdoor, plain), backdoor.params(),
      step, [&](const Eigen::MatrixXd& p) {
        return TruncatedValue(game, {SoftmaxPolicy(p).Probs(), trigger.Probs()},
                              horizon, RewardSelector::kAttacker);
      });

  const auto trigger_episodes =
      EnumerateAttacked(model, backdoor, trigger, horizon,
                        RewardSelector::kAttacker, ParamBlock::kTrigger);
  result.attacked_trigger = CompareWithDifferences(
      ReinforceGradient(trigger_episodes, trigger, plain), trigger.params(),
      step, [&](const Eigen::MatrixXd& p) {
        return TruncatedValue(game, {backdoor.Probs(), SoftmaxPolicy(p).Probs()},
                              horizon, RewardSelector::kAttacker);
      });
  return result;
}

}  // namespace bdplan
