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

#include "bdplan/learn.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "bdplan/rng.hpp"

namespace bdplan {

Eigen::MatrixXd ReinforceGradient(std::span<const ScoredEpisode> episodes,
                                  const SoftmaxPolicy& policy,
                                  const GradientOptions& options) {
  if (episodes.empty()) {
    throw std::invalid_argument("ReinforceGradient: empty batch");
  }
  double total_weight = 0.0;
  double weighted_return = 0.0;
  for (const ScoredEpisode& ep : episodes) {
    total_weight += ep.weight;
    weighted_return += ep.weight * ep.discounted_return;
  }
  if (!(total_weight > 0.0)) {
    throw std::invalid_argument("ReinforceGradient: batch has no weight");
  }
  double baseline = 0.0;
  switch (options.baseline) {
    case BaselineMode::kNone:
      break;
    case BaselineMode::kBatchMean:
      baseline = weighted_return / total_weight;
      break;
    case BaselineMode::kConstant:
      baseline = options.constant_baseline;
      break;
  }

  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(policy.rows(), policy.cols());
  for (const ScoredEpisode& ep : episodes) {
    const double advantage = ep.discounted_return - baseline;
    if (advantage == 0.0 || ep.weight == 0.0) continue;
    const double scale = ep.weight * advantage / total_weight;
    double step_weight = 1.0;
    for (const Decision& d : ep.decisions) {
      policy.AccumulateLogProbGradient(d.row, d.col, scale * step_weight, grad);
      if (options.discount_scores) step_weight *= options.discount;
    }
  }
  return grad;
}

ScoredEpisode EpisodeFromTrajectory(const MdpTrajectory& trajectory,
                                    double discount, RewardSelector which) {
  ScoredEpisode ep;
  ep.decisions.reserve(trajectory.size());
  for (const MdpStep& step : trajectory) {
    ep.decisions.push_back({step.state, step.action});
  }
  ep.discounted_return = DiscountedReturn(trajectory, discount, which);
  return ep;
}

ScoredEpisode EpisodeFromTrajectory(const AugTrajectory& trajectory,
                                    double discount, RewardSelector which,
                                    ParamBlock block) {
  ScoredEpisode ep;
  ep.decisions.reserve(trajectory.size());
  for (const AugStep& step : trajectory) {
    if (block == ParamBlock::kBackdoor) {
      ep.decisions.push_back({step.state, step.action});
    } else {
      ep.decisions.push_back({step.memory, step.mode});
    }
  }
  ep.discounted_return = DiscountedReturn(trajectory, discount, which);
  return ep;
}

std::string TrainConfig::Validate() const {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) return "epsilon must lie in [0, 1)";
  if (batch_size < 1) return "batch_size must be positive";
  if (horizon < 1) return "horizon must be positive";
  if (max_iters < 0) return "max_iters must be nonnegative";
  if (!(lr_backdoor.initial > 0.0)) return "lr0 must be positive";
  if (!(lr_trigger.initial > 0.0)) return "lr1 must be positive";
  if (lr_backdoor.decay < 0.0 || lr_trigger.decay < 0.0) {
    return "learning-rate decay must be nonnegative";
  }
  if (!(stop_threshold > 0.0)) return "stop_threshold must be positive";
  return {};
}

const char* BranchName(Branch branch) {
  return branch == Branch::kRepair ? "repair" : "attack";
}

ExactEvaluator::ExactEvaluator(const AttackModel& model)
    : model_(model),
      game_(BuildAugmentedGame(model.mdp, model.perturbations, model.emission,
                               model.memory)) {}

double ExactEvaluator::NominalVictimValue(const SoftmaxPolicy& backdoor) const {
  return PolicyValueExact(model_.mdp, backdoor, RewardSelector::kVictim)
      .scalar_value;
}

JointValues ExactEvaluator::Attacked(const SoftmaxPolicy& backdoor,
                                     const SoftmaxPolicy& trigger) const {
  return EvaluateJointExactBoth(game_, JointPolicy::FromPolicies(backdoor, trigger));
}

double ExactEvaluator::UntriggeredAttackerValue(
    const SoftmaxPolicy& backdoor) const {
  return PolicyValueExact(model_.mdp, backdoor, RewardSelector::kAttacker)
      .scalar_value;
}

TrainState InitTrainState(const AttackModel& model, double optimal_value,
                          const TrainConfig& config) {
  TrainState state;
  state.backdoor = SoftmaxPolicy(model.mdp.n_states(), model.mdp.n_actions());
  state.trigger = SoftmaxPolicy(model.memory.size(), model.perturbations.num_modes());
  state.threshold = (1.0 - config.epsilon) * optimal_value;
  return state;
}

IterationMetrics TrainStep(TrainState& state, const TrainConfig& config,
                           const AttackModel& model,
                           const ExactEvaluator* evaluator) {
  const double gamma = model.mdp.discount;
  const int m = config.batch_size;
  const SampleOptions sampling{config.horizon, config.stop_at_absorbing};
  const std::uint64_t iter_seed =
      DeriveSeed(config.seed, static_cast<std::uint64_t>(state.iteration));

  IterationMetrics metrics;
  metrics.iter = state.iteration;
  if (config.exact_metrics && evaluator != nullptr) {
    metrics.v0_original_exact = evaluator->NominalVictimValue(state.backdoor);
    const JointValues attacked = evaluator->Attacked(state.backdoor, state.trigger);
    metrics.v0_attacked_exact = attacked.victim.scalar_value;
    metrics.v1_attacked_exact = attacked.attacker.scalar_value;
  } else {
    metrics.v0_original_exact = std::numeric_limits<double>::quiet_NaN();
    metrics.v0_attacked_exact = std::numeric_limits<double>::quiet_NaN();
    metrics.v1_attacked_exact = std::numeric_limits<double>::quiet_NaN();
  }

  // Nominal batch {rho_i} and triggered batch {tau_i}.
  std::vector<ScoredEpisode> nominal(m);
  double nominal_mean = 0.0;
  for (int i = 0; i < m; ++i) {
    const MdpTrajectory rho = SampleTrajectoryMdp(
        model.mdp, state.backdoor, sampling, DeriveSeed(iter_seed, 2 * i));
    nominal[i] = EpisodeFromTrajectory(rho, gamma, RewardSelector::kVictim);
    nominal_mean += nominal[i].discounted_return;
  }
  nominal_mean /= m;

  const TriggerAutomaton trigger{model.memory, state.trigger};
  std::vector<ScoredEpisode> attacked_backdoor(m);
  std::vector<ScoredEpisode> attacked_trigger(m);
  for (int i = 0; i < m; ++i) {
    const AugTrajectory tau = SampleTrajectoryAug(
        model.mdp, model.perturbations, model.emission, trigger, state.backdoor,
        sampling, DeriveSeed(iter_seed, 2 * i + 1));
    attacked_backdoor[i] = EpisodeFromTrajectory(tau, gamma, RewardSelector::kAttacker,
                                                 ParamBlock::kBackdoor);
    attacked_trigger[i] = EpisodeFromTrajectory(tau, gamma, RewardSelector::kAttacker,
                                                ParamBlock::kTrigger);
  }

  GradientOptions grad_options;
  grad_options.baseline =
      config.baseline ? BaselineMode::kBatchMean : BaselineMode::kNone;
  grad_options.discount_scores = config.discount_scores;
  grad_options.discount = gamma;

  metrics.v0_original_mc = nominal_mean;
  metrics.constraint_satisfied = !(nominal_mean < state.threshold);

  Eigen::MatrixXd delta0;
  Eigen::MatrixXd delta1 = Eigen::MatrixXd::Zero(state.trigger.rows(), state.trigger.cols());
  if (!metrics.constraint_satisfied) {
    metrics.branch = Branch::kRepair;
    delta0 = config.lr_backdoor.At(state.iteration) *
             ReinforceGradient(nominal, state.backdoor, grad_options);
  } else {
    metrics.branch = Branch::kAttack;
    delta0 = config.lr_backdoor.At(state.iteration) *
             ReinforceGradient(attacked_backdoor, state.backdoor, grad_options);
    delta1 = config.lr_trigger.At(state.iteration) *
             ReinforceGradient(attacked_trigger, state.trigger, grad_options);
  }
  if (!delta0.allFinite() || !delta1.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite parameter update at iteration " << state.iteration
        << " (" << BranchName(metrics.branch) << " branch, nominal estimate "
        << nominal_mean << "); reduce the learning rates";
    throw TrainingDivergedError(msg.str());
  }

  state.backdoor.AddToParams(delta0);
  if (metrics.branch == Branch::kAttack) state.trigger.AddToParams(delta1);
  if (!state.backdoor.params().allFinite() || !state.trigger.params().allFinite()) {
    std::ostringstream msg;
    msg << "non-finite parameters after iteration " << state.iteration;
    throw TrainingDivergedError(msg.str());
  }

  metrics.dtheta0 = delta0.norm();
  metrics.dtheta1 = metrics.branch == Branch::kAttack ? delta1.norm() : 0.0;
  state.last_dtheta0 = metrics.dtheta0;
  state.last_dtheta1 = metrics.dtheta1;
  ++state.iteration;
  return metrics;
}

FinalEvaluation EvaluateFinal(const AttackModel& model,
                              const ExactEvaluator& evaluator,
                              const SoftmaxPolicy& backdoor,
                              const SoftmaxPolicy& trigger) {
  FinalEvaluation out;
  const ValueResult nominal =
      PolicyValueExact(model.mdp, backdoor, RewardSelector::kVictim);
  out.v0_original_exact = nominal.scalar_value;
  out.v0_residual = nominal.residual;
  const JointValues attacked = evaluator.Attacked(backdoor, trigger);
  out.v0_attacked_exact = attacked.victim.scalar_value;
  out.v1_attacked_exact = attacked.attacker.scalar_value;
  out.attacked_residual = std::max(attacked.victim.residual, attacked.attacker.residual);
  out.v1_untriggered_exact = evaluator.UntriggeredAttackerValue(backdoor);
  return out;
}

TrainResult Train(const AttackModel& model, const TrainConfig& config,
                  double optimal_value, const TrainObserver& observer) {
  if (const std::string err = config.Validate(); !err.empty()) {
    throw std::invalid_argument("TrainConfig: " + err);
  }
  const ExactEvaluator evaluator(model);
  TrainState state = InitTrainState(model, optimal_value, config);

  TrainResult result;
  result.optimal_value = optimal_value;
  result.threshold = state.threshold;
  result.history.reserve(static_cast<std::size_t>(config.max_iters));
  for (int t = 0; t < config.max_iters; ++t) {
    result.history.push_back(TrainStep(state, config, model, &evaluator));
    if (observer) observer(result.history.back(), state);
    if (state.last_dtheta0 <= config.stop_threshold &&
        state.last_dtheta1 <= config.stop_threshold) {
      result.stopped_early = true;
      break;
    }
  }
  result.final = EvaluateFinal(model, evaluator, state.backdoor, state.trigger);
  result.backdoor = std::move(state.backdoor);
  result.trigger = std::move(state.trigger);
  return result;
}

}  // namespace bdplan
