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

#include <benchmark/benchmark.h>

#include "bdplan/augmented_game.hpp"
#include "bdplan/harness.hpp"
#include "bdplan/learn.hpp"

namespace {

using namespace bdplan;

const AttackModel& Model() {
  static const harness::Experiment e = harness::BuildExperiment(harness::ExperimentConfig{});
  return *e.model;
}

void BM_BuildAugmentedGame(benchmark::State& state) {
  const AttackModel& m = Model();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        BuildAugmentedGame(m.mdp, m.perturbations, m.emission, m.memory));
  }
}
BENCHMARK(BM_BuildAugmentedGame)->Unit(benchmark::kMillisecond);

void BM_ExactAttackedValue(benchmark::State& state) {
  const AttackModel& m = Model();
  const ExactEvaluator evaluator(m);
  const SoftmaxPolicy backdoor(m.mdp.n_states(), m.mdp.n_actions());
  const SoftmaxPolicy trigger(m.memory.size(), m.perturbations.num_modes());
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluator.Attacked(backdoor, trigger));
  }
}
BENCHMARK(BM_ExactAttackedValue)->Unit(benchmark::kMillisecond);

void BM_DirectAttackedValue(benchmark::State& state) {
  const AttackModel& m = Model();
  const SoftmaxPolicy backdoor(m.mdp.n_states(), m.mdp.n_actions());
  const TriggerAutomaton trigger = MakeUniformTrigger(m.memory, m.perturbations.num_modes());
  for (auto _ : state) {
    benchmark::DoNotOptimize(EvaluateBackdoorDirect(m.mdp, m.perturbations, m.emission,
                                                    trigger, backdoor,
                                                    RewardSelector::kAttacker));
  }
}
BENCHMARK(BM_DirectAttackedValue)->Unit(benchmark::kMillisecond);

void BM_SampleTrajectoryAug(benchmark::State& state) {
  const AttackModel& m = Model();
  const SoftmaxPolicy backdoor(m.mdp.n_states(), m.mdp.n_actions());
  const TriggerAutomaton trigger = MakeUniformTrigger(m.memory, m.perturbations.num_modes());
  const SampleOptions options{static_cast<int>(state.range(0)), true};
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(SampleTrajectoryAug(m.mdp, m.perturbations, m.emission,
                                                 trigger, backdoor, options, seed++));
  }
}
BENCHMARK(BM_SampleTrajectoryAug)->Arg(100)->Arg(1500);

void BM_TrainStep(benchmark::State& state) {
  const AttackModel& m = Model();
  const ExactEvaluator evaluator(m);
  TrainConfig config;
  config.batch_size = static_cast<int>(state.range(0));
  const double v_star = OptimalValue(m.mdp).value.scalar_value;
  TrainState train = InitTrainState(m, v_star, config);
  for (auto _ : state) {
    benchmark::DoNotOptimize(TrainStep(train, config, m, &evaluator));
  }
}
BENCHMARK(BM_TrainStep)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
