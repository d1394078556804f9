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

// bdplan train|sweep|verify --config <file> --out <dir> [--seed N]

#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "bdplan/config.hpp"
#include "bdplan/harness.hpp"
#include "bdplan/learn.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitVerify = 2;
constexpr int kExitRuntime = 3;

struct CommonArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void AddCommon(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "experiment config (key = value)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out, "output directory")->required();
  cmd->add_option("--seed", args.seed, "overrides the config seed");
}

bdplan::harness::ExperimentConfig Load(const CommonArgs& args) {
  bdplan::harness::ExperimentConfig config =
      bdplan::harness::LoadExperimentConfig(args.config);
  if (args.seed) config.train.seed = *args.seed;
  return config;
}

void PrintFinal(const bdplan::harness::TrainRun& run) {
  const bdplan::FinalEvaluation& f = run.result.final;
  std::printf("V0*                 %.6f\n", run.optimal_value);
  std::printf("threshold           %.6f\n", run.result.threshold);
  std::printf("iterations          %zu%s\n", run.result.history.size(),
              run.result.stopped_early ? " (stopped early)" : "");
  std::printf("V0 nominal          %.6f\n", f.v0_original_exact);
  std::printf("V0 attacked         %.6f\n", f.v0_attacked_exact);
  std::printf("V1 attacked         %.6f\n", f.v1_attacked_exact);
  std::printf("V1 untriggered      %.6f\n", f.v1_untriggered_exact);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Backdoor attack planner for tabular MDPs"};
  app.set_version_flag("--version", bdplan::harness::VersionString());
  app.require_subcommand(1);

  CommonArgs train_args;
  CLI::App* train = app.add_subcommand("train", "run the switching gradient");
  AddCommon(train, train_args);

  CommonArgs sweep_args;
  std::string sweep_var;
  std::string sweep_values;
  CLI::App* sweep = app.add_subcommand("sweep", "one training run per value");
  AddCommon(sweep, sweep_args);
  sweep->add_option("--var", sweep_var, "epsilon or delta")
      ->required()
      ->check(CLI::IsMember({"epsilon", "delta"}));
  sweep->add_option("--values", sweep_values, "comma separated values")
      ->required();

  CommonArgs verify_args;
  CLI::App* verify = app.add_subcommand("verify", "structural checks");
  AddCommon(verify, verify_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*train) {
      const auto config = Load(train_args);
      const auto run = bdplan::harness::RunTrain(config, train_args.out);
      PrintFinal(run);
      return kExitOk;
    }
    if (*sweep) {
      const auto config = Load(sweep_args);
      const auto var = bdplan::harness::ParseSweepVariable(sweep_var);
      const auto values = bdplan::ParseDoubleList(sweep_values, "values");
      const auto points =
          bdplan::harness::RunSweep(config, var, values, sweep_args.out);
      bdplan::harness::WriteSweepSummary(std::cout, var, points);
      return kExitOk;
    }
    const auto config = Load(verify_args);
    const auto report = bdplan::harness::RunVerify(config, verify_args.out);
    std::cout << report.ToString();
    return report.passed() ? kExitOk : kExitVerify;
  } catch (const bdplan::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const bdplan::TrainingDivergedError& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
