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

#ifndef BDPLAN_TRIGGER_HPP_
#define BDPLAN_TRIGGER_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bdplan/mdp.hpp"
#include "bdplan/policy.hpp"
#include "bdplan/rng.hpp"

namespace bdplan {

// Attacker observation model E(o | s). A "no observation" outcome is just
// another column of the table.
struct Emission {
  Eigen::MatrixXd prob;  // n_states x n_obs

  int n_states() const { return static_cast<int>(prob.rows()); }
  int n_obs() const { return static_cast<int>(prob.cols()); }

  ValidationReport Validate() const;
};

// Kernels the trigger can switch between. kernels[0] is the nominal P0;
// kernels[k] for k >= 1 are the perturbed modes. The trigger action set is
// {0, ..., kernels.size() - 1}.
struct PerturbationSet {
  std::vector<Kernel> kernels;
  // Declared kernel-level budget d.
  double budget = 0.0;

  int num_modes() const { return static_cast<int>(kernels.size()); }
  const Kernel& nominal() const { return kernels.front(); }
};

struct RectangularityReport {
  // Largest |P_k(s'|s,a) - P_0(s'|s,a)| over all k >= 1 and its location.
  double max_deviation = 0.0;
  int mode = -1;
  int state = -1;
  int action = -1;
  int next_state = -1;
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string ToString() const;
};

// Support containment and d-closeness of every perturbed kernel against the
// nominal one, with the budget taken from pset.budget.
RectangularityReport CheckDRectangular(const PerturbationSet& pset);

// max |a(s'|s,x) - b(s'|s,x)| over all entries.
double KernelDistance(const Kernel& a, const Kernel& b);

class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Deterministic finite memory driven by observations: q' = next(q, o).
class MemoryAutomaton {
 public:
  MemoryAutomaton() = default;
  // next_table is indexed [q * n_obs + o] and must be total.
  MemoryAutomaton(int n_obs, int initial, std::vector<int> next_table,
                  std::vector<std::vector<int>> words = {});

  int size() const { return size_; }
  int n_obs() const { return n_obs_; }
  int initial() const { return initial_; }

  int Next(int q, int o) const {
    return next_[static_cast<std::size_t>(q) * n_obs_ + o];
  }

  // Observation string represented by q, when the automaton was built from
  // strings; empty otherwise.
  const std::vector<int>& Word(int q) const;
  bool has_words() const { return !words_.empty(); }

  // Replays observations from the initial state.
  int Run(const std::vector<int>& observations) const;

 private:
  int n_obs_ = 0;
  int initial_ = 0;
  int size_ = 0;
  std::vector<int> next_;
  std::vector<std::vector<int>> words_;
};

// Number of strings of length 0..bound over n_obs symbols, or capacity + 1
// if that count exceeds `capacity`.
std::size_t SuffixMemorySize(int n_obs, int bound, std::size_t capacity);

// Memory states are the observation strings of length <= bound, the initial
// state is the empty string and next(q, o) keeps the last `bound` symbols of
// q.o. Throws CapacityError if the state count exceeds `capacity`.
MemoryAutomaton BuildSuffixMemory(int n_obs, int bound,
                                  std::size_t capacity = 1'000'000);

// Finite-memory observation-based trigger: memory plus a softmax output
// over kernel indices per memory state.
struct TriggerAutomaton {
  MemoryAutomaton memory;
  SoftmaxPolicy output;  // memory.size() x num_modes

  int num_modes() const { return output.cols(); }
};

TriggerAutomaton MakeUniformTrigger(MemoryAutomaton memory, int num_modes);

struct TriggerDecision {
  int mode;
  int next_memory;
};

// k ~ output(. | q) and q' = next(q, o).
TriggerDecision TriggerStep(const TriggerAutomaton& trigger, int q, int o,
                            Rng& rng);

}  // namespace bdplan

#endif  // BDPLAN_TRIGGER_HPP_
