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

#include "bdplan/trigger.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace bdplan {

ValidationReport Emission::Validate() const {
  ValidationReport report;
  if (prob.rows() < 1 || prob.cols() < 1) {
    report.violations.push_back(
        {Violation::Kind::kShape, -1, -1, -1, -1, 0.0, "empty emission table"});
    return report;
  }
  for (int s = 0; s < n_states(); ++s) {
    for (int o = 0; o < n_obs(); ++o) {
      const double p = prob(s, o);
      if (!(p >= 0.0 && p <= 1.0)) {
        std::ostringstream msg;
        msg << "emission E(o=" << o << " | s=" << s << ") = " << p
            << " outside [0,1]";
        report.violations.push_back(
            {Violation::Kind::kEntryRange, s, -1, o, -1, p, msg.str()});
      }
    }
    const double sum = prob.row(s).sum();
    if (!(std::abs(sum - 1.0) <= kStochasticTolerance)) {
      std::ostringstream msg;
      msg.precision(12);
      msg << "emission row s=" << s << " sums to " << sum;
      report.violations.push_back(
          {Violation::Kind::kRowSum, s, -1, -1, -1, sum, msg.str()});
    }
  }
  return report;
}

std::string RectangularityReport::ToString() const {
  std::ostringstream out;
  out.precision(12);
  out << "max deviation " << max_deviation;
  if (mode >= 0) {
    out << " at (k=" << mode << ", s=" << state << ", a=" << action
        << ", s'=" << next_state << ")";
  }
  out << '\n';
  for (const Violation& v : violations) out << v.message << '\n';
  return out.str();
}

double KernelDistance(const Kernel& a, const Kernel& b) {
  if (!a.SameShape(b)) {
    throw std::invalid_argument("KernelDistance: shape mismatch");
  }
  double worst = 0.0;
  for (int s = 0; s < a.n_states(); ++s) {
    for (int x = 0; x < a.n_actions(); ++x) {
      for (int next = 0; next < a.n_states(); ++next) {
        worst = std::max(worst, std::abs(a(s, x, next) - b(s, x, next)));
      }
    }
  }
  return worst;
}

RectangularityReport CheckDRectangular(const PerturbationSet& pset) {
  RectangularityReport report;
  if (pset.kernels.empty()) {
    report.violations.push_back(
        {Violation::Kind::kShape, -1, -1, -1, -1, 0.0, "no nominal kernel"});
    return report;
  }
  const Kernel& p0 = pset.nominal();
  for (int k = 1; k < pset.num_modes(); ++k) {
    const Kernel& pk = pset.kernels[k];
    if (!pk.SameShape(p0)) {
      std::ostringstream msg;
      msg << "kernel " << k << " shape differs from nominal";
      report.violations.push_back(
          {Violation::Kind::kShape, -1, -1, -1, k, 0.0, msg.str()});
      continue;
    }
    for (int s = 0; s < p0.n_states(); ++s) {
      for (int a = 0; a < p0.n_actions(); ++a) {
        double row_sum = 0.0;
        for (int next = 0; next < p0.n_states(); ++next) {
          const double nominal = p0(s, a, next);
          const double perturbed = pk(s, a, next);
          row_sum += perturbed;
          if (perturbed > 0.0 && nominal <= 0.0) {
            std::ostringstream msg;
            msg << "support violation: P_" << k << "(s'=" << next << " | s=" << s
                << ", a=" << a << ") = " << perturbed
                << " where the nominal kernel is 0";
            report.violations.push_back(
                {Violation::Kind::kSupport, s, a, next, k, perturbed, msg.str()});
          }
          const double dev = std::abs(perturbed - nominal);
          if (dev > report.max_deviation) {
            report.max_deviation = dev;
            report.mode = k;
            report.state = s;
            report.action = a;
            report.next_state = next;
          }
        }
        if (!(std::abs(row_sum - 1.0) <= kStochasticTolerance)) {
          std::ostringstream msg;
          msg.precision(12);
          msg << "kernel " << k << " row (s=" << s << ", a=" << a
              << ") sums to " << row_sum;
          report.violations.push_back(
              {Violation::Kind::kRowSum, s, a, -1, k, row_sum, msg.str()});
        }
      }
    }
  }
  if (report.max_deviation > pset.budget + 1e-12) {
    std::ostringstream msg;
    msg.precision(12);
    msg << "budget violation: |P_" << report.mode << "(s'=" << report.next_state
        << " | s=" << report.state << ", a=" << report.action
        << ") - P_0| = " << report.max_deviation << " exceeds d = "
        << pset.budget;
    report.violations.push_back({Violation::Kind::kBudget, report.state,
                                 report.action, report.next_state, report.mode,
                                 report.max_deviation, msg.str()});
  }
  return report;
}

MemoryAutomaton::MemoryAutomaton(int n_obs, int initial,
                                 std::vector<int> next_table,
                                 std::vector<std::vector<int>> words)
    : n_obs_(n_obs),
      initial_(initial),
      next_(std::move(next_table)),
      words_(std::move(words)) {
  if (n_obs_ < 1) {
    throw std::invalid_argument("MemoryAutomaton: n_obs must be >= 1");
  }
  if (next_.empty() || next_.size() % static_cast<std::size_t>(n_obs_) != 0) {
    throw std::invalid_argument("MemoryAutomaton: transition table not total");
  }
  size_ = static_cast<int>(next_.size() / n_obs_);
  if (initial_ < 0 || initial_ >= size_) {
    throw std::invalid_argument("MemoryAutomaton: initial state out of range");
  }
  for (int q : next_) {
    if (q < 0 || q >= size_) {
      throw std::invalid_argument("MemoryAutomaton: transition target out of range");
    }
  }
  if (!words_.empty() && static_cast<int>(words_.size()) != size_) {
    throw std::invalid_argument("MemoryAutomaton: one word per state required");
  }
}

const std::vector<int>& MemoryAutomaton::Word(int q) const {
  static const std::vector<int> kNone;
  return words_.empty() ? kNone : words_[q];
}

int MemoryAutomaton::Run(const std::vector<int>& observations) const {
  int q = initial_;
  for (int o : observations) q = Next(q, o);
  return q;
}

std::size_t SuffixMemorySize(int n_obs, int bound, std::size_t capacity) {
  std::size_t total = 0;
  std::size_t layer = 1;
  for (int len = 0; len <= bound; ++len) {
    total += layer;
    if (total > capacity) return capacity + 1;
    layer *= static_cast<std::size_t>(n_obs);
  }
  return total;
}

MemoryAutomaton BuildSuffixMemory(int n_obs, int bound, std::size_t capacity) {
  if (n_obs < 1 || bound < 1) {
    throw std::invalid_argument("BuildSuffixMemory: n_obs and bound must be >= 1");
  }
  const std::size_t count = SuffixMemorySize(n_obs, bound, capacity);
  if (count > capacity) {
    std::ostringstream msg;
    msg << "suffix memory with " << n_obs << " symbols and bound " << bound
        << " exceeds the capacity of " << capacity << " states";
    throw CapacityError(msg.str());
  }

  // Strings are laid out by length; within a length, in base-n_obs order.
  std::vector<std::size_t> offset(bound + 2, 0);
  std::size_t layer = 1;
  for (int len = 0; len <= bound; ++len) {
    offset[len + 1] = offset[len] + layer;
    layer *= static_cast<std::size_t>(n_obs);
  }
  auto index_of = [&](const std::vector<int>& w) {
    std::size_t code = 0;
    for (int symbol : w) code = code * n_obs + symbol;
    return static_cast<int>(offset[w.size()] + code);
  };

  std::vector<std::vector<int>> words(count);
  for (int len = 0; len <= bound; ++len) {
    const std::size_t width = offset[len + 1] - offset[len];
    for (std::size_t code = 0; code < width; ++code) {
      std::vector<int> w(len);
      std::size_t rest = code;
      for (int i = len - 1; i >= 0; --i) {
        w[i] = static_cast<int>(rest % n_obs);
        rest /= n_obs;
      }
      words[offset[len] + code] = std::move(w);
    }
  }

  std::vector<int> next(count * static_cast<std::size_t>(n_obs));
  std::vector<int> extended;
  for (std::size_t q = 0; q < count; ++q) {
    for (int o = 0; o < n_obs; ++o) {
      const std::vector<int>& w = words[q];
      const std::size_t drop = w.size() + 1 > static_cast<std::size_t>(bound) ? 1 : 0;
      extended.assign(w.begin() + static_cast<std::ptrdiff_t>(drop), w.end());
      extended.push_back(o);
      next[q * n_obs + o] = index_of(extended);
    }
  }
  return MemoryAutomaton(n_obs, 0, std::move(next), std::move(words));
}

TriggerAutomaton MakeUniformTrigger(MemoryAutomaton memory, int num_modes) {
  const int rows = memory.size();
  return TriggerAutomaton{std::move(memory), SoftmaxPolicy(rows, num_modes)};
}

TriggerDecision TriggerStep(const TriggerAutomaton& trigger, int q, int o,
                            Rng& rng) {
  const int k = trigger.output.Sample(q, rng);
  return {k, trigger.memory.Next(q, o)};
}

}  // namespace bdplan
