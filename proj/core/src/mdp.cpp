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

#include "bdplan/mdp.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "bdplan/chain.hpp"
#include "bdplan/rng.hpp"

namespace bdplan {

Kernel::Kernel(int n_states, int n_actions)
    : n_states_(n_states), n_actions_(n_actions) {
  if (n_states < 1 || n_actions < 1) {
    throw std::invalid_argument("Kernel: dimensions must be positive");
  }
  p_.assign(static_cast<std::size_t>(n_states) * n_actions * n_states, 0.0);
}

bool Mdp::IsAbsorbingZeroReward(int s) const {
  for (int a = 0; a < n_actions(); ++a) {
    if (transition(s, a, s) != 1.0) return false;
    if (reward_victim(s, a) != 0.0 || reward_attacker(s, a) != 0.0) {
      return false;
    }
  }
  return true;
}

std::string ValidationReport::ToString() const {
  if (ok()) return "ok";
  std::ostringstream out;
  for (const Violation& v : violations) out << v.message << '\n';
  return out.str();
}

ValidationReport ValidateMdp(const Mdp& mdp) {
  ValidationReport report;
  auto add = [&report](Violation v) { report.violations.push_back(std::move(v)); };
  const int ns = mdp.n_states();
  const int na = mdp.n_actions();

  if (ns < 1 || na < 1) {
    add({Violation::Kind::kShape, -1, -1, -1, -1, 0.0, "empty state or action space"});
    return report;
  }
  auto check_shape = [&](const Eigen::MatrixXd& m, const char* name) {
    if (m.rows() != ns || m.cols() != na) {
      std::ostringstream msg;
      msg << name << " has shape " << m.rows() << "x" << m.cols()
          << ", expected " << ns << "x" << na;
      add({Violation::Kind::kShape, -1, -1, -1, -1, 0.0, msg.str()});
    }
  };
  check_shape(mdp.reward_victim, "reward_victim");
  check_shape(mdp.reward_attacker, "reward_attacker");
  if (mdp.initial_dist.size() != ns) {
    std::ostringstream msg;
    msg << "initial_dist has length " << mdp.initial_dist.size()
        << ", expected " << ns;
    add({Violation::Kind::kShape, -1, -1, -1, -1, 0.0, msg.str()});
  }
  if (!(mdp.discount > 0.0 && mdp.discount < 1.0)) {
    std::ostringstream msg;
    msg << "discount " << mdp.discount << " outside (0,1)";
    add({Violation::Kind::kDiscount, -1, -1, -1, -1, mdp.discount, msg.str()});
  }

  for (int s = 0; s < ns; ++s) {
    for (int a = 0; a < na; ++a) {
      double sum = 0.0;
      for (int next = 0; next < ns; ++next) {
        const double p = mdp.transition(s, a, next);
        if (!(p >= 0.0 && p <= 1.0)) {
          std::ostringstream msg;
          msg << "transition (s=" << s << ", a=" << a << ", s'=" << next
              << ") = " << p << " outside [0,1]";
          add({Violation::Kind::kEntryRange, s, a, next, -1, p, msg.str()});
        }
        sum += p;
      }
      if (!(std::abs(sum - 1.0) <= kStochasticTolerance)) {
        std::ostringstream msg;
        msg.precision(12);
        msg << "transition row (s=" << s << ", a=" << a << ") sums to " << sum;
        add({Violation::Kind::kRowSum, s, a, -1, -1, sum, msg.str()});
      }
    }
  }

  if (mdp.initial_dist.size() == ns) {
    for (int s = 0; s < ns; ++s) {
      const double p = mdp.initial_dist(s);
      if (!(p >= 0.0)) {
        std::ostringstream msg;
        msg << "initial_dist[" << s << "] = " << p << " is negative";
        add({Violation::Kind::kInitialEntry, s, -1, -1, -1, p, msg.str()});
      }
    }
    const double total = mdp.initial_dist.sum();
    if (!(std::abs(total - 1.0) <= kStochasticTolerance)) {
      std::ostringstream msg;
      msg.precision(12);
      msg << "initial_dist sums to " << total;
      add({Violation::Kind::kInitialSum, -1, -1, -1, -1, total, msg.str()});
    }
  }
  return report;
}

void RequireValid(const Mdp& mdp) {
  const ValidationReport report = ValidateMdp(mdp);
  if (!report.ok()) {
    throw std::invalid_argument("invalid MDP:\n" + report.ToString());
  }
}

ValueResult PolicyValueExact(const Mdp& mdp, const SoftmaxPolicy& policy,
                             RewardSelector which) {
  const int ns = mdp.n_states();
  const int na = mdp.n_actions();
  if (policy.rows() != ns || policy.cols() != na) {
    throw std::invalid_argument("PolicyValueExact: policy shape mismatch");
  }
  const Eigen::MatrixXd& pi = policy.Probs();
  const Eigen::MatrixXd& reward = mdp.reward(which);

  std::vector<Eigen::Triplet<double>> entries;
  Eigen::VectorXd r_pi(ns);
  for (int s = 0; s < ns; ++s) {
    r_pi(s) = pi.row(s).dot(reward.row(s));
    for (int next = 0; next < ns; ++next) {
      double p = 0.0;
      for (int a = 0; a < na; ++a) p += pi(s, a) * mdp.transition(s, a, next);
      if (p != 0.0) entries.emplace_back(s, next, p);
    }
  }
  SparseMatrix p_pi(ns, ns);
  p_pi.setFromTriplets(entries.begin(), entries.end());

  const DiscountedChain chain(std::move(p_pi), mdp.discount);
  ValueResult result;
  result.state_values = chain.Solve(r_pi);
  result.residual = chain.Residual(result.state_values, r_pi);
  result.scalar_value = mdp.initial_dist.dot(result.state_values);
  return result;
}

OptimalSolution OptimalValue(const Mdp& mdp, double tolerance,
                             int max_iterations) {
  const int ns = mdp.n_states();
  const int na = mdp.n_actions();
  const Eigen::MatrixXd& reward = mdp.reward_victim;

  // Sparse rows keep the sweep cost proportional to the kernel support.
  struct Entry {
    int next;
    double p;
  };
  std::vector<std::vector<Entry>> rows(static_cast<std::size_t>(ns) * na);
  for (int s = 0; s < ns; ++s) {
    for (int a = 0; a < na; ++a) {
      auto& row = rows[static_cast<std::size_t>(s) * na + a];
      for (int next = 0; next < ns; ++next) {
        const double p = mdp.transition(s, a, next);
        if (p != 0.0) row.push_back({next, p});
      }
    }
  }

  OptimalSolution out;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(ns);
  Eigen::VectorXd next_v(ns);
  out.greedy_action = Eigen::VectorXi::Zero(ns);
  double residual = 0.0;
  int it = 0;
  for (; it < max_iterations; ++it) {
    residual = 0.0;
    for (int s = 0; s < ns; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      int best_a = 0;
      for (int a = 0; a < na; ++a) {
        double q = reward(s, a);
        double ev = 0.0;
        for (const Entry& e : rows[static_cast<std::size_t>(s) * na + a]) {
          ev += e.p * v(e.next);
        }
        q += mdp.discount * ev;
        if (q > best) {
          best = q;
          best_a = a;
        }
      }
      next_v(s) = best;
      out.greedy_action(s) = best_a;
      residual = std::max(residual, std::abs(best - v(s)));
    }
    v.swap(next_v);
    if (residual <= tolerance) {
      ++it;
      break;
    }
  }
  out.iterations = it;
  out.value.state_values = std::move(v);
  out.value.residual = residual;
  out.value.scalar_value = mdp.initial_dist.dot(out.value.state_values);
  return out;
}

MdpTrajectory SampleTrajectoryMdp(const Mdp& mdp, const SoftmaxPolicy& policy,
                                  const SampleOptions& options,
                                  std::uint64_t seed) {
  if (options.horizon < 1) {
    throw std::invalid_argument("SampleTrajectoryMdp: horizon must be >= 1");
  }
  Rng rng(seed);
  MdpTrajectory trajectory;
  trajectory.reserve(options.stop_at_absorbing ? 64 : options.horizon);
  const Eigen::VectorXd& mu = mdp.initial_dist;
  int s = rng.Categorical(std::span<const double>(mu.data(), mu.size()));
  for (int t = 0; t < options.horizon; ++t) {
    if (options.stop_at_absorbing && mdp.IsAbsorbingZeroReward(s)) break;
    const int a = policy.Sample(s, rng);
    trajectory.push_back(
        {s, a, mdp.reward_victim(s, a), mdp.reward_attacker(s, a)});
    s = rng.Categorical(mdp.transition.Row(s, a));
  }
  return trajectory;
}

double DiscountedReturn(const MdpTrajectory& trajectory, double discount,
                        RewardSelector which) {
  double total = 0.0;
  double weight = 1.0;
  for (const MdpStep& step : trajectory) {
    total += weight * (which == RewardSelector::kVictim ? step.reward_victim
                                                        : step.reward_attacker);
    weight *= discount;
  }
  return total;
}

}  // namespace bdplan
