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

#include "bdplan/chain.hpp"

#include <stdexcept>
#include <utility>

namespace bdplan {

DiscountedChain::DiscountedChain(SparseMatrix transition, double discount)
    : transition_(std::move(transition)), discount_(discount) {
  if (!(discount_ >= 0.0 && discount_ < 1.0)) {
    throw std::invalid_argument("DiscountedChain: discount must lie in [0, 1)");
  }
  if (transition_.rows() != transition_.cols()) {
    throw std::invalid_argument("DiscountedChain: transition must be square");
  }
  SparseMatrix system(transition_.rows(), transition_.cols());
  system.setIdentity();
  system -= discount_ * transition_;
  system.makeCompressed();
  lu_.analyzePattern(system);
  lu_.factorize(system);
  if (lu_.info() != Eigen::Success) {
    throw std::runtime_error("DiscountedChain: singular Bellman system");
  }
}

Eigen::VectorXd DiscountedChain::Solve(const Eigen::VectorXd& reward) const {
  Eigen::VectorXd v = lu_.solve(reward);
  if (lu_.info() != Eigen::Success) {
    throw std::runtime_error("DiscountedChain: solve failed");
  }
  return v;
}

double DiscountedChain::Residual(const Eigen::VectorXd& values,
                                 const Eigen::VectorXd& reward) const {
  const Eigen::VectorXd lhs = values - discount_ * (transition_ * values);
  return (lhs - reward).cwiseAbs().maxCoeff();
}

}  // namespace bdplan
