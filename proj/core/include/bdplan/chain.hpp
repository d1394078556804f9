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

#ifndef BDPLAN_CHAIN_HPP_
#define BDPLAN_CHAIN_HPP_

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace bdplan {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

// Discounted evaluation of a fixed Markov chain: factorizes (I - gamma P)
// once, then solves for any number of reward vectors.
class DiscountedChain {
 public:
  DiscountedChain(SparseMatrix transition, double discount);

  int size() const { return static_cast<int>(transition_.rows()); }
  const SparseMatrix& transition() const { return transition_; }

  Eigen::VectorXd Solve(const Eigen::VectorXd& reward) const;

  // ||(I - gamma P) v - r||_inf
  double Residual(const Eigen::VectorXd& values,
                  const Eigen::VectorXd& reward) const;

 private:
  SparseMatrix transition_;
  double discount_;
  Eigen::SparseLU<SparseMatrix> lu_;
};

}  // namespace bdplan

#endif  // BDPLAN_CHAIN_HPP_
