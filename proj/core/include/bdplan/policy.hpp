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

#ifndef BDPLAN_POLICY_HPP_
#define BDPLAN_POLICY_HPP_

#include <Eigen/Dense>

#include "bdplan/rng.hpp"

namespace bdplan {

// Tabular softmax policy: row r (an MDP state or a trigger memory state)
// selects column c (an action or a kernel index) with probability
// exp(theta(r,c)) / sum_c' exp(theta(r,c')).
class SoftmaxPolicy {
 public:
  SoftmaxPolicy() = default;
  // All-zero parameters, i.e. uniform over columns.
  SoftmaxPolicy(int rows, int cols);
  explicit SoftmaxPolicy(Eigen::MatrixXd params);

  int rows() const { return static_cast<int>(params_.rows()); }
  int cols() const { return static_cast<int>(params_.cols()); }

  const Eigen::MatrixXd& params() const { return params_; }
  void set_params(Eigen::MatrixXd params);
  void AddToParams(const Eigen::MatrixXd& delta);

  double Prob(int row, int col) const { return probs_(row, col); }
  // Full probability table, rows sum to one.
  const Eigen::MatrixXd& Probs() const { return probs_; }

  int Sample(int row, Rng& rng) const;

  // Accumulates scale * d/dtheta log pi(col | row) into grad, which must have
  // the shape of params(). Only row `row` is touched.
  void AccumulateLogProbGradient(int row, int col, double scale,
                                 Eigen::MatrixXd& grad) const;

 private:
  void Refresh();

  Eigen::MatrixXd params_;
  Eigen::MatrixXd probs_;
};

// Softmax parameters whose argmax is `choice(r)` by a margin `sharpness`.
SoftmaxPolicy SharpenedPolicy(const Eigen::VectorXi& choice, int cols,
                              double sharpness);

}  // namespace bdplan

#endif  // BDPLAN_POLICY_HPP_
