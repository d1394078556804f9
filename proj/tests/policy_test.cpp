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

#include "bdplan/policy.hpp"

#include <cmath>

#include <gtest/gtest.h>

namespace bdplan {
namespace {

TEST(SoftmaxPolicyTest, ZeroParamsAreUniform) {
  const SoftmaxPolicy p(3, 4);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) EXPECT_DOUBLE_EQ(p.Prob(r, c), 0.25);
  }
}

TEST(SoftmaxPolicyTest, RowsArePositiveAndNormalized) {
  Eigen::MatrixXd theta(2, 3);
  theta << 1000.0, 0.0, -1000.0, 0.5, -0.25, 3.0;
  const SoftmaxPolicy p(theta);
  for (int r = 0; r < 2; ++r) {
    EXPECT_NEAR(p.Probs().row(r).sum(), 1.0, 1e-15);
    EXPECT_TRUE(std::isfinite(p.Prob(r, 0)));
  }
  EXPECT_GT(p.Prob(1, 1), 0.0);
}

TEST(SoftmaxPolicyTest, SaturatedRowPicksDominantColumn) {
  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(1, 3);
  theta(0, 2) = 50.0;
  const SoftmaxPolicy p(theta);
  EXPECT_GE(p.Prob(0, 2), 1.0 - 1e-20);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(p.Sample(0, rng), 2);
}

TEST(SoftmaxPolicyTest, LogProbGradientMatchesFiniteDifference) {
  Eigen::MatrixXd theta(2, 3);
  theta << 0.3, -0.7, 1.1, 0.0, 0.4, -0.2;
  const SoftmaxPolicy p(theta);
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(2, 3);
  p.AccumulateLogProbGradient(1, 2, 1.0, grad);
  const double h = 1e-6;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 3; ++c) {
      Eigen::MatrixXd plus = theta;
      Eigen::MatrixXd minus = theta;
      plus(r, c) += h;
      minus(r, c) -= h;
      const double fd = (std::log(SoftmaxPolicy(plus).Prob(1, 2)) -
                         std::log(SoftmaxPolicy(minus).Prob(1, 2))) /
                        (2 * h);
      EXPECT_NEAR(grad(r, c), fd, 1e-8);
    }
  }
}

TEST(SoftmaxPolicyTest, SharpenedPolicyFavorsChoice) {
  Eigen::VectorXi choice(3);
  choice << 2, 0, 1;
  const SoftmaxPolicy p = SharpenedPolicy(choice, 3, 30.0);
  for (int r = 0; r < 3; ++r) EXPECT_GT(p.Prob(r, choice(r)), 1.0 - 1e-12);
}

TEST(SoftmaxPolicyTest, AddToParamsRefreshesProbabilities) {
  SoftmaxPolicy p(1, 2);
  Eigen::MatrixXd delta(1, 2);
  delta << std::log(3.0), 0.0;
  p.AddToParams(delta);
  EXPECT_NEAR(p.Prob(0, 0), 0.75, 1e-15);
}

}  // namespace
}  // namespace bdplan
