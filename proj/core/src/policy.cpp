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

#include <span>
#include <stdexcept>
#include <utility>

namespace bdplan {

SoftmaxPolicy::SoftmaxPolicy(int rows, int cols)
    : SoftmaxPolicy(Eigen::MatrixXd::Zero(rows, cols)) {}

SoftmaxPolicy::SoftmaxPolicy(Eigen::MatrixXd params)
    : params_(std::move(params)) {
  if (params_.rows() < 1 || params_.cols() < 1) {
    throw std::invalid_argument("SoftmaxPolicy: empty parameter table");
  }
  Refresh();
}

void SoftmaxPolicy::set_params(Eigen::MatrixXd params) {
  if (params.rows() != params_.rows() || params.cols() != params_.cols()) {
    throw std::invalid_argument("SoftmaxPolicy: parameter shape changed");
  }
  params_ = std::move(params);
  Refresh();
}

void SoftmaxPolicy::AddToParams(const Eigen::MatrixXd& delta) {
  if (delta.rows() != params_.rows() || delta.cols() != params_.cols()) {
    throw std::invalid_argument("SoftmaxPolicy: update shape mismatch");
  }
  params_ += delta;
  Refresh();
}

int SoftmaxPolicy::Sample(int row, Rng& rng) const {
  // probs_ is column-major; copy the row out so the sampler sees it
  // contiguously.
  thread_local Eigen::VectorXd scratch;
  scratch = probs_.row(row).transpose();
  return rng.Categorical(std::span<const double>(scratch.data(), scratch.size()));
}

void SoftmaxPolicy::AccumulateLogProbGradient(int row, int col, double scale,
                                              Eigen::MatrixXd& grad) const {
  grad.row(row) -= scale * probs_.row(row);
  grad(row, col) += scale;
}

void SoftmaxPolicy::Refresh() {
  probs_.resize(params_.rows(), params_.cols());
  for (Eigen::Index r = 0; r < params_.rows(); ++r) {
    const double shift = params_.row(r).maxCoeff();
    probs_.row(r) = (params_.row(r).array() - shift).exp().matrix();
    probs_.row(r) /= probs_.row(r).sum();
  }
}

SoftmaxPolicy SharpenedPolicy(const Eigen::VectorXi& choice, int cols,
                              double sharpness) {
  Eigen::MatrixXd params = Eigen::MatrixXd::Zero(choice.size(), cols);
  for (Eigen::Index r = 0; r < choice.size(); ++r) {
    params(r, choice(r)) = sharpness;
  }
  return SoftmaxPolicy(std::move(params));
}

}  // namespace bdplan
