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

#ifndef BDPLAN_RNG_HPP_
#define BDPLAN_RNG_HPP_

#include <cstdint>
#include <random>
#include <span>

namespace bdplan {

// Mixes a base seed with a stream index so that every trajectory (or sweep
// point) gets its own reproducible stream regardless of evaluation order.
std::uint64_t DeriveSeed(std::uint64_t base_seed, std::uint64_t stream_index);

// Thin wrapper over mt19937_64. Uniform doubles are produced from the top 53
// bits of the engine output so sampling does not depend on the standard
// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double Uniform();

  // Index drawn from an (unnormalized, nonnegative) weight vector. Mass
  // that falls past the last positive weight because of rounding goes to
  // the last positive entry.
  int Categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

}  // namespace bdplan

#endif  // BDPLAN_RNG_HPP_
