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

#include "bdplan/rng.hpp"

#include <stdexcept>

namespace bdplan {

namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t DeriveSeed(std::uint64_t base_seed, std::uint64_t stream_index) {
  return SplitMix64(SplitMix64(base_seed) ^ SplitMix64(~stream_index));
}

double Rng::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

int Rng::Categorical(std::span<const double> weights) {
  double total = 0.0;
  int last_positive = -1;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) {
      total += weights[i];
      last_positive = static_cast<int>(i);
    }
  }
  if (last_positive < 0) {
    throw std::invalid_argument("Categorical: no positive weight");
  }
  const double u = Uniform() * total;
  double acc = 0.0;
  for (int i = 0; i < last_positive; ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    if (u < acc) return i;
  }
  return last_positive;
}

}  // namespace bdplan
