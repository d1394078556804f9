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

#ifndef BDPLAN_GRIDWORLD_HPP_
#define BDPLAN_GRIDWORLD_HPP_

#include <istream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bdplan/mdp.hpp"
#include "bdplan/trigger.hpp"

namespace bdplan::gridworld {

enum class Cell { kFree, kHighTarget, kLowTarget, kTrap };

enum Action : int { kNorth = 0, kSouth = 1, kEast = 2, kWest = 3 };
inline constexpr int kNumActions = 4;

struct Layout {
  int width = 0;
  int height = 0;
  std::vector<Cell> cells;       // row-major, row 0 at the top
  std::vector<int> start_cells;  // cells tagged 'S'; empty means all free cells

  int num_cells() const { return width * height; }
  int CellIndex(int row, int col) const { return row * width + col; }
  bool IsTerminal(int cell) const { return cells[cell] != Cell::kFree; }
};

class LayoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// '.' free, 'R' high target, 'Y' low target, 'X' trap, 'S' free start cell.
// Trailing whitespace on a line is ignored; blank lines are skipped.
Layout ParseLayout(std::istream& in);
Layout ParseLayoutString(const std::string& text);
Layout LoadLayout(const std::string& path);
std::string FormatLayout(const Layout& layout);

// Payoff collected once, on the step taken from a terminal cell.
struct Payoffs {
  double high_target = 20.0;
  double low_target = 2.0;
  double trap = -10.0;

  double For(Cell cell) const;
};

inline Payoffs VictimPayoffs() { return {20.0, 2.0, -10.0}; }
inline Payoffs ZeroSumAttacker(const Payoffs& victim) {
  return {-victim.high_target, -victim.low_target, -victim.trap};
}
inline Payoffs NonZeroSumAttacker() { return {-2.0, 20.0, 10.0}; }

struct GridSpec {
  Layout layout;
  double slip = 0.1;
  double discount = 0.99;
  double p_obs = 0.8;
  Payoffs victim = VictimPayoffs();
  Payoffs attacker = ZeroSumAttacker(VictimPayoffs());

  // Throws LayoutError / std::invalid_argument on bad fields.
  void Validate() const;
};

// The shipped 6x6 layout.
Layout DefaultLayout();

// State indices: cells in row-major order, then one absorbing sink.
inline int SinkState(const Layout& layout) { return layout.num_cells(); }
inline int NumStates(const Layout& layout) { return layout.num_cells() + 1; }

// Intended neighbor with probability 1 - 2 slip, each lateral neighbor with
// probability slip; blocked moves stay put. Terminal cells and the sink move
// to the sink.
Kernel BuildSlipKernel(const Layout& layout, double slip);

Mdp BuildGridworldMdp(const GridSpec& spec);

// P0 from spec.slip followed by one kernel per listed slip value. The
// budget is the realized kernel-level distance.
PerturbationSet BuildPerturbationSet(const GridSpec& spec,
                                     std::span<const double> slips);

// {max(slip - delta, 0), slip + delta}
std::vector<double> SlipsForDelta(double slip, double delta);

// Observations: one symbol per state followed by the empty symbol.
// E(s | s) = p_obs and E(empty | s) = 1 - p_obs.
Emission BuildEmission(const GridSpec& spec);
inline int EmptyObservation(const Layout& layout) { return NumStates(layout); }

}  // namespace bdplan::gridworld

#endif  // BDPLAN_GRIDWORLD_HPP_
