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

#include "bdplan/gridworld.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace bdplan::gridworld {

namespace {

constexpr int kRowStep[kNumActions] = {-1, 1, 0, 0};
constexpr int kColStep[kNumActions] = {0, 0, 1, -1};
// Lateral directions for each action: W/E for N and S, N/S for E and W.
constexpr int kLateral[kNumActions][2] = {
    {kWest, kEast}, {kEast, kWest}, {kNorth, kSouth}, {kSouth, kNorth}};

int Move(const Layout& layout, int cell, int direction) {
  const int row = cell / layout.width + kRowStep[direction];
  const int col = cell % layout.width + kColStep[direction];
  if (row < 0 || row >= layout.height || col < 0 || col >= layout.width) {
    return cell;
  }
  return layout.CellIndex(row, col);
}

}  // namespace

double Payoffs::For(Cell cell) const {
  switch (cell) {
    case Cell::kHighTarget:
      return high_target;
    case Cell::kLowTarget:
      return low_target;
    case Cell::kTrap:
      return trap;
    case Cell::kFree:
      break;
  }
  return 0.0;
}

Layout ParseLayout(std::istream& in) {
  Layout layout;
  std::string line;
  int line_no = 0;
  int row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t' ||
                             line.back() == '\r')) {
      line.pop_back();
    }
    if (line.empty()) continue;
    if (layout.width == 0) {
      layout.width = static_cast<int>(line.size());
    } else if (static_cast<int>(line.size()) != layout.width) {
      std::ostringstream msg;
      msg << "layout row " << row << " (line " << line_no << ") has "
          << line.size() << " cells, expected " << layout.width;
      throw LayoutError(msg.str());
    }
    for (int col = 0; col < layout.width; ++col) {
      const char c = line[col];
      Cell cell = Cell::kFree;
      switch (c) {
        case '.':
          break;
        case 'S':
          layout.start_cells.push_back(row * layout.width + col);
          break;
        case 'R':
          cell = Cell::kHighTarget;
          break;
        case 'Y':
          cell = Cell::kLowTarget;
          break;
        case 'X':
          cell = Cell::kTrap;
          break;
        default: {
          std::ostringstream msg;
          msg << "unexpected layout character '" << c << "' at row " << row
              << ", column " << col;
          throw LayoutError(msg.str());
        }
      }
      layout.cells.push_back(cell);
    }
    ++row;
  }
  layout.height = row;
  if (layout.height == 0) throw LayoutError("layout is empty");
  return layout;
}

Layout ParseLayoutString(const std::string& text) {
  std::istringstream in(text);
  return ParseLayout(in);
}

Layout LoadLayout(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LayoutError("cannot open layout file " + path);
  return ParseLayout(in);
}

std::string FormatLayout(const Layout& layout) {
  std::string out;
  for (int r = 0; r < layout.height; ++r) {
    for (int c = 0; c < layout.width; ++c) {
      const int cell = layout.CellIndex(r, c);
      char ch = '.';
      switch (layout.cells[cell]) {
        case Cell::kHighTarget: ch = 'R'; break;
        case Cell::kLowTarget: ch = 'Y'; break;
        case Cell::kTrap: ch = 'X'; break;
        case Cell::kFree:
          if (std::find(layout.start_cells.begin(), layout.start_cells.end(),
                        cell) != layout.start_cells.end()) {
            ch = 'S';
          }
          break;
      }
      out.push_back(ch);
    }
    out.push_back('\n');
  }
  return out;
}

void GridSpec::Validate() const {
  if (layout.width < 1 || layout.height < 1 ||
      static_cast<int>(layout.cells.size()) != layout.num_cells()) {
    throw LayoutError("layout dimensions are inconsistent");
  }
  const bool any_terminal = std::any_of(
      layout.cells.begin(), layout.cells.end(),
      [](Cell c) { return c != Cell::kFree; });
  if (!any_terminal) throw LayoutError("layout has no target or trap cell");
  const bool any_free = std::any_of(layout.cells.begin(), layout.cells.end(),
                                    [](Cell c) { return c == Cell::kFree; });
  if (!any_free) throw LayoutError("layout has no free cell");
  for (int cell : layout.start_cells) {
    if (cell < 0 || cell >= layout.num_cells() || layout.IsTerminal(cell)) {
      throw LayoutError("start cell " + std::to_string(cell) + " is not free");
    }
  }
  if (!(slip >= 0.0 && slip < 0.5)) {
    throw std::invalid_argument("slip must lie in [0, 0.5)");
  }
  if (!(discount > 0.0 && discount < 1.0)) {
    throw std::invalid_argument("discount must lie in (0, 1)");
  }
  if (!(p_obs >= 0.0 && p_obs <= 1.0)) {
    throw std::invalid_argument("p_obs must lie in [0, 1]");
  }
}

Layout DefaultLayout() {
  return ParseLayoutString(
      "..XRX.\n"
      "......\n"
      "......\n"
      "......\n"
      ".....X\n"
      "S....Y\n");
}

Kernel BuildSlipKernel(const Layout& layout, double slip) {
  if (!(slip >= 0.0 && slip < 0.5)) {
    throw std::invalid_argument("slip must lie in [0, 0.5)");
  }
  const int n = NumStates(layout);
  const int sink = SinkState(layout);
  Kernel kernel(n, kNumActions);
  for (int a = 0; a < kNumActions; ++a) kernel(sink, a, sink) = 1.0;
  for (int cell = 0; cell < layout.num_cells(); ++cell) {
    for (int a = 0; a < kNumActions; ++a) {
      if (layout.IsTerminal(cell)) {
        kernel(cell, a, sink) = 1.0;
        continue;
      }
      kernel(cell, a, Move(layout, cell, a)) += 1.0 - 2.0 * slip;
      kernel(cell, a, Move(layout, cell, kLateral[a][0])) += slip;
      kernel(cell, a, Move(layout, cell, kLateral[a][1])) += slip;
    }
  }
  return kernel;
}

Mdp BuildGridworldMdp(const GridSpec& spec) {
  spec.Validate();
  const Layout& layout = spec.layout;
  const int n = NumStates(layout);
  Mdp mdp;
  mdp.transition = BuildSlipKernel(layout, spec.slip);
  mdp.reward_victim = Eigen::MatrixXd::Zero(n, kNumActions);
  mdp.reward_attacker = Eigen::MatrixXd::Zero(n, kNumActions);
  for (int cell = 0; cell < layout.num_cells(); ++cell) {
    if (!layout.IsTerminal(cell)) continue;
    mdp.reward_victim.row(cell).setConstant(spec.victim.For(layout.cells[cell]));
    mdp.reward_attacker.row(cell).setConstant(spec.attacker.For(layout.cells[cell]));
  }
  mdp.initial_dist = Eigen::VectorXd::Zero(n);
  if (!layout.start_cells.empty()) {
    for (int cell : layout.start_cells) {
      mdp.initial_dist(cell) += 1.0 / static_cast<double>(layout.start_cells.size());
    }
  } else {
    int free_count = 0;
    for (int cell = 0; cell < layout.num_cells(); ++cell) {
      if (!layout.IsTerminal(cell)) ++free_count;
    }
    for (int cell = 0; cell < layout.num_cells(); ++cell) {
      if (!layout.IsTerminal(cell)) mdp.initial_dist(cell) = 1.0 / free_count;
    }
  }
  mdp.discount = spec.discount;
  return mdp;
}

PerturbationSet BuildPerturbationSet(const GridSpec& spec,
                                     std::span<const double> slips) {
  spec.Validate();
  PerturbationSet pset;
  pset.kernels.push_back(BuildSlipKernel(spec.layout, spec.slip));
  for (double slip : slips) {
    pset.kernels.push_back(BuildSlipKernel(spec.layout, slip));
  }
  for (int k = 1; k < pset.num_modes(); ++k) {
    pset.budget = std::max(pset.budget, KernelDistance(pset.kernels[k], pset.kernels[0]));
  }
  return pset;
}

std::vector<double> SlipsForDelta(double slip, double delta) {
  return {std::max(slip - delta, 0.0), slip + delta};
}

Emission BuildEmission(const GridSpec& spec) {
  if (!(spec.p_obs >= 0.0 && spec.p_obs <= 1.0)) {
    throw std::invalid_argument("p_obs must lie in [0, 1]");
  }
  const int n = NumStates(spec.layout);
  Emission emission;
  emission.prob = Eigen::MatrixXd::Zero(n, n + 1);
  for (int s = 0; s < n; ++s) {
    emission.prob(s, s) = spec.p_obs;
    emission.prob(s, n) += 1.0 - spec.p_obs;
  }
  return emission;
}

}  // namespace bdplan::gridworld
