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

#include <fstream>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace bdplan::gridworld {
namespace {

GridSpec DefaultSpec() {
  GridSpec spec;
  spec.layout = DefaultLayout();
  return spec;
}

std::string ErrorOf(const std::string& text) {
  try {
    ParseLayoutString(text);
  } catch (const LayoutError& e) {
    return e.what();
  }
  return {};
}

TEST(ParseLayoutTest, ReadsCells) {
  const Layout layout = ParseLayoutString("S.R\nX.Y\n");
  EXPECT_EQ(layout.width, 3);
  EXPECT_EQ(layout.height, 2);
  EXPECT_EQ(layout.cells[2], Cell::kHighTarget);
  EXPECT_EQ(layout.cells[3], Cell::kTrap);
  EXPECT_EQ(layout.cells[5], Cell::kLowTarget);
  EXPECT_EQ(layout.start_cells, std::vector<int>{0});
}

TEST(ParseLayoutTest, ToleratesTrailingWhitespaceAndBlankLines) {
  const Layout layout = ParseLayoutString("\nS.R  \r\n\n..X\t\n");
  EXPECT_EQ(layout.width, 3);
  EXPECT_EQ(layout.height, 2);
}

TEST(ParseLayoutTest, ErrorsNamePosition) {
  const std::string bad_char = ErrorOf("S.R\n.Z.\n");
  EXPECT_NE(bad_char.find("'Z'"), std::string::npos);
  EXPECT_NE(bad_char.find("row 1"), std::string::npos);
  EXPECT_NE(bad_char.find("column 1"), std::string::npos);
  const std::string ragged = ErrorOf("S.R\n..\n");
  EXPECT_NE(ragged.find("row 1"), std::string::npos);
  EXPECT_NE(ragged.find("expected 3"), std::string::npos);
  EXPECT_FALSE(ErrorOf("\n\n").empty());
}

TEST(ParseLayoutTest, FormatRoundTrips) {
  const std::string text = "..XRX.\n......\nS....Y\n";
  EXPECT_EQ(FormatLayout(ParseLayoutString(text)), text);
  const Layout def = DefaultLayout();
  const Layout again = ParseLayoutString(FormatLayout(def));
  EXPECT_EQ(again.cells, def.cells);
  EXPECT_EQ(again.start_cells, def.start_cells);
}

TEST(ParseLayoutTest, ShippedFileMatchesDefault) {
  const Layout file = LoadLayout(std::string(BDPLAN_SOURCE_DIR) + "/data/layouts/default.txt");
  EXPECT_EQ(FormatLayout(file), FormatLayout(DefaultLayout()));
  EXPECT_THROW(LoadLayout("/nonexistent/layout.txt"), LayoutError);
}

TEST(GridSpecTest, RejectsDegenerateLayouts) {
  GridSpec spec;
  spec.layout = ParseLayoutString("...\n");
  EXPECT_THROW(spec.Validate(), LayoutError);
  spec.layout = ParseLayoutString("RX\n");
  EXPECT_THROW(spec.Validate(), LayoutError);
  spec.layout = DefaultLayout();
  spec.slip = 0.5;
  EXPECT_THROW(spec.Validate(), std::invalid_argument);
}

TEST(DefaultLayoutTest, Composition) {
  const Layout layout = DefaultLayout();
  EXPECT_EQ(layout.width, 6);
  EXPECT_EQ(layout.height, 6);
  int high = 0;
  int low = 0;
  int traps = 0;
  for (Cell c : layout.cells) {
    high += c == Cell::kHighTarget;
    low += c == Cell::kLowTarget;
    traps += c == Cell::kTrap;
  }
  EXPECT_EQ(high, 1);
  EXPECT_EQ(low, 1);
  EXPECT_EQ(traps, 3);
  ASSERT_EQ(layout.start_cells.size(), 1u);
  EXPECT_EQ(layout.start_cells[0], layout.CellIndex(5, 0));
}

TEST(SlipKernelTest, NoSlipIsDeterministic) {
  const Layout layout = DefaultLayout();
  const Kernel k = BuildSlipKernel(layout, 0.0);
  const int here = layout.CellIndex(2, 2);
  EXPECT_EQ(k(here, kNorth, layout.CellIndex(1, 2)), 1.0);
  EXPECT_EQ(k(here, kSouth, layout.CellIndex(3, 2)), 1.0);
  EXPECT_EQ(k(here, kEast, layout.CellIndex(2, 3)), 1.0);
  EXPECT_EQ(k(here, kWest, layout.CellIndex(2, 1)), 1.0);
  const int corner = layout.CellIndex(5, 0);
  EXPECT_EQ(k(corner, kWest, corner), 1.0);
  EXPECT_EQ(k(corner, kSouth, corner), 1.0);
}

TEST(SlipKernelTest, InteriorSlipSplitsMass) {
  const Layout layout = DefaultLayout();
  const Kernel k = BuildSlipKernel(layout, 0.1);
  const int here = layout.CellIndex(2, 2);
  EXPECT_NEAR(k(here, kNorth, layout.CellIndex(1, 2)), 0.8, 1e-15);
  EXPECT_NEAR(k(here, kNorth, layout.CellIndex(2, 3)), 0.1, 1e-15);
  EXPECT_NEAR(k(here, kNorth, layout.CellIndex(2, 1)), 0.1, 1e-15);
  EXPECT_EQ(k(here, kNorth, here), 0.0);
}

TEST(SlipKernelTest, MatchesOracleOnEveryFreeCell) {
  const Layout layout = DefaultLayout();
  for (double slip : {0.0, 0.1, 0.25, 0.4}) {
    const Kernel k = BuildSlipKernel(layout, slip);
    for (int r = 0; r < layout.height; ++r) {
      for (int c = 0; c < layout.width; ++c) {
        const int cell = layout.CellIndex(r, c);
        if (layout.IsTerminal(cell)) continue;
        for (int a = 0; a < kNumActions; ++a) {
          const Eigen::VectorXd expected = oracle::GridRowOracle(layout, r, c, a, slip);
          for (int t = 0; t < NumStates(layout); ++t) {
            ASSERT_NEAR(k(cell, a, t), expected(t), 1e-15)
                << "cell (" << r << "," << c << ") action " << a << " to " << t;
          }
        }
      }
    }
  }
}

TEST(SlipKernelTest, TerminalsAndSinkAbsorb) {
  const Layout layout = DefaultLayout();
  const Kernel k = BuildSlipKernel(layout, 0.1);
  const int sink = SinkState(layout);
  for (int cell = 0; cell < NumStates(layout); ++cell) {
    for (int a = 0; a < kNumActions; ++a) {
      double sum = 0.0;
      for (int t = 0; t < NumStates(layout); ++t) sum += k(cell, a, t);
      EXPECT_NEAR(sum, 1.0, 1e-12);
      if (cell == sink || (cell < layout.num_cells() && layout.IsTerminal(cell))) {
        EXPECT_EQ(k(cell, a, sink), 1.0);
      }
    }
  }
}

TEST(GridworldMdpTest, RewardsOnTerminalCells) {
  GridSpec spec = DefaultSpec();
  const Mdp mdp = BuildGridworldMdp(spec);
  EXPECT_TRUE(ValidateMdp(mdp).ok());
  const Layout& layout = spec.layout;
  for (int a = 0; a < kNumActions; ++a) {
    EXPECT_EQ(mdp.reward_victim(layout.CellIndex(0, 3), a), 20.0);
    EXPECT_EQ(mdp.reward_victim(layout.CellIndex(5, 5), a), 2.0);
    EXPECT_EQ(mdp.reward_victim(layout.CellIndex(0, 2), a), -10.0);
    EXPECT_EQ(mdp.reward_attacker(layout.CellIndex(0, 3), a), -20.0);
    EXPECT_EQ(mdp.reward_victim(layout.CellIndex(3, 3), a), 0.0);
    EXPECT_EQ(mdp.reward_victim(SinkState(layout), a), 0.0);
  }
  EXPECT_EQ(mdp.initial_dist(layout.CellIndex(5, 0)), 1.0);
  EXPECT_TRUE(mdp.IsAbsorbingZeroReward(SinkState(layout)));
}

TEST(GridworldMdpTest, NoStartMeansUniformOverFreeCells) {
  GridSpec spec;
  spec.layout = ParseLayoutString("..R\nX..\n");
  const Mdp mdp = BuildGridworldMdp(spec);
  EXPECT_NEAR(mdp.initial_dist.sum(), 1.0, 1e-15);
  EXPECT_NEAR(mdp.initial_dist(0), 0.25, 1e-15);
  EXPECT_EQ(mdp.initial_dist(2), 0.0);
  EXPECT_EQ(mdp.initial_dist(3), 0.0);
}

TEST(GridworldMdpTest, OptimalValueDoesNotGrowWithSlip) {
  GridSpec spec = DefaultSpec();
  double previous = 1e300;
  for (double slip : {0.0, 0.05, 0.1, 0.2, 0.3}) {
    spec.slip = slip;
    const double v = OptimalValue(BuildGridworldMdp(spec)).value.scalar_value;
    EXPECT_LE(v, previous + 1e-9) << "slip " << slip;
    previous = v;
  }
}

TEST(PerturbationSetTest, SameSlipReproducesNominal) {
  GridSpec spec = DefaultSpec();
  const std::vector<double> slips = {0.1};
  const PerturbationSet pset = BuildPerturbationSet(spec, slips);
  ASSERT_EQ(pset.num_modes(), 2);
  EXPECT_EQ(KernelDistance(pset.kernels[1], pset.kernels[0]), 0.0);
  EXPECT_EQ(pset.budget, 0.0);
}

TEST(PerturbationSetTest, BudgetIsRealizedDistance) {
  GridSpec spec = DefaultSpec();
  const std::vector<double> one = {0.0};
  EXPECT_NEAR(BuildPerturbationSet(spec, one).budget, 0.2, 1e-15);
  const std::vector<double> two = {0.0, 0.3};
  const PerturbationSet pset = BuildPerturbationSet(spec, two);
  EXPECT_EQ(pset.num_modes(), 3);
  EXPECT_NEAR(pset.budget, 0.4, 1e-15);
  EXPECT_TRUE(CheckDRectangular(pset).ok());
}

TEST(PerturbationSetTest, SlipsForDeltaClampsAtZero) {
  EXPECT_EQ(SlipsForDelta(0.1, 0.0), (std::vector<double>{0.1, 0.1}));
  const std::vector<double> wide = SlipsForDelta(0.1, 0.3);
  EXPECT_EQ(wide[0], 0.0);
  EXPECT_NEAR(wide[1], 0.4, 1e-15);
}

TEST(EmissionTest, PerfectObservationIsIdentity) {
  GridSpec spec = DefaultSpec();
  spec.p_obs = 1.0;
  const Emission e = BuildEmission(spec);
  const int n = NumStates(spec.layout);
  EXPECT_EQ(e.n_obs(), n + 1);
  EXPECT_EQ(e.prob.leftCols(n), Eigen::MatrixXd::Identity(n, n));
  EXPECT_EQ(e.prob.col(n).sum(), 0.0);
  EXPECT_EQ(EmptyObservation(spec.layout), n);
}

TEST(EmissionTest, NoisyObservation) {
  GridSpec spec = DefaultSpec();
  const Emission e = BuildEmission(spec);
  EXPECT_TRUE(e.Validate().ok());
  const int s = spec.layout.CellIndex(3, 4);
  EXPECT_NEAR(e.prob(s, s), 0.8, 1e-15);
  EXPECT_NEAR(e.prob(s, EmptyObservation(spec.layout)), 0.2, 1e-15);
  EXPECT_NEAR(e.prob.row(s).sum(), 1.0, 1e-15);
}

}  // namespace
}  // namespace bdplan::gridworld
