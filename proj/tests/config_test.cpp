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

#include "bdplan/config.hpp"

#include <functional>
#include <sstream>

#include <gtest/gtest.h>

namespace bdplan {
namespace {

KeyValueConfig FromText(const std::string& text) {
  std::istringstream in(text);
  return KeyValueConfig::Parse(in, "test.cfg");
}

std::string ErrorOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

TEST(KeyValueConfigTest, ParsesValuesAndComments) {
  const KeyValueConfig kv = FromText(
      "# header\n"
      "\n"
      "epsilon = 0.2   # trailing\n"
      "  batch_size=50\n"
      "seed = 18446744073709551615\n"
      "baseline = off\n"
      "layout = grids/a.txt\n"
      "alphas = 0, 0.3 ,0.5\n");
  EXPECT_DOUBLE_EQ(kv.GetDouble("epsilon", 0.0), 0.2);
  EXPECT_EQ(kv.GetInt("batch_size", 0), 50);
  EXPECT_EQ(kv.GetUint64("seed", 0), 18446744073709551615ULL);
  EXPECT_FALSE(kv.GetBool("baseline", true));
  EXPECT_EQ(kv.GetString("layout", ""), "grids/a.txt");
  EXPECT_EQ(kv.GetDoubleList("alphas", {}), (std::vector<double>{0.0, 0.3, 0.5}));
  EXPECT_TRUE(kv.Has("epsilon"));
  EXPECT_FALSE(kv.Has("header"));
}

TEST(KeyValueConfigTest, MissingKeysUseFallback) {
  const KeyValueConfig kv = FromText("");
  EXPECT_EQ(kv.GetDouble("x", 1.5), 1.5);
  EXPECT_EQ(kv.GetInt("x", -3), -3);
  EXPECT_TRUE(kv.GetBool("x", true));
  EXPECT_EQ(kv.GetDoubleList("x", {2.0}), std::vector<double>{2.0});
}

TEST(KeyValueConfigTest, SyntaxErrorsNameLine) {
  EXPECT_NE(ErrorOf([] { FromText("a = 1\njunk\n"); }).find("test.cfg:2"),
            std::string::npos);
  EXPECT_NE(ErrorOf([] { FromText(" = 1\n"); }).find("empty key"), std::string::npos);
  const std::string dup = ErrorOf([] { FromText("a = 1\nb = 2\na = 3\n"); });
  EXPECT_NE(dup.find("test.cfg:3"), std::string::npos);
  EXPECT_NE(dup.find("duplicate key 'a'"), std::string::npos);
}

TEST(KeyValueConfigTest, BadValuesNameField) {
  const KeyValueConfig kv = FromText(
      "epsilon = abc\nbatch_size = 2.5\nseed = -1\nbaseline = maybe\nalphas = 0,,1\n"
      "slip = 0.1x\n");
  for (const auto& [key, fn] : std::vector<std::pair<std::string, std::function<void()>>>{
           {"epsilon", [&] { kv.GetDouble("epsilon", 0); }},
           {"batch_size", [&] { kv.GetInt("batch_size", 0); }},
           {"seed", [&] { kv.GetUint64("seed", 0); }},
           {"baseline", [&] { kv.GetBool("baseline", false); }},
           {"alphas", [&] { kv.GetDoubleList("alphas", {}); }},
           {"slip", [&] { kv.GetDouble("slip", 0); }}}) {
    const std::string msg = ErrorOf(fn);
    EXPECT_NE(msg.find("'" + key + "'"), std::string::npos) << key << ": " << msg;
  }
}

TEST(KeyValueConfigTest, UnknownKeys) {
  const KeyValueConfig kv = FromText("a = 1\nb = 2\nc = 3\n");
  EXPECT_EQ(kv.UnknownKeys({"a", "c"}), std::vector<std::string>{"b"});
  EXPECT_TRUE(kv.UnknownKeys({"a", "b", "c"}).empty());
}

TEST(KeyValueConfigTest, MissingFile) {
  EXPECT_NE(ErrorOf([] { KeyValueConfig::Load("/nonexistent/x.cfg"); }).find("cannot open"),
            std::string::npos);
}

TEST(ParseDoubleListTest, AcceptsScientificAndNegative) {
  EXPECT_EQ(ParseDoubleList("1e-3, -2", "v"), (std::vector<double>{1e-3, -2.0}));
  EXPECT_TRUE(ParseDoubleList("", "v").empty());
}

}  // namespace
}  // namespace bdplan
