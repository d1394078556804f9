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

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace bdplan {

namespace {

std::string Trim(const std::string& s) {
  const auto begin = std::find_if_not(s.begin(), s.end(),
                                      [](unsigned char c) { return std::isspace(c); });
  const auto end = std::find_if_not(s.rbegin(), s.rend(),
                                    [](unsigned char c) { return std::isspace(c); })
                       .base();
  return begin < end ? std::string(begin, end) : std::string();
}

[[noreturn]] void BadValue(const std::string& key, const std::string& value,
                           const char* expected) {
  throw ConfigError("config field '" + key + "': cannot parse '" + value +
                    "' as " + expected);
}

double ToDouble(const std::string& key, const std::string& text) {
  // from_chars for double is not available in every libstdc++ we target.
  std::istringstream in(text);
  double v = 0.0;
  in >> v;
  if (in.fail() || !(in >> std::ws).eof()) BadValue(key, text, "a number");
  return v;
}

}  // namespace

KeyValueConfig KeyValueConfig::Parse(std::istream& in, const std::string& source) {
  KeyValueConfig config;
  config.source_ = source;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": empty key");
    }
    if (!config.values_.emplace(key, value).second) {
      throw ConfigError(source + ":" + std::to_string(line_no) +
                        ": duplicate key '" + key + "'");
    }
  }
  return config;
}

KeyValueConfig KeyValueConfig::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return Parse(in, path);
}

std::string KeyValueConfig::GetString(const std::string& key,
                                      const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::GetDouble(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : ToDouble(key, it->second);
}

int KeyValueConfig::GetInt(const std::string& key, int fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& text = it->second;
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    BadValue(key, text, "an integer");
  }
  return v;
}

std::uint64_t KeyValueConfig::GetUint64(const std::string& key,
                                        std::uint64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& text = it->second;
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    BadValue(key, text, "an unsigned 64-bit integer");
  }
  return v;
}

bool KeyValueConfig::GetBool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  BadValue(key, v, "a boolean");
}

std::vector<double> KeyValueConfig::GetDoubleList(
    const std::string& key, const std::vector<double>& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : ParseDoubleList(it->second, key);
}

std::vector<std::string> KeyValueConfig::UnknownKeys(
    const std::set<std::string>& known) const {
  std::vector<std::string> unknown;
  for (const auto& [key, value] : values_) {
    if (known.count(key) == 0) unknown.push_back(key);
  }
  return unknown;
}

std::vector<double> ParseDoubleList(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item = Trim(item);
    if (item.empty()) BadValue(what, text, "a comma-separated list of numbers");
    out.push_back(ToDouble(what, item));
  }
  return out;
}

}  // namespace bdplan
