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

#ifndef BDPLAN_CONFIG_HPP_
#define BDPLAN_CONFIG_HPP_

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace bdplan {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat `key = value` file. '#' starts a comment; blank lines are ignored;
// duplicate keys are an error.
class KeyValueConfig {
 public:
  static KeyValueConfig Parse(std::istream& in, const std::string& source = "<input>");
  static KeyValueConfig Load(const std::string& path);

  bool Has(const std::string& key) const { return values_.count(key) != 0; }
  void Set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string GetString(const std::string& key, const std::string& fallback) const;
  double GetDouble(const std::string& key, double fallback) const;
  int GetInt(const std::string& key, int fallback) const;
  std::uint64_t GetUint64(const std::string& key, std::uint64_t fallback) const;
  bool GetBool(const std::string& key, bool fallback) const;
  std::vector<double> GetDoubleList(const std::string& key,
                                    const std::vector<double>& fallback) const;

  // Keys present in the file that are not in `known`.
  std::vector<std::string> UnknownKeys(const std::set<std::string>& known) const;

  const std::string& source() const { return source_; }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::string source_;
  std::map<std::string, std::string> values_;
};

// Parses "0, 0.1,0.2" into doubles. Throws ConfigError naming `what`.
std::vector<double> ParseDoubleList(const std::string& text, const std::string& what);

}  // namespace bdplan

#endif  // BDPLAN_CONFIG_HPP_
