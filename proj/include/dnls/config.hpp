// Copyright 2026 The dnls-nfr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DNLS_CONFIG_HPP
#define DNLS_CONFIG_HPP

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dnls/solvers.hpp"

namespace dnls {

/// Malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` file. '#' starts a comment, blank lines are ignored,
/// lists are comma separated. Keys are case sensitive and may appear once.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;

  std::vector<std::string> keys() const;
  /// Keys never read through a getter.
  std::vector<std::string> unused() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> touched_;
};

/// Reads the solver keys; see README for the annotated list. Unknown keys
/// raise ConfigError.
SolverConfig<double> solver_config_from(const KeyValueConfig& kv);

/// Initial datum named by the `initial` key: `gaussian` (amplitude
/// `epsilon`, profile e^{-x^2/4}), `zero`, or `field:<path>`.
SpectralField<double> initial_field_from(const KeyValueConfig& kv, const FrequencyGrid<double>& grid);

}  // namespace dnls

#endif  // DNLS_CONFIG_HPP
