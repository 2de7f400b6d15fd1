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

#ifndef DNLS_HARNESS_HPP
#define DNLS_HARNESS_HPP

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace dnls {

using Json = nlohmann::ordered_json;

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"trees",      "operator_bounds", "weak_bounds",
                                              "decay",      "solver_xval",     "conservation"};
  return names;
}

/// Everything a suite run depends on. Lists left empty take the suite's
/// defaults when the spec is normalized; tolerances are always explicit.
struct ExperimentSpec {
  std::string suite;
  std::vector<double> s;
  std::vector<double> N;
  std::vector<int> J;
  std::vector<int> n;
  std::vector<double> L;
  std::vector<double> M;
  std::vector<std::string> families;  // decay: NFR families to fit
  int samples = 0;
  std::uint64_t seed = 20260101;
  double epsilon = 0.1;
  double T = 0.1;
  double dt = 1e-3;
  std::map<std::string, double> params;  // suite-specific knobs
  std::map<std::string, double> tolerances;
  std::string output;

  /// Suite defaults (the desk-scale acceptance settings) for `suite`.
  static ExperimentSpec defaults(const std::string& suite);

  Json to_json() const;
  /// Keys missing from `j` keep the suite defaults.
  static ExperimentSpec from_json(const Json& j);

  /// FNV-1a 64 of the canonical JSON (output directory excluded), hex.
  std::string hash() const;

  bool has_tolerance(const std::string& key) const { return tolerances.count(key) != 0; }
  double tolerance(const std::string& key) const;
};

/// Raised for malformed specs or reports; the CLI maps it to exit code 2.
class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs one suite. The report carries the spec, its hash, per-case records
/// under "cases" (inputs, measured values, pass flag), plot-ready "series",
/// the overall "pass" flag and wall-clock timing under "timing".
Json run_suite(const ExperimentSpec& spec);

/// Writes <dir>/<suite>_report.json, <dir>/<suite>_cases.csv and
/// <dir>/<suite>_series.csv.
void write_report(const Json& report, const std::string& dir);

/// Regenerates a report from its embedded spec and compares every measured
/// value exactly. Result: {"identical": bool, "diffs": [...]}. A spec whose
/// hash no longer matches is flagged as a diff without rerunning.
Json replay(const Json& report);

}  // namespace dnls

#endif  // DNLS_HARNESS_HPP
