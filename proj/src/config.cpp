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

#include "dnls/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dnls/io.hpp"

namespace dnls {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double to_double(const std::string& key, const std::string& text) {
  try {
    size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects a number, got '" + text + "'");
  }
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (!kv.values_.emplace(key, value).second)
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }
  return kv;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string KeyValueConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("config: missing key '" + key + "'");
  touched_.insert(key);
  return it->second;
}

std::string KeyValueConfig::get(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

double KeyValueConfig::get_double(const std::string& key) const { return to_double(key, get(key)); }

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get(key);
  try {
    size_t used = 0;
    const long long out = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
  }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: key '" + key + "' expects true/false, got '" + v + "'");
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  std::istringstream in(get(key));
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(key, item));
  }
  return out;
}

std::vector<std::string> KeyValueConfig::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) out.push_back(k);
  return out;
}

std::vector<std::string> KeyValueConfig::unused() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (!touched_.count(k)) out.push_back(k);
  return out;
}

SolverConfig<double> solver_config_from(const KeyValueConfig& kv) {
  SolverConfig<double> c;
  c.n = static_cast<Index>(kv.get_int("n", c.n));
  c.length = kv.get_double("L", c.length);
  c.s = kv.get_double("s", c.s);
  c.dt = kv.get_double("dt", c.dt);
  c.t_final = kv.get_double("T", c.t_final);
  c.truncation = static_cast<int>(kv.get_int("J", c.truncation));
  c.threshold = kv.get_double("N", c.threshold);
  if (kv.has("beta")) c.beta_override = kv.get_doubles("beta");
  c.picard_tol = kv.get_double("picard_tol", c.picard_tol);
  c.picard_max_iters = static_cast<int>(kv.get_int("picard_max_iters", c.picard_max_iters));
  c.c_hat = kv.get_double("c_hat", c.c_hat);
  c.allow_noncompliant = kv.get_bool("allow_noncompliant", c.allow_noncompliant);
  c.budget = kv.get_double("budget", c.budget);
  // keys consumed elsewhere
  for (const char* k : {"initial", "epsilon", "c_hat_samples", "seed", "output", "remainder_samples", "tolerance"})
    if (kv.has(k)) kv.get(k);
  const auto extra = kv.unused();
  if (!extra.empty()) throw ConfigError("config: unknown key '" + extra.front() + "'");
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

SpectralField<double> initial_field_from(const KeyValueConfig& kv, const FrequencyGrid<double>& grid) {
  const std::string kind = kv.get("initial", "gaussian");
  if (kind == "zero") return SpectralField<double>(grid);
  if (kind == "gaussian") {
    const double eps = kv.get_double("epsilon", 0.1);
    return field_from_function(grid, [eps](double x) { return std::complex<double>(eps * std::exp(-x * x / 4)); });
  }
  if (kind.rfind("field:", 0) == 0) {
    auto f = load_field(kind.substr(6));
    if (f.grid() != grid) throw ConfigError("config: field file grid does not match (n, L)");
    return f;
  }
  throw ConfigError("config: unknown initial datum '" + kind + "'");
}

}  // namespace dnls
