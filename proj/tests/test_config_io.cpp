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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "dnls/config.hpp"
#include "dnls/io.hpp"
#include "dnls/random.hpp"

using namespace dnls;

TEST_SUITE("config_io") {

TEST_CASE("key-value parsing") {
  const auto kv = KeyValueConfig::parse(
      "# comment\n"
      "n = 64   # trailing comment\n"
      "\n"
      "L=20\n"
      "beta = 3, 4\n"
      "allow_noncompliant = yes\n");
  CHECK(kv.get_int("n", 0) == 64);
  CHECK(kv.get_double("L") == 20.0);
  CHECK(kv.get_doubles("beta") == std::vector<double>{3.0, 4.0});
  CHECK(kv.get_bool("allow_noncompliant", false));
  CHECK(kv.get("missing", "x") == "x");
  CHECK_THROWS_AS(kv.get("missing"), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("just words\n"), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("n = x\n").get_int("n", 0), ConfigError);
}

TEST_CASE("solver config from keys") {
  const auto kv = KeyValueConfig::parse("n = 32\nL = 20\ns = 0.6\ndt = 0.001\nT = 0.1\nJ = 2\nN = 4\nepsilon = 0.1\n");
  const auto c = solver_config_from(kv);
  CHECK(c.n == 32);
  CHECK(c.truncation == 2);
  CHECK(c.threshold == 4.0);
  const auto u0 = initial_field_from(kv, c.grid());
  CHECK(hs_norm(u0, 0.0) > 0);
  CHECK_THROWS_AS(solver_config_from(KeyValueConfig::parse("n = 32\nbogus = 1\n")), ConfigError);
  CHECK_THROWS_AS(solver_config_from(KeyValueConfig::parse("n = 31\n")), ConfigError);
  CHECK_THROWS_AS(solver_config_from(KeyValueConfig::parse("T = 0.1005\n")), ConfigError);
  CHECK_THROWS_AS(initial_field_from(KeyValueConfig::parse("initial = square\n"), c.grid()), ConfigError);
  CHECK(initial_field_from(KeyValueConfig::parse("initial = zero\n"), c.grid()).is_zero());
}

TEST_CASE("field CSV round trip is exact") {
  FrequencyGrid<double> g(32, 17.3);
  auto rng = Philox4x32(9);
  const auto f = random_field(g, 0.6, rng);
  std::stringstream ss;
  write_field(ss, f);
  const auto back = read_field(ss);
  CHECK(back.grid() == g);
  CHECK((back.coeffs() - f.coeffs()).norm() == 0.0);

  const auto path = (std::filesystem::temp_directory_path() / "dnls_field_test.csv").string();
  save_field(path, f);
  const auto kv = KeyValueConfig::parse("initial = field:" + path + "\n");
  CHECK((initial_field_from(kv, g).coeffs() - f.coeffs()).norm() == 0.0);
  CHECK_THROWS_AS(initial_field_from(kv, FrequencyGrid<double>(16, 17.3)), ConfigError);
  std::filesystem::remove(path);
}

TEST_CASE("malformed field files are rejected") {
  for (const char* bad : {"", "n,L\n4,1\nk,re,im\n-2,0,0\n", "n,L\n4,1\nk,re,im\n-2,0,0\n-1,0,0\n0,0,0\n5,0,0\n",
                          "x,y\n", "n,L\n4,1\nk,re,im\n-2,0,0\n-1,0,0\n0,0,0\n1,nan,0\n"}) {
    std::stringstream ss(bad);
    CHECK_THROWS(read_field(ss));
  }
}

TEST_CASE("trajectory CSV") {
  FrequencyGrid<double> g(4, 1.0);
  Trajectory<double> tr;
  tr.kind = "reference";
  tr.push(0.0, single_mode(g, 1, {1.0, 0.0}));
  tr.push(0.5, single_mode(g, -1, {0.0, 2.0}));
  std::stringstream ss;
  write_trajectory(ss, tr);
  std::string line;
  int rows = 0;
  bool header = false;
  while (std::getline(ss, line)) {
    if (line == "t,k,re,im") header = true;
    else if (header) ++rows;
  }
  CHECK(header);
  CHECK(rows == 8);
}

}  // TEST_SUITE
