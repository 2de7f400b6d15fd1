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

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "dnls/solvers.hpp"

using namespace dnls;
using C = std::complex<double>;

namespace {

SolverConfig<double> small_config() {
  SolverConfig<double> c;
  c.n = 16;
  c.length = 20;
  c.s = 0.6;
  c.dt = 1e-3;
  c.t_final = 0.02;
  c.truncation = 1;
  c.threshold = 4;
  return c;
}

SpectralField<double> bump(const FrequencyGrid<double>& g, double eps) {
  return field_from_function(g, [eps](double x) { return C(eps * std::exp(-x * x / 4)); });
}

}  // namespace

TEST_SUITE("solvers") {

TEST_CASE("config validation") {
  auto c = small_config();
  CHECK_NOTHROW(c.validate());
  CHECK(c.steps() == 20);
  c.t_final = 0.0205;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_config();
  c.truncation = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_config();
  c.threshold = 1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("compliance arithmetic") {
  auto c = small_config();
  c.c_hat = 0.5;
  const auto v0 = bump(c.grid(), 0.1);
  const auto k = check_compliance(c, v0);
  const double R = 2 * hs_norm(v0, 0.6);
  CHECK(k.radius == doctest::Approx(R));
  CHECK(k.n_min == doctest::Approx(4 * std::pow(R, 4)));
  CHECK(k.t1 == doctest::Approx(1 / (6 * 1.5 * std::pow(R, 4))));
  CHECK(k.t_max == doctest::Approx(std::min(k.t1, 1 / (6 * 0.5 * 2 * R * R))));
  CHECK(k.compliant());
  c.c_hat = 0;  // unmeasured constant is never compliant
  CHECK(!check_compliance(c, v0).compliant());
}

TEST_CASE("trajectory invariants") {
  FrequencyGrid<double> g(8, 1.0), h(8, 2.0);
  Trajectory<double> tr;
  tr.push(0.0, SpectralField<double>(g));
  CHECK_THROWS_AS(tr.push(0.0, SpectralField<double>(g)), std::invalid_argument);
  CHECK_THROWS_AS(tr.push(0.1, SpectralField<double>(h)), std::invalid_argument);
  tr.push(0.1, SpectralField<double>(g));
  CHECK(tr.size() == 2);
}

TEST_CASE("reference solver keeps zero and conserves mass") {
  auto c = small_config();
  c.n = 64;
  c.t_final = 0.2;
  const auto z = solve_reference(SpectralField<double>(c.grid()), c);
  CHECK(z.back().is_zero());
  const auto u0 = bump(c.grid(), 1.0);
  const auto tr = solve_reference(u0, c);
  const double m0 = hs_norm(tr.fields.front(), 0.0);
  CHECK(hs_norm(tr.back(), 0.0) == doctest::Approx(m0).epsilon(1e-10));
  CHECK(hs_norm(tr.fields.front(), 0.0) == doctest::Approx(hs_norm(u0, 0.0)).epsilon(1e-12));
  // recovered u is as massive as u0
  CHECK(hs_norm(recover_u(tr.back(), tr.times.back()), 0.0) == doctest::Approx(hs_norm(u0, 0.0)).epsilon(1e-10));
}

TEST_CASE("reference solver is fourth order") {
  auto c = small_config();
  c.n = 64;
  c.t_final = 0.4;
  const auto v0 = gauge_forward(bump(c.grid(), 1.0));
  const auto a = integrate_reference(v0, c, 0.04).back();
  const auto b = integrate_reference(v0, c, 0.02).back();
  const auto d = integrate_reference(v0, c, 0.01).back();
  const double ratio = hs_norm(a - b, 0.0) / hs_norm(b - d, 0.0);
  CHECK(ratio > 16.0 / 3);
  CHECK(ratio < 48.0);
}

TEST_CASE("reference solver flags blow-up") {
  auto c = small_config();
  c.dt = 0.01;
  c.t_final = 1.0;
  const auto v0 = bump(c.grid(), 6.0);
  CHECK_THROWS_AS(integrate_reference(v0, c), BlowUp);
}

TEST_CASE("Picard map of zero data") {
  auto c = small_config();
  c.c_hat = 1;
  const SpectralField<double> z(c.grid());
  const auto tr = solve_normal_form(z, c);
  CHECK(tr.iterations == 1);
  for (const auto& f : tr.fields) CHECK(f.is_zero());
}

TEST_CASE("non-compliant parameters need an override") {
  auto c = small_config();
  c.c_hat = 0;
  const auto v0 = bump(c.grid(), 0.1);
  CHECK_THROWS_AS(solve_normal_form(v0, c), std::invalid_argument);
  c.allow_noncompliant = true;
  const auto tr = solve_normal_form(v0, c);
  CHECK(!tr.compliant);
}

TEST_CASE("Picard iteration reports non-convergence") {
  auto c = small_config();
  c.allow_noncompliant = true;
  c.picard_max_iters = 1;
  c.picard_tol = 1e-300;
  const auto v0 = bump(c.grid(), 0.1);
  try {
    solve_normal_form(v0, c);
    FAIL("expected NonConvergence");
  } catch (const NonConvergence<double>& e) {
    CHECK(e.residuals.size() == 1);
  }
}

TEST_CASE("first Picard iterate starts at the data") {
  auto c = small_config();
  const auto v0 = gauge_forward(bump(c.grid(), 0.1));
  const auto g1 = picard_map(constant_trajectory(v0, c), v0, c);
  CHECK(g1.size() == static_cast<size_t>(c.steps() + 1));
  CHECK((g1.fields.front().coeffs() - v0.coeffs()).norm() == 0.0);
  auto shorter = c;
  shorter.t_final = 0.01;
  c.allow_noncompliant = true;
  CHECK_THROWS_AS(solve_normal_form(v0, c, std::optional<Trajectory<double>>(constant_trajectory(v0, shorter))), std::invalid_argument);
}

TEST_CASE("solvers agree on small data") {
  auto c = small_config();
  c.c_hat = measure_c_hat(c, 2, 5);
  CHECK(c.c_hat > 0);
  const auto xv = cross_validate(bump(c.grid(), 0.1), c, 2);
  CHECK(xv.compliant);
  CHECK(xv.final_discrepancy() <= 1e-2 * xv.v0_norm);
  CHECK(xv.remainder_norm.size() == 2);
}

TEST_CASE("contraction on nearby trajectories") {
  auto c = small_config();
  c.c_hat = 1;
  const auto v0 = gauge_forward(bump(c.grid(), 0.1));
  const auto a = constant_trajectory(v0, c);
  auto b = a;
  for (auto& f : b.fields) f = 1.01 * f;
  CHECK(contraction_ratio(a, b, v0, c) < 1.0);
  CHECK_THROWS_AS(contraction_ratio(a, a, v0, c), std::invalid_argument);
}

}  // TEST_SUITE
