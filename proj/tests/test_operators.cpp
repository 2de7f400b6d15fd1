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
#include "dnls/operators.hpp"
#include "dnls/random.hpp"

using namespace dnls;
using C = std::complex<double>;

namespace {

// Independent oracle: loops over all input triples and scatters into the
// output mode xi1 - xi2 + xi3 when it lies on the grid.
template <typename Mult>
SpectralField<double> naive_trilinear(const SpectralField<double>& a, const SpectralField<double>& b,
                                      const SpectralField<double>& c, Mult m) {
  const auto& g = a.grid();
  const double w = 1.0 / (g.length() * g.length());
  ComplexVector<double> out = ComplexVector<double>::Zero(g.size());
  for (Index k1 = g.min_mode(); k1 <= g.max_mode(); ++k1)
    for (Index k2 = g.min_mode(); k2 <= g.max_mode(); ++k2)
      for (Index k3 = g.min_mode(); k3 <= g.max_mode(); ++k3) {
        const Index k = k1 - k2 + k3;
        if (!g.contains_mode(k)) continue;
        const double x1 = k1 * g.dxi(), x2 = k2 * g.dxi(), x3 = k3 * g.dxi();
        out[g.slot(k)] += w * m(x1, x2, x3) * a.at_mode(k1) * std::conj(b.at_mode(k2)) * c.at_mode(k3);
      }
  return SpectralField<double>(g, out);
}

double rel_err(const SpectralField<double>& a, const SpectralField<double>& b) {
  return (a.coeffs() - b.coeffs()).norm() / std::max(b.coeffs().norm(), 1e-300);
}

}  // namespace

TEST_SUITE("operators") {

TEST_CASE("modulation factorization") {
  CHECK(modulation(0.0, 1.0, -1.0) == 4.0);
  const double x1 = 0.3, x2 = -1.7, x3 = 2.2, x = x1 - x2 + x3;
  CHECK(modulation(x1, x2, x3) == doctest::Approx(x * x - x1 * x1 + x2 * x2 - x3 * x3));
}

TEST_CASE("weak kernel requires M >= 1") {
  CHECK_THROWS_AS(TrilinearKernel<double>::weak(0.5), std::invalid_argument);
  CHECK_NOTHROW(TrilinearKernel<double>::weak(1.0));
}

TEST_CASE("frequency sums match the naive triple loop") {
  FrequencyGrid<double> g(16, 7.0);
  for (int trial = 0; trial < 3; ++trial) {
    auto rng = Philox4x32::for_case(42, 3, static_cast<std::uint32_t>(trial));
    const auto a = random_field(g, 0.6, rng), b = random_field(g, 0.6, rng), c = random_field(g, 0.6, rng);
    const double t = 0.21;
    const auto raw = TrilinearKernel<double>::raw(t);
    CHECK(rel_err(eval_trilinear(raw, a, b, c),
                  naive_trilinear(a, b, c, [&](double x1, double x2, double x3) {
                    return std::exp(C(0, modulation(x1, x2, x3) * t)) * x2;
                  })) < 1e-12);
    CHECK(rel_err(eval_trilinear(TrilinearKernel<double>::phi(), a, b, c),
                  naive_trilinear(a, b, c, [](double x1, double x2, double x3) {
                    return C(std::abs(x2) / std::sqrt(std::sqrt(1 + std::pow(modulation(x1, x2, x3), 2))));
                  })) < 1e-12);
    CHECK(rel_err(eval_trilinear(TrilinearKernel<double>::weak(3.0), a, b, c),
                  naive_trilinear(a, b, c, [](double x1, double x2, double x3) {
                    const double p = modulation(x1, x2, x3);
                    return std::abs(p) > 3.0 ? C(std::abs(x2) / std::sqrt(1 + p * p)) : C(0);
                  })) < 1e-12);
  }
}

TEST_CASE("single-mode closed forms") {
  // dxi = 1: modes (0, 1, -1) land on xi = -2 with Phi = 4
  FrequencyGrid<double> g(8, 2 * std::numbers::pi);
  const auto a = single_mode(g, 0, C(1)), b = single_mode(g, 1, C(1)), c = single_mode(g, -1, C(1));
  const double w = 1 / (4 * std::numbers::pi * std::numbers::pi);
  const auto out = eval_trilinear(TrilinearKernel<double>::phi(), a, b, c);
  CHECK(std::abs(out.at_mode(-2) - C(w / std::pow(17.0, 0.25))) < 1e-15);
  for (Index k = g.min_mode(); k <= g.max_mode(); ++k)
    if (k != -2) CHECK(out.at_mode(k) == C(0));
  const double t = 0.3;
  const auto r = eval_trilinear(TrilinearKernel<double>::raw(t), a, b, c);
  CHECK(std::abs(r.at_mode(-2) - w * std::polar(1.0, 4 * t)) < 1e-15);
  CHECK(eval_trilinear(TrilinearKernel<double>::weak(4.0), a, b, c).at_mode(-2) == C(0));
  CHECK(std::abs(eval_trilinear(TrilinearKernel<double>::weak(3.9), a, b, c).at_mode(-2) - C(w / std::sqrt(17.0))) <
        1e-15);
}

TEST_CASE("zero input gives zero output") {
  FrequencyGrid<double> g(16, 5.0);
  auto rng = Philox4x32(1);
  const auto a = random_field(g, 0.6, rng);
  const SpectralField<double> z(g);
  CHECK(eval_trilinear(TrilinearKernel<double>::phi(), a, z, a).is_zero());
  CHECK(eval_quintic(z, 0.4).is_zero());
}

TEST_CASE("cubic term: frequency route equals physical route") {
  FrequencyGrid<double> g(32, 9.0);
  auto rng = Philox4x32(2);
  const auto v = random_field(g, 0.6, rng);
  for (double t : {0.0, 0.17}) CHECK(rel_err(eval_cubic_T(v, t), eval_cubic_T_physical(v, t)) < 1e-9);
}

TEST_CASE("quintic term against a direct physical product") {
  // with all modes well inside the grid the padded product is exact
  FrequencyGrid<double> g(32, 2 * std::numbers::pi);
  SpectralField<double> v(g);
  v[g.slot(1)] = C(0.5, 0.1);
  v[g.slot(-2)] = C(-0.2, 0.3);
  const double t = 0.05;
  const auto q = eval_quintic(v, t);
  const auto sv = to_physical(free_propagate(v, t));
  ComplexVector<double> p(sv.size());
  for (Index j = 0; j < sv.size(); ++j) p[j] = C(0, 0.5) * std::norm(sv[j]) * std::norm(sv[j]) * sv[j];
  const auto expect = free_propagate(to_spectral(p, g), -t);
  CHECK(rel_err(q, expect) < 1e-12);
}

TEST_CASE("split identity") {
  FrequencyGrid<double> g(16, 6.0);
  auto rng = Philox4x32(4);
  const auto v = random_field(g, 0.6, rng);
  for (double N : {1.0 + 1e-9, 2.0, 9.5, 1e6}) {
    const auto [near, away] = split_cubic(v, 0.11, N);
    CHECK(rel_err(near + away, eval_cubic_T(v, 0.11)) < 1e-13);
  }
  const auto [near, away] = split_cubic(v, 0.0, 1e9);
  CHECK(away.is_zero());
  CHECK_THROWS_AS(split_cubic(v, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("iterated maps compose the one-generation operators") {
  FrequencyGrid<double> g(16, 6.0);
  auto rng = Philox4x32(8);
  std::vector<SpectralField<double>> in;
  for (int k = 0; k < 5; ++k) in.push_back(random_field(g, 0.6, rng));
  OrderedTree t;
  t = t.grow(t.node(0).children[2]);  // r^(2) in slot 3
  const auto phi = TrilinearKernel<double>::phi();
  const auto direct = eval_trilinear(phi, in[0], in[1], eval_trilinear(phi, in[2], in[3], in[4]));
  CHECK(rel_err(iterated_map_S<double>(t, in), direct) < 1e-13);
  const std::vector<double> cut{2.0, 50.0};
  const auto weak = eval_trilinear(TrilinearKernel<double>::weak(2.0), in[0], in[1],
                                   eval_trilinear(TrilinearKernel<double>::weak(50.0), in[2], in[3], in[4]));
  CHECK(rel_err(iterated_map_S_weak<double>(t, in, cut), weak) < 1e-13);
  CHECK_THROWS_AS(iterated_map_S<double>(t, std::span(in).first(4)), std::invalid_argument);
  CHECK_THROWS_AS(iterated_map_S_weak<double>(t, in, std::span(cut).first(1)), std::invalid_argument);
}

TEST_CASE("cubic derivative product") {
  FrequencyGrid<double> g(32, 8.0);
  auto rng = Philox4x32(12);
  const auto a = random_field(g, 0.6, rng), b = random_field(g, 0.6, rng), c = random_field(g, 0.6, rng);
  // (a * d_x conj(b) * c)^ = -i * raw(t=0) trilinear form of (a, b, c)
  const auto freq = C(0, -1) * eval_trilinear(TrilinearKernel<double>::raw(0.0), a, b, c);
  CHECK(rel_err(cubic_derivative_product(a, b, c), freq) < 1e-10);
  CHECK(cubic_derivative_weaknorm_ratio(a, b, c, 0.6) > 0);
  CHECK_THROWS_AS(cubic_derivative_weaknorm_ratio(a, b, c, 0.5), std::invalid_argument);
}

}  // TEST_SUITE
