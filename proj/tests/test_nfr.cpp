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
#include "dnls/nfr.hpp"
#include "dnls/random.hpp"

using namespace dnls;
using C = std::complex<double>;

namespace {

double rel_err(const SpectralField<double>& a, const SpectralField<double>& b) {
  const double scale = std::max(a.coeffs().norm(), b.coeffs().norm());
  if (scale == 0) return 0;
  return (a.coeffs() - b.coeffs()).norm() / scale;
}

C oriented(C z, int sigma) { return sigma > 0 ? z : std::conj(z); }

// Brute-force reference for one family at level J >= 1: every tree, every
// assignment of grid modes to its leaves, predicates recomputed here from the
// oriented modulations. Cost n^{2J+1} |T(J)|, small grids only.
SpectralField<double> brute_force(NfrFamily family, int J, const SpectralField<double>& v, double t,
                                  const ThresholdSchedule<double>& sched) {
  const auto& g = v.grid();
  const Index n = g.size();
  const double w = 1.0 / (g.length() * g.length());
  const double N = sched.threshold();
  const auto T = eval_cubic_T_physical(v, t);
  const auto Q = eval_quintic(v, t);
  ComplexVector<double> out = ComplexVector<double>::Zero(n);

  // T(v)(xi_b) restricted to |mt + sigma Phi| <= beta_J |mt|
  auto restricted_T = [&](Index kb, double mt, int sigma) {
    C acc(0);
    for (Index k1 = g.min_mode(); k1 <= g.max_mode(); ++k1)
      for (Index k2 = g.min_mode(); k2 <= g.max_mode(); ++k2) {
        const Index k3 = kb - k1 + k2;
        if (!g.contains_mode(k3)) continue;
        const double x1 = k1 * g.dxi(), x2 = k2 * g.dxi(), x3 = k3 * g.dxi();
        const double phi = 2 * (x2 - x1) * (x2 - x3);
        if (std::abs(mt + sigma * phi) > sched.beta(J) * std::abs(mt)) continue;
        acc += C(0, 1) * w * std::polar(x2, phi * t) * v.at_mode(k1) * std::conj(v.at_mode(k2)) * v.at_mode(k3);
      }
    return oriented(acc, sigma);
  };

  for (const auto& tree : enumerate_trees(J)) {
    const auto leaves = tree.terminals();
    const size_t nl = leaves.size();
    std::vector<int> sigma;
    for (NodeId a : leaves) sigma.push_back(tree.orientation(a));
    double P = 1;
    for (int j = 2; j <= J; ++j) P *= -tree.orientation(tree.root_of_generation(j));
    std::vector<Index> idx(nl, 0);
    while (true) {
      // integer modes on every node
      std::vector<Index> k(static_cast<size_t>(tree.node_count()), 0);
      for (size_t q = 0; q < nl; ++q) k[size_t(leaves[q])] = g.min_mode() + idx[q];
      bool on_grid = true;
      for (NodeId id = tree.node_count() - 1; id >= 0; --id) {
        const auto& nd = tree.node(id);
        if (nd.terminal()) continue;
        k[size_t(id)] = k[size_t(nd.children[0])] - k[size_t(nd.children[1])] + k[size_t(nd.children[2])];
        on_grid = on_grid && g.contains_mode(k[size_t(id)]);
      }
      if (on_grid) {
        std::vector<double> mu_t;
        double acc_mu = 0, mult = 1;
        bool in_F = true;
        for (int j = 1; j <= J; ++j) {
          const auto pr = tree.projection(j);
          const double x1 = k[size_t(pr.children[0])] * g.dxi(), x2 = k[size_t(pr.children[1])] * g.dxi(),
                       x3 = k[size_t(pr.children[2])] * g.dxi();
          const double mu = tree.orientation(pr.root) * 2 * (x2 - x1) * (x2 - x3);
          if (j == 1) in_F = std::abs(mu) > N;
          else in_F = in_F && std::abs(acc_mu + mu) > sched.beta(j - 1) * std::abs(acc_mu);
          acc_mu += mu;
          mu_t.push_back(acc_mu);
          mult *= x2 / acc_mu;
        }
        if (in_F) {
          const C m = P * std::pow(w, J) * mult * std::polar(1.0, acc_mu * t);
          const Index slot = g.slot(k[0]);
          std::vector<C> lv(nl);
          for (size_t q = 0; q < nl; ++q) lv[q] = oriented(v.at_mode(k[size_t(leaves[q])]), sigma[q]);
          if (family == NfrFamily::boundary) {
            C p = 1;
            for (C x : lv) p *= x;
            out[slot] += m * p;
          } else {
            for (size_t b = 0; b < nl; ++b) {
              const Index kb = k[size_t(leaves[b])];
              C sub;
              if (family == NfrFamily::quintic) sub = oriented(Q.at_mode(kb), sigma[b]);
              else if (family == NfrFamily::remainder) sub = oriented(T.at_mode(kb), sigma[b]);
              else sub = restricted_T(kb, acc_mu, sigma[b]);
              C p = sub;
              for (size_t q = 0; q < nl; ++q)
                if (q != b) p *= lv[q];
              out[slot] -= m * p;
            }
          }
        }
      }
      size_t q = 0;
      while (q < nl && ++idx[q] == n) idx[q++] = 0;
      if (q == nl) break;
    }
  }
  return SpectralField<double>(g, out);
}

const NfrFamily kFamilies[] = {NfrFamily::boundary, NfrFamily::quintic, NfrFamily::almost_resonant,
                               NfrFamily::remainder};

}  // namespace

TEST_SUITE("nfr") {

TEST_CASE("threshold schedule") {
  const ThresholdSchedule<double> a(0.6, 4.0);
  CHECK(a.theta() == doctest::Approx(0.2));
  CHECK(a.beta(0) == 1.0);
  CHECK(a.beta(1) == doctest::Approx(std::pow(5.0, 10.0)));
  CHECK(a.b(2) == doctest::Approx(std::pow(5.0, 10.0)));
  const ThresholdSchedule<double> b(1.0, 4.0);
  CHECK(b.theta() == 0.5);
  CHECK(b.beta(2) == doctest::Approx(2401.0));
  CHECK(b.weak_cutoffs(2)[1] == doctest::Approx(625.0 * 2.0));
  CHECK_THROWS_AS(ThresholdSchedule<double>(0.5, 4.0), std::invalid_argument);
  CHECK_THROWS_AS(ThresholdSchedule<double>(0.6, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ThresholdSchedule<double>::with_betas(0.6, 4.0, {1.5}), std::invalid_argument);
  const auto o = ThresholdSchedule<double>::with_betas(0.6, 4.0, {3.0});
  CHECK(o.overridden());
  CHECK(o.beta(1) == 3.0);
  CHECK(o.beta(2) == doctest::Approx(std::pow(7.0, 10.0)));
}

TEST_CASE("term set arities") {
  for (int J = 1; J <= 3; ++J) {
    const auto terms = build_term_set(J);
    size_t expected = 1 + static_cast<size_t>(double_factorial_count(J));  // level-0 T_1 and the remainder
    for (int j = 1; j <= J; ++j) expected += 2 * static_cast<size_t>(double_factorial_count(j));
    for (int j = 1; j < J; ++j) expected += static_cast<size_t>(double_factorial_count(j));
    CHECK(terms.size() == expected);
    for (const auto& d : terms) {
      CHECK(d.multilinearity == family_degree(d.family, d.level));
      if (d.level > 0) CHECK(OrderedTree::parse(d.tree).generation() == d.level);
    }
  }
  CHECK(family_degree(NfrFamily::boundary, 2) == 5);
  CHECK(family_degree(NfrFamily::quintic, 2) == 9);
  CHECK(family_degree(NfrFamily::almost_resonant, 2) == 7);
  CHECK(parse_family("tt1") == NfrFamily::almost_resonant);
  CHECK_THROWS_AS(parse_family("t9"), std::invalid_argument);
}

TEST_CASE("predicates partition F_J") {
  const auto sched = ThresholdSchedule<double>::with_betas(0.6, 2.0, {2.0, 3.0});
  auto rng = Philox4x32(17);
  for (int J = 1; J <= 2; ++J) {
    const auto trees = enumerate_trees(J + 1);
    const RestrictionPredicate<double> pred{sched, J};
    int hits_near = 0, hits_away = 0;
    for (int k = 0; k < 5000; ++k) {
      const auto& t = trees[rng.next_u32() % trees.size()];
      std::map<NodeId, double> leaves;
      for (NodeId a : t.terminals()) leaves[a] = double(int(rng.next_u32() % 17) - 8);
      const auto a = assign_indices(t, leaves);
      CHECK(pred.in_F(1, a) == pred.in_C0(a));
      if (!pred(a)) continue;
      const bool near = pred.in_C(J, a), away = pred.in_F(J + 1, a);
      CHECK(near != away);
      hits_near += near;
      hits_away += away;
    }
    CHECK(hits_near > 0);
    CHECK(hits_away > 0);
  }
}

TEST_CASE("all families match the brute-force sum, J = 1") {
  FrequencyGrid<double> g(8, 2 * std::numbers::pi);
  auto rng = Philox4x32(21);
  const auto v = random_field(g, 0.6, rng);
  for (double N : {2.0, 7.0}) {
    const ThresholdSchedule<double> sched(0.6, N);
    for (NfrFamily f : kFamilies) {
      INFO(family_name(f) << " N=" << N);
      const auto fast = eval_family(f, 1, v, 0.13, sched);
      CHECK(rel_err(fast, brute_force(f, 1, v, 0.13, sched)) < 1e-12);
    }
  }
}

TEST_CASE("all families match the brute-force sum, J = 2") {
  FrequencyGrid<double> g(8, 2 * std::numbers::pi);
  auto rng = Philox4x32(22);
  const auto v = random_field(g, 0.6, rng);
  const auto sched = ThresholdSchedule<double>::with_betas(0.6, 2.0, {2.0, 3.0});
  for (NfrFamily f : kFamilies) {
    INFO(family_name(f));
    const auto fast = eval_family(f, 2, v, 0.07, sched);
    CHECK(fast.coeffs().norm() > 0);
    CHECK(rel_err(fast, brute_force(f, 2, v, 0.07, sched)) < 1e-12);
  }
  // the default schedule leaves nothing on this grid
  const ThresholdSchedule<double> plain(0.6, 2.0);
  CHECK(eval_T0(2, v, 0.0, plain).is_zero());
  CHECK(brute_force(NfrFamily::boundary, 2, v, 0.0, plain).is_zero());
}

TEST_CASE("single interaction scalar value") {
  // v = e_3 + e_1 + e_0 on dxi = 1. At xi = 2 the tuples (3, 1, 0) and
  // (0, 1, 3) have Phi = -4 and xi_2 = 1; (1, 0, 1) has |Phi| = 2 and drops.
  FrequencyGrid<double> g(8, 2 * std::numbers::pi);
  SpectralField<double> v(g);
  v[g.slot(3)] = 1;
  v[g.slot(1)] = 1;
  v[g.slot(0)] = 1;
  const double t = 0.3, w = 1 / (4 * std::numbers::pi * std::numbers::pi);
  const ThresholdSchedule<double> sched(0.6, 2.0);
  const C expected = 2.0 * w * std::polar(1.0, -4 * t) * (1.0 / -4.0);
  const auto t0 = eval_T0(1, v, t, sched);
  CHECK(std::abs(t0.at_mode(2) - expected) < 1e-15);
}

TEST_CASE("level zero members") {
  FrequencyGrid<double> g(16, 6.0);
  auto rng = Philox4x32(23);
  const auto v = random_field(g, 0.6, rng);
  const ThresholdSchedule<double> sched(0.6, 3.0);
  CHECK(rel_err(eval_TT1(0, v, 0.2, sched), split_cubic(v, 0.2, 3.0).first) == 0.0);
  CHECK(rel_err(eval_remainder(0, v, 0.2, sched), eval_cubic_T(v, 0.2)) == 0.0);
  CHECK_THROWS_AS(eval_T0(0, v, 0.0, sched), std::invalid_argument);
  CHECK_THROWS_AS(eval_T0(7, v, 0.0, sched), std::invalid_argument);
}

TEST_CASE("homogeneity degrees") {
  FrequencyGrid<double> g(16, 2 * std::numbers::pi);
  auto rng = Philox4x32(24);
  const auto v = random_field(g, 0.6, rng);
  const auto sched = ThresholdSchedule<double>::with_betas(0.6, 2.0, {2.0});
  for (int J = 1; J <= 2; ++J)
    for (NfrFamily f : kFamilies) {
      INFO(family_name(f) << " J=" << J);
      const auto a = eval_family(f, J, v, 0.1, sched);
      const auto b = eval_family(f, J, 2.0 * v, 0.1, sched);
      CHECK(rel_err(b, std::pow(2.0, family_degree(f, J)) * a) < 1e-12);
    }
}

TEST_CASE("integration by parts identity along the flow") {
  // away part at level J-1 = d/dt T_0 + T_Q + remainder at level J
  FrequencyGrid<double> g(16, 2 * std::numbers::pi);
  auto rng = Philox4x32(25);
  const auto v = 0.5 * random_field(g, 0.6, rng);
  const auto sched = ThresholdSchedule<double>::with_betas(0.6, 2.0, {2.0});
  const double t = 0.05, h = 1e-3;
  const auto F = eval_quintic(v, t) + eval_cubic_T(v, t);
  for (int J = 1; J <= 2; ++J) {
    INFO("J=" << J);
    const auto away = eval_remainder(J - 1, v, t, sched) - eval_TT1(J - 1, v, t, sched);
    // Richardson-extrapolated central difference along the linearised flow
    auto central = [&](double k) {
      return (1 / (2 * k)) * (eval_T0(J, v + k * F, t + k, sched) - eval_T0(J, v - k * F, t - k, sched));
    };
    const auto dT0 = (1.0 / 3.0) * (4.0 * central(h / 2) - central(h));
    const auto rhs = dT0 + eval_TQ(J, v, t, sched) + eval_remainder(J, v, t, sched);
    CHECK(away.coeffs().norm() > 0);
    CHECK(rel_err(rhs, away) < 1e-6);
  }
}

TEST_CASE("operation budget") {
  CHECK(nested_sum_cost(64, 3) == doctest::Approx(std::pow(64.0, 6) * 15));
  CHECK_THROWS_AS(check_budget(64, 3, 1e6), BudgetExceeded);
  FrequencyGrid<double> g(64, 10.0);
  auto rng = Philox4x32(26);
  const auto v = random_field(g, 0.6, rng);
  CHECK_THROWS_AS(eval_T0(3, v, 0.0, ThresholdSchedule<double>(0.6, 4.0), 1e6), BudgetExceeded);
}

TEST_CASE("zero field gives zero terms") {
  FrequencyGrid<double> g(16, 6.0);
  const SpectralField<double> z(g);
  const ThresholdSchedule<double> sched(0.6, 3.0);
  for (NfrFamily f : kFamilies) CHECK(eval_family(f, 1, z, 0.0, sched).is_zero());
}

TEST_CASE("time derivative norm ratio") {
  FrequencyGrid<double> g(32, 8.0);
  auto rng = Philox4x32(27);
  const auto v = random_field(g, 0.6, rng);
  const double r = dt_v_norm_check(v, 0.0, 0.6);
  CHECK(r > 0);
  CHECK(std::isfinite(r));
  CHECK_THROWS_AS(dt_v_norm_check(SpectralField<double>(g), 0.0, 0.6), std::invalid_argument);
}

}  // TEST_SUITE
