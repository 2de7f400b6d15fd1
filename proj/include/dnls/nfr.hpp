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

#ifndef DNLS_NFR_HPP
#define DNLS_NFR_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dnls/operators.hpp"
#include "dnls/spectral.hpp"
#include "dnls/trees.hpp"

namespace dnls {

/// Raised when a nested sum would exceed the configured operation budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultOperationBudget = 5e9;

/// N, theta = min(2s-1, 1/2), beta_0 = 1, beta_j = (2j+3)^{2/theta}, and
/// b_J = beta_0 ... beta_{J-1}.
template <typename Scalar>
class ThresholdSchedule {
 public:
  ThresholdSchedule(Scalar s, Scalar threshold) : s_(s), n_(threshold) {
    if (!(s > Scalar(0.5))) throw std::invalid_argument("ThresholdSchedule: requires s > 1/2");
    if (!(threshold > Scalar(1))) throw std::invalid_argument("ThresholdSchedule: requires N > 1");
    theta_ = std::min(Scalar(2) * s - Scalar(1), Scalar(0.5));
  }

  /// Replaces beta_1, beta_2, ... by `betas`. Each must be >= 2. Used to
  /// probe the restriction sets on grids too coarse for the default values.
  static ThresholdSchedule with_betas(Scalar s, Scalar threshold, std::vector<Scalar> betas) {
    ThresholdSchedule out(s, threshold);
    for (Scalar b : betas)
      if (!(b >= Scalar(2))) throw std::invalid_argument("ThresholdSchedule: beta_j must be >= 2");
    out.override_ = std::move(betas);
    return out;
  }

  Scalar s() const { return s_; }
  Scalar theta() const { return theta_; }
  Scalar threshold() const { return n_; }
  bool overridden() const { return !override_.empty(); }

  Scalar beta(int j) const {
    if (j < 0) throw std::out_of_range("ThresholdSchedule: negative generation");
    if (j == 0) return Scalar(1);
    if (j <= static_cast<int>(override_.size())) return override_[static_cast<size_t>(j - 1)];
    return std::pow(Scalar(2 * j + 3), Scalar(2) / theta_);
  }

  Scalar b(int J) const {
    if (J < 1) throw std::out_of_range("ThresholdSchedule: b_J needs J >= 1");
    Scalar p(1);
    for (int j = 0; j < J; ++j) p *= beta(j);
    return p;
  }

  /// b_j N / 2 for j = 1..J, the cutoffs of the weak iterated map.
  std::vector<Scalar> weak_cutoffs(int J) const {
    std::vector<Scalar> out;
    for (int j = 1; j <= J; ++j) out.push_back(b(j) * n_ / Scalar(2));
    return out;
  }

 private:
  Scalar s_;
  Scalar n_;
  Scalar theta_{};
  std::vector<Scalar> override_;
};

/// Membership in C_0, C_j and F_J for an index assignment, evaluated on the
/// oriented modulations (IndexAssignment::phase).
template <typename Scalar>
struct RestrictionPredicate {
  ThresholdSchedule<Scalar> schedule;
  int level = 1;

  bool in_C0(const IndexAssignment<Scalar>& a) const { return std::abs(a.phase.at(0)) > schedule.threshold(); }

  /// |mu~_j + mu_{j+1}| <= beta_j |mu~_j|, j >= 1; needs generation >= j+1.
  bool in_C(int j, const IndexAssignment<Scalar>& a) const {
    if (j < 1 || j + 1 > a.tree.generation()) throw std::out_of_range("RestrictionPredicate: C_j out of range");
    const Scalar mt = a.phase_tilde[static_cast<size_t>(j - 1)];
    return std::abs(mt + a.phase[static_cast<size_t>(j)]) <= schedule.beta(j) * std::abs(mt);
  }

  /// F_J = C_0 and not C_1 ... and not C_{J-1}.
  bool in_F(int J, const IndexAssignment<Scalar>& a) const {
    if (!in_C0(a)) return false;
    for (int j = 1; j < J; ++j)
      if (in_C(j, a)) return false;
    return true;
  }

  bool operator()(const IndexAssignment<Scalar>& a) const { return in_F(level, a); }
};

enum class NfrFamily { boundary, quintic, almost_resonant, remainder };

inline std::string family_name(NfrFamily f) {
  switch (f) {
    case NfrFamily::boundary:
      return "t0";
    case NfrFamily::quintic:
      return "tq";
    case NfrFamily::almost_resonant:
      return "tt1";
    case NfrFamily::remainder:
      return "remainder";
  }
  return "?";
}

inline NfrFamily parse_family(const std::string& name) {
  if (name == "t0") return NfrFamily::boundary;
  if (name == "tq") return NfrFamily::quintic;
  if (name == "tt1") return NfrFamily::almost_resonant;
  if (name == "remainder") return NfrFamily::remainder;
  throw std::invalid_argument("unknown NFR family '" + name + "'");
}

/// One family member at level J (the term carrying superscript J+1).
struct TermDescriptor {
  NfrFamily family{};
  int level = 0;
  std::string tree;  // serialized tree of generation `level`, or "" for level 0
  int multilinearity = 0;
  std::string restriction;
  std::string multiplier;
};

/// Degree of the family at level J: 2J+1, 2J+5, 2J+3, 2J+3.
inline int family_degree(NfrFamily f, int J) {
  switch (f) {
    case NfrFamily::boundary:
      return 2 * J + 1;
    case NfrFamily::quintic:
      return 2 * J + 5;
    case NfrFamily::almost_resonant:
    case NfrFamily::remainder:
      return 2 * J + 3;
  }
  return 0;
}

/// Descriptors for the truncated equation at level J: boundary and quintic
/// terms for levels 1..J, almost-resonant terms for 0..J-1, and the dropped
/// remainder at level J.
inline std::vector<TermDescriptor> build_term_set(int J) {
  if (J < 1) throw std::invalid_argument("build_term_set: J must be >= 1");
  std::vector<TermDescriptor> out;
  auto add = [&](NfrFamily f, int level, const std::string& restriction, const std::string& mult) {
    if (level == 0) {
      out.push_back({f, 0, "", family_degree(f, 0), restriction, mult});
      return;
    }
    for (const auto& t : enumerate_trees(level))
      out.push_back({f, level, t.serialize(), family_degree(f, level), restriction, mult});
  };
  const std::string base = "prod_j e^{i mu_j t} xi2^(j) / mu~_j";
  for (int j = 1; j <= J; ++j) add(NfrFamily::boundary, j, "F_" + std::to_string(j), base);
  for (int j = 1; j <= J; ++j) add(NfrFamily::quintic, j, "F_" + std::to_string(j), base + ", one leaf -> Q(v)");
  add(NfrFamily::almost_resonant, 0, "|Phi| <= N", "e^{i Phi t} xi2");
  for (int j = 1; j < J; ++j)
    add(NfrFamily::almost_resonant, j, "F_" + std::to_string(j) + " & C_" + std::to_string(j),
        base + ", one leaf -> T(v) restricted");
  add(NfrFamily::remainder, J, "F_" + std::to_string(J), base + ", one leaf -> T(v)");
  return out;
}

/// n^{2J} |T(J)|, the operation count the budget guard compares against.
inline double nested_sum_cost(Index n, int J) {
  return std::pow(double(n), 2.0 * J) * double(double_factorial_count(J));
}

inline void check_budget(Index n, int J, double budget) {
  const double cost = nested_sum_cost(n, J);
  if (cost > budget)
    throw BudgetExceeded("nested sum at J=" + std::to_string(J) + ", n=" + std::to_string(n) + " needs " +
                         std::to_string(cost) + " operations, budget " + std::to_string(budget));
}

namespace detail {

/// Per-output-mode table of the cubic summands sorted by their modulation,
/// with prefix sums, answering restricted sums of T(v)(xi) in O(log n).
template <typename Scalar>
class CubicModulationTable {
 public:
  using Complex = std::complex<Scalar>;

  CubicModulationTable(const SpectralField<Scalar>& v, Scalar t) : n_(v.grid().size()) {
    const auto& g = v.grid();
    const Scalar w = g.spectral_weight() * g.spectral_weight();
    const Index n = n_;
    rows_.resize(static_cast<size_t>(n));
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) {
      const Index k = g.mode(i);
      std::vector<std::pair<Scalar, Complex>> terms;
      for (Index i1 = 0; i1 < n; ++i1) {
        const Index k1 = g.mode(i1);
        for (Index i2 = 0; i2 < n; ++i2) {
          const Index k3 = k - k1 + g.mode(i2);
          if (!g.contains_mode(k3)) continue;
          const Scalar xi1 = g.xi(i1), xi2 = g.xi(i2), xi3 = Scalar(k3) * g.dxi();
          const Scalar mu = modulation(xi1, xi2, xi3);
          const Complex c = Complex(0, 1) * w * std::polar(xi2, mu * t) * v[i1] * std::conj(v[i2]) * v[g.slot(k3)];
          terms.emplace_back(mu, c);
        }
      }
      std::stable_sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      Row& r = rows_[static_cast<size_t>(i)];
      r.mu.reserve(terms.size());
      r.prefix.assign(terms.size() + 1, Complex(0));
      for (size_t j = 0; j < terms.size(); ++j) {
        r.mu.push_back(terms[j].first);
        r.prefix[j + 1] = r.prefix[j] + terms[j].second;
      }
    }
  }

  /// Sum of the slot's summands with |mt + sigma mu| <= bound, conjugated when
  /// sigma = -1.
  Complex restricted(Index slot, Scalar mt, int sigma, Scalar bound) const {
    const Row& r = rows_[static_cast<size_t>(slot)];
    const auto b = r.mu.begin(), e = r.mu.end();
    size_t lo, hi;
    if (sigma > 0) {
      lo = std::partition_point(b, e, [&](Scalar mu) { return mt + mu < -bound; }) - b;
      hi = std::partition_point(b, e, [&](Scalar mu) { return mt + mu <= bound; }) - b;
    } else {
      lo = std::partition_point(b, e, [&](Scalar mu) { return mt - mu > bound; }) - b;
      hi = std::partition_point(b, e, [&](Scalar mu) { return mt - mu >= -bound; }) - b;
    }
    if (hi <= lo) return Complex(0);
    const Complex s = r.prefix[hi] - r.prefix[lo];
    return sigma > 0 ? s : std::conj(s);
  }

 private:
  struct Row {
    std::vector<Scalar> mu;
    std::vector<Complex> prefix;
  };
  Index n_;
  std::vector<Row> rows_;
};

/// Nested sum over every tree of generation J, generation by generation,
/// rejecting as soon as the F_J predicate fails. One leaf may be replaced by
/// a substitution field chosen by the family.
template <typename Scalar>
class LevelSum {
 public:
  using Complex = std::complex<Scalar>;

  LevelSum(NfrFamily family, int J, const SpectralField<Scalar>& v, Scalar t, const ThresholdSchedule<Scalar>& sched)
      : family_(family), J_(J), v_(v), t_(t), sched_(sched), g_(v.grid()) {
    const Index n = g_.size();
    conj_v_ = v.coeffs().conjugate();
    phases_.resize(n * n * n);
    mu_.resize(n * n * n);
    for (Index i = 0; i < n; ++i)
      for (Index i1 = 0; i1 < n; ++i1)
        for (Index i2 = 0; i2 < n; ++i2) {
          const Index k3 = g_.mode(i) - g_.mode(i1) + g_.mode(i2);
          const Index at = (i * n + i1) * n + i2;
          if (!g_.contains_mode(k3)) {
            mu_[at] = std::numeric_limits<Scalar>::quiet_NaN();
            continue;
          }
          const Scalar m = modulation(g_.xi(i1), g_.xi(i2), Scalar(k3) * g_.dxi());
          mu_[at] = m;
          phases_[at] = std::polar(Scalar(1), m * t);
          max_mu_ = std::max(max_mu_, std::abs(m));
        }
    switch (family_) {
      case NfrFamily::quintic:
        subst_ = eval_quintic(v, t).coeffs();
        break;
      case NfrFamily::remainder:
        subst_ = eval_cubic_T(v, t).coeffs();
        break;
      case NfrFamily::almost_resonant:
        table_.emplace(v, t);
        break;
      case NfrFamily::boundary:
        break;
    }
    if (family_ != NfrFamily::boundary && family_ != NfrFamily::almost_resonant) conj_subst_ = subst_.conjugate();
    const Scalar w = g_.spectral_weight() * g_.spectral_weight();
    weight_ = std::pow(w, Scalar(J));
  }

  SpectralField<Scalar> run() const {
    const auto trees = enumerate_trees(J_);
    const Index n = g_.size();
    SpectralField<Scalar> out(g_);
#pragma omp parallel for schedule(dynamic)
    for (Index i = 0; i < n; ++i) {
      Complex acc(0);
      for (const auto& tree : trees) {
        Walk walk{tree, {}, {}, {}, Complex(0)};
        walk.slot.assign(static_cast<size_t>(tree.node_count()), 0);
        walk.leaves = tree.terminals();
        for (NodeId a : walk.leaves) walk.sigma.push_back(tree.orientation(a));
        walk.slot[0] = i;
        descend(walk, 1, Scalar(0), Complex(1));
        acc += sign(tree) * walk.acc;
      }
      out[i] = weight_ * acc;
    }
    return out;
  }

 private:
  struct Walk {
    const OrderedTree& tree;
    std::vector<Index> slot;
    std::vector<NodeId> leaves;
    std::vector<int> sigma;
    Complex acc;
  };

  // P_J = prod_{j=2}^{J} (-sigma_j); minus for the families that come from
  // the -d/dt(product) half of the integration by parts.
  Scalar sign(const OrderedTree& tree) const {
    Scalar p(1);
    for (int j = 2; j <= J_; ++j) p *= Scalar(-tree.orientation(tree.root_of_generation(j)));
    return family_ == NfrFamily::boundary ? p : -p;
  }

  void descend(Walk& w, int j, Scalar mt_prev, Complex mult) const {
    const Index n = g_.size();
    const NodeId r = w.tree.root_of_generation(j);
    const auto& ch = w.tree.node(r).children;
    const int sigma = w.tree.orientation(r);
    const Scalar beta_prev = sched_.beta(j - 1);
    // |mt_prev + mu| <= |mt_prev| + max|mu| <= beta |mt_prev| rules out every child
    if (j >= 2 && (beta_prev - Scalar(1)) * std::abs(mt_prev) > max_mu_ * (Scalar(1) + Scalar(1e-9))) return;
    const Index i = w.slot[static_cast<size_t>(r)];
    for (Index i1 = 0; i1 < n; ++i1) {
      for (Index i2 = 0; i2 < n; ++i2) {
        const Index at = (i * n + i1) * n + i2;
        const Scalar mu = mu_[at];
        if (std::isnan(mu)) continue;
        const Scalar phase = sigma > 0 ? mu : -mu;
        Scalar mt;
        if (j == 1) {
          mt = phase;
          if (!(std::abs(mt) > sched_.threshold())) continue;
        } else {
          mt = mt_prev + phase;
          if (std::abs(mt) <= beta_prev * std::abs(mt_prev)) continue;
        }
        const Complex osc = sigma > 0 ? phases_[at] : std::conj(phases_[at]);
        const Complex m = mult * osc * (g_.xi(i2) / mt);
        w.slot[static_cast<size_t>(ch[0])] = i1;
        w.slot[static_cast<size_t>(ch[1])] = i2;
        w.slot[static_cast<size_t>(ch[2])] = g_.slot(g_.mode(i) - g_.mode(i1) + g_.mode(i2));
        if (j == J_)
          finish(w, mt, m);
        else
          descend(w, j + 1, mt, m);
      }
    }
  }

  Complex leaf_value(const Walk& w, size_t a) const {
    const Index s = w.slot[static_cast<size_t>(w.leaves[a])];
    return w.sigma[a] > 0 ? v_[s] : conj_v_[s];
  }

  Complex substitute(const Walk& w, size_t a, Scalar mt) const {
    const Index s = w.slot[static_cast<size_t>(w.leaves[a])];
    const int sigma = w.sigma[a];
    if (family_ == NfrFamily::almost_resonant) return table_->restricted(s, mt, sigma, sched_.beta(J_) * std::abs(mt));
    return sigma > 0 ? subst_[s] : conj_subst_[s];
  }

  void finish(Walk& w, Scalar mt, Complex m) const {
    const size_t L = w.leaves.size();
    if (family_ == NfrFamily::boundary) {
      Complex p = m;
      for (size_t a = 0; a < L; ++a) p *= leaf_value(w, a);
      w.acc += p;
      return;
    }
    // sum_b g_b prod_{a != b} f_a by prefix products
    Complex prefix(1), sum(0);
    std::array<Complex, 2 * kMaxEnumeratedGeneration + 1> suffix;
    suffix[L - 1] = Complex(1);
    for (size_t a = L - 1; a > 0; --a) suffix[a - 1] = suffix[a] * leaf_value(w, a);
    for (size_t a = 0; a < L; ++a) {
      sum += prefix * substitute(w, a, mt) * suffix[a];
      prefix *= leaf_value(w, a);
    }
    w.acc += m * sum;
  }

  NfrFamily family_;
  int J_;
  const SpectralField<Scalar>& v_;
  Scalar t_;
  const ThresholdSchedule<Scalar>& sched_;
  FrequencyGrid<Scalar> g_;
  ComplexVector<Scalar> conj_v_;
  std::vector<Complex> phases_;
  std::vector<Scalar> mu_;
  Scalar max_mu_{0};
  ComplexVector<Scalar> subst_, conj_subst_;
  std::optional<CubicModulationTable<Scalar>> table_;
  Scalar weight_{1};
};

}  // namespace detail

/// Family member at level J (superscript J+1) evaluated at time t.
/// The J = 0 members are T_1 (almost resonant) and T itself (remainder).
template <typename Scalar>
SpectralField<Scalar> eval_family(NfrFamily family, int J, const SpectralField<Scalar>& v, Scalar t,
                                  const ThresholdSchedule<Scalar>& schedule,
                                  double budget = kDefaultOperationBudget) {
  if (J == 0) {
    if (family == NfrFamily::almost_resonant) return split_cubic(v, t, schedule.threshold()).first;
    if (family == NfrFamily::remainder) return eval_cubic_T(v, t);
    throw std::invalid_argument(family_name(family) + ": level must be >= 1");
  }
  if (J < 1 || J > kMaxEnumeratedGeneration)
    throw std::invalid_argument(family_name(family) + ": level out of range");
  check_budget(v.size(), J, budget);
  if (v.is_zero()) return SpectralField<Scalar>(v.grid());
  return detail::LevelSum<Scalar>(family, J, v, t, schedule).run();
}

template <typename Scalar>
SpectralField<Scalar> eval_T0(int J, const SpectralField<Scalar>& v, Scalar t, const ThresholdSchedule<Scalar>& s,
                              double budget = kDefaultOperationBudget) {
  return eval_family(NfrFamily::boundary, J, v, t, s, budget);
}

template <typename Scalar>
SpectralField<Scalar> eval_TQ(int J, const SpectralField<Scalar>& v, Scalar t, const ThresholdSchedule<Scalar>& s,
                              double budget = kDefaultOperationBudget) {
  return eval_family(NfrFamily::quintic, J, v, t, s, budget);
}

template <typename Scalar>
SpectralField<Scalar> eval_TT1(int J, const SpectralField<Scalar>& v, Scalar t, const ThresholdSchedule<Scalar>& s,
                               double budget = kDefaultOperationBudget) {
  return eval_family(NfrFamily::almost_resonant, J, v, t, s, budget);
}

template <typename Scalar>
SpectralField<Scalar> eval_remainder(int J, const SpectralField<Scalar>& v, Scalar t,
                                     const ThresholdSchedule<Scalar>& s, double budget = kDefaultOperationBudget) {
  return eval_family(NfrFamily::remainder, J, v, t, s, budget);
}

/// ||Q(v) + T(v)||_{H^{s-1}} / (||v||^3_{H^s} + ||v||^5_{H^s}).
template <typename Scalar>
Scalar dt_v_norm_check(const SpectralField<Scalar>& v, Scalar t, Scalar s) {
  if (!(s > Scalar(0.5))) throw std::invalid_argument("dt_v_norm_check: requires s > 1/2");
  const Scalar a = hs_norm(v, s);
  if (!(a > Scalar(0))) throw std::invalid_argument("dt_v_norm_check: zero field");
  const auto dv = eval_quintic(v, t) + eval_cubic_T_physical(v, t);
  return hs_norm(dv, s - Scalar(1)) / (a * a * a + a * a * a * a * a);
}

}  // namespace dnls

#endif  // DNLS_NFR_HPP
