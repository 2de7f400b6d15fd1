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

#ifndef DNLS_OPERATORS_HPP
#define DNLS_OPERATORS_HPP

#include <span>
#include <utility>
#include <vector>

#include "dnls/spectral.hpp"
#include "dnls/trees.hpp"

namespace dnls {

enum class KernelKind { raw_T, T_phi, T_weak };

/// Phi = xi^2 - xi_1^2 + xi_2^2 - xi_3^2 on the hyperplane xi = xi_1 - xi_2 + xi_3,
/// evaluated in the factored form.
template <typename Scalar>
inline Scalar modulation(Scalar xi1, Scalar xi2, Scalar xi3) {
  return Scalar(2) * (xi2 - xi1) * (xi2 - xi3);
}

/// Multiplier of a trilinear frequency-space operator.
///   raw_T  : e^{i Phi t} xi_2
///   T_phi  : |xi_2| / <Phi>^{1/2}
///   T_weak : 1_{|Phi| > M} |xi_2| / <Phi>
template <typename Scalar>
struct TrilinearKernel {
  KernelKind kind = KernelKind::T_phi;
  Scalar t{0};
  Scalar cutoff{1};

  static TrilinearKernel raw(Scalar time) { return {KernelKind::raw_T, time, Scalar(1)}; }
  static TrilinearKernel phi() { return {KernelKind::T_phi, Scalar(0), Scalar(1)}; }
  static TrilinearKernel weak(Scalar m) {
    if (!(m >= Scalar(1))) throw std::invalid_argument("TrilinearKernel: weak cutoff M must be >= 1");
    return {KernelKind::T_weak, Scalar(0), m};
  }

  std::complex<Scalar> operator()(Scalar xi1, Scalar xi2, Scalar xi3) const {
    const Scalar ph = modulation(xi1, xi2, xi3);
    switch (kind) {
      case KernelKind::raw_T:
        return std::polar(xi2, ph * t);
      case KernelKind::T_phi:
        return std::abs(xi2) / std::sqrt(japanese(ph));
      case KernelKind::T_weak:
        return std::abs(ph) > cutoff ? std::complex<Scalar>(std::abs(xi2) / japanese(ph)) : std::complex<Scalar>(0);
    }
    return 0;
  }
};

/// Direct summation of
///   out(xi) = (dxi/2pi)^2 sum_{xi_1, xi_2} m(xi_1, xi_2, xi_3) v1(xi_1) conj(v2(xi_2)) v3(xi_3),
/// xi_3 = xi - xi_1 + xi_2, with terms whose xi_3 leaves the grid dropped.
/// `keep(Phi)` restricts the sum; accumulation order is xi_1 outer, xi_2 inner
/// for every output mode.
template <typename Scalar, typename Multiplier, typename Keep>
SpectralField<Scalar> trilinear_sum(const SpectralField<Scalar>& v1, const SpectralField<Scalar>& v2,
                                    const SpectralField<Scalar>& v3, Multiplier mult, Keep keep) {
  using Complex = std::complex<Scalar>;
  require_same_grid(v1, v2);
  require_same_grid(v1, v3);
  const auto& g = v1.grid();
  const Index n = g.size();
  const Scalar dxi = g.dxi();
  const Scalar w = g.spectral_weight() * g.spectral_weight();
  ComplexVector<Scalar> conj2 = v2.coeffs().conjugate();
  SpectralField<Scalar> out(g);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    const Index k = g.mode(i);
    Complex acc(0);
    for (Index i1 = 0; i1 < n; ++i1) {
      const Complex a1 = v1[i1];
      if (a1 == Complex(0)) continue;
      const Index k1 = g.mode(i1);
      for (Index i2 = 0; i2 < n; ++i2) {
        const Index k3 = k - k1 + g.mode(i2);
        if (!g.contains_mode(k3)) continue;
        const Scalar xi1 = Scalar(k1) * dxi, xi2 = g.xi(i2), xi3 = Scalar(k3) * dxi;
        if (!keep(modulation(xi1, xi2, xi3))) continue;
        acc += mult(xi1, xi2, xi3) * a1 * conj2[i2] * v3[g.slot(k3)];
      }
    }
    out[i] = w * acc;
  }
  return out;
}

template <typename Scalar>
SpectralField<Scalar> eval_trilinear(const TrilinearKernel<Scalar>& kernel, const SpectralField<Scalar>& v1,
                                     const SpectralField<Scalar>& v2, const SpectralField<Scalar>& v3) {
  return trilinear_sum(v1, v2, v3, kernel, [](Scalar) { return true; });
}

/// Quintic term of the interaction-picture equation,
///   Q(v)(t) = S(-t)[ (i/2) |S(t)v|^4 S(t)v ],
/// evaluated on the 3x zero-padded grid.
template <typename Scalar>
SpectralField<Scalar> eval_quintic(const SpectralField<Scalar>& v, Scalar t) {
  using Complex = std::complex<Scalar>;
  const PaddedTransform<Scalar> pad(v.grid());
  ComplexVector<Scalar> w = pad.samples(free_propagate(v, t));
  for (Index j = 0; j < w.size(); ++j) {
    const Scalar m2 = std::norm(w[j]);
    w[j] = Complex(0, Scalar(0.5)) * m2 * m2 * w[j];
  }
  return free_propagate(pad.project(w), -t);
}

/// Cubic term of the interaction-picture equation, physical route:
///   T(v)(t) = S(-t)[ -(S(t)v)^2 d_x conj(S(t)v) ].
template <typename Scalar>
SpectralField<Scalar> eval_cubic_T_physical(const SpectralField<Scalar>& v, Scalar t) {
  const PaddedTransform<Scalar> pad(v.grid());
  const SpectralField<Scalar> sv = free_propagate(v, t);
  ComplexVector<Scalar> w = pad.samples(sv);
  const ComplexVector<Scalar> dw = pad.conj_derivative_samples(sv);
  for (Index j = 0; j < w.size(); ++j) w[j] = -w[j] * w[j] * dw[j];
  return free_propagate(pad.project(w), -t);
}

/// Cubic term, frequency route: i times the raw_T trilinear form on (v, v, v).
/// Agrees with eval_cubic_T_physical up to rounding.
template <typename Scalar>
SpectralField<Scalar> eval_cubic_T(const SpectralField<Scalar>& v, Scalar t) {
  return std::complex<Scalar>(0, 1) * eval_trilinear(TrilinearKernel<Scalar>::raw(t), v, v, v);
}

/// Splits eval_cubic_T into the almost-resonant part (|Phi| <= N) and the part
/// with |Phi| > N. Ties go to the first part.
template <typename Scalar>
std::pair<SpectralField<Scalar>, SpectralField<Scalar>> split_cubic(const SpectralField<Scalar>& v, Scalar t,
                                                                      Scalar threshold) {
  if (!(threshold > Scalar(1))) throw std::invalid_argument("split_cubic: threshold N must exceed 1");
  const auto kernel = TrilinearKernel<Scalar>::raw(t);
  const std::complex<Scalar> i(0, 1);
  auto near = trilinear_sum(v, v, v, kernel, [=](Scalar ph) { return std::abs(ph) <= threshold; });
  auto away = trilinear_sum(v, v, v, kernel, [=](Scalar ph) { return std::abs(ph) > threshold; });
  return {i * std::move(near), i * std::move(away)};
}

namespace detail {

template <typename Scalar, typename KernelForGeneration>
SpectralField<Scalar> iterate_tree_map(const OrderedTree& tree, std::span<const SpectralField<Scalar>> inputs,
                                       KernelForGeneration kernel_for) {
  const auto leaves = tree.terminals();
  if (inputs.size() != leaves.size())
    throw std::invalid_argument("iterated tree map: expected " + std::to_string(leaves.size()) + " inputs, got " +
                                std::to_string(inputs.size()));
  for (const auto& f : inputs) require_same_grid(inputs.front(), f);
  std::vector<std::optional<SpectralField<Scalar>>> at(static_cast<size_t>(tree.node_count()));
  for (size_t j = 0; j < leaves.size(); ++j) at[static_cast<size_t>(leaves[j])] = inputs[j];
  for (int j = tree.generation(); j >= 1; --j) {
    const GenerationTree g = tree.projection(j);
    const auto& c = g.children;
    at[static_cast<size_t>(g.root)] = eval_trilinear(kernel_for(j), *at[static_cast<size_t>(c[0])],
                                                     *at[static_cast<size_t>(c[1])], *at[static_cast<size_t>(c[2])]);
  }
  return *at[0];
}

}  // namespace detail

/// Replaces the j-th terminal (planar order) by inputs[j], then each root
/// r^(j), j = J..1, by T_phi of its children.
template <typename Scalar>
SpectralField<Scalar> iterated_map_S(const OrderedTree& tree, std::span<const SpectralField<Scalar>> inputs) {
  return detail::iterate_tree_map<Scalar>(tree, inputs, [](int) { return TrilinearKernel<Scalar>::phi(); });
}

/// As iterated_map_S with r^(j) replaced by T_weak at cutoff b_j N / 2.
/// `cutoffs[j-1]` holds b_j N / 2.
template <typename Scalar>
SpectralField<Scalar> iterated_map_S_weak(const OrderedTree& tree, std::span<const SpectralField<Scalar>> inputs,
                                          std::span<const Scalar> cutoffs) {
  if (static_cast<int>(cutoffs.size()) < tree.generation())
    throw std::invalid_argument("iterated_map_S_weak: schedule shorter than tree generation");
  return detail::iterate_tree_map<Scalar>(tree, inputs, [&](int j) {
    return TrilinearKernel<Scalar>::weak(std::max(Scalar(1), cutoffs[static_cast<size_t>(j - 1)]));
  });
}

/// Pseudo-spectral v1 * d_x conj(v2) * v3 on the 3x padded grid.
template <typename Scalar>
SpectralField<Scalar> cubic_derivative_product(const SpectralField<Scalar>& v1, const SpectralField<Scalar>& v2,
                                               const SpectralField<Scalar>& v3) {
  require_same_grid(v1, v2);
  require_same_grid(v1, v3);
  const PaddedTransform<Scalar> pad(v1.grid());
  ComplexVector<Scalar> a = pad.samples(v1);
  const ComplexVector<Scalar> b = pad.conj_derivative_samples(v2);
  const ComplexVector<Scalar> c = pad.samples(v3);
  for (Index j = 0; j < a.size(); ++j) a[j] = a[j] * b[j] * c[j];
  return pad.project(a);
}

/// || v1 d_x conj(v2) v3 ||_{H^{s-1}} / prod ||v_j||_{H^s}.
template <typename Scalar>
Scalar cubic_derivative_weaknorm_ratio(const SpectralField<Scalar>& v1, const SpectralField<Scalar>& v2,
                                       const SpectralField<Scalar>& v3, Scalar s) {
  if (!(s > Scalar(0.5))) throw std::invalid_argument("cubic_derivative_weaknorm_ratio: requires s > 1/2");
  const Scalar d = hs_norm(v1, s) * hs_norm(v2, s) * hs_norm(v3, s);
  if (!(d > Scalar(0))) throw std::invalid_argument("cubic_derivative_weaknorm_ratio: zero-norm input");
  return hs_norm(cubic_derivative_product(v1, v2, v3), s - Scalar(1)) / d;
}

}  // namespace dnls

#endif  // DNLS_OPERATORS_HPP
