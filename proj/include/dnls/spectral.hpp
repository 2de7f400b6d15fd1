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

#ifndef DNLS_SPECTRAL_HPP
#define DNLS_SPECTRAL_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

namespace dnls {

using Index = Eigen::Index;

template <typename Scalar>
using ComplexVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar>
using RealVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Uniform frequency grid xi_k = 2 pi k / L, k = -n/2 .. n/2-1, dual to the
/// physical grid x_j = -L/2 + j L/n. Storage is centered: slot i holds mode
/// k = i - n/2.
template <typename Scalar>
class FrequencyGrid {
 public:
  FrequencyGrid(Index n_modes, Scalar length) : n_(n_modes), length_(length) {
    if (n_modes <= 0 || n_modes % 2 != 0)
      throw std::invalid_argument("FrequencyGrid: n_modes must be a positive even integer");
    if (!(length > Scalar(0)) || !std::isfinite(static_cast<double>(length)))
      throw std::invalid_argument("FrequencyGrid: domain length must be positive and finite");
  }

  Index size() const { return n_; }
  Scalar length() const { return length_; }
  Scalar dxi() const { return Scalar(2) * std::numbers::pi_v<Scalar> / length_; }
  Scalar dx() const { return length_ / Scalar(n_); }
  Scalar left_endpoint() const { return -length_ / Scalar(2); }

  Index min_mode() const { return -n_ / 2; }
  Index max_mode() const { return n_ / 2 - 1; }
  bool contains_mode(Index k) const { return k >= min_mode() && k <= max_mode(); }
  Index mode(Index slot) const { return slot - n_ / 2; }
  Index slot(Index k) const { return k + n_ / 2; }

  Scalar xi(Index slot) const { return Scalar(mode(slot)) * dxi(); }
  Scalar x(Index j) const { return left_endpoint() + Scalar(j) * dx(); }

  /// Quadrature weight d(xi) / (2 pi) of one frequency cell; equals 1/L.
  Scalar spectral_weight() const { return Scalar(1) / length_; }

  /// Largest |xi| on the grid.
  Scalar max_abs_xi() const { return Scalar(n_ / 2) * dxi(); }

  bool operator==(const FrequencyGrid& other) const {
    return n_ == other.n_ && length_ == other.length_;
  }
  bool operator!=(const FrequencyGrid& other) const { return !(*this == other); }

 private:
  Index n_;
  Scalar length_;
};

/// Japanese bracket <xi> = (1 + xi^2)^{1/2}.
template <typename Scalar>
inline Scalar japanese(Scalar xi) {
  return std::sqrt(Scalar(1) + xi * xi);
}

/// Sobolev exponent carrier: weight <xi>^s.
template <typename Scalar>
struct NormSpec {
  Scalar s{0};

  explicit NormSpec(Scalar exponent) : s(exponent) {
    if (!std::isfinite(static_cast<double>(exponent)))
      throw std::invalid_argument("NormSpec: Sobolev exponent must be finite");
  }
  Scalar weight(Scalar xi) const { return std::pow(Scalar(1) + xi * xi, s / Scalar(2)); }
};

/// Fourier coefficients v^(xi_k) on a FrequencyGrid, convention
/// v^(xi) = int v(x) e^{-i x xi} dx.
template <typename Scalar>
class SpectralField {
 public:
  using Complex = std::complex<Scalar>;
  using Coeffs = ComplexVector<Scalar>;

  explicit SpectralField(const FrequencyGrid<Scalar>& grid)
      : grid_(grid), coeffs_(Coeffs::Zero(grid.size())) {}

  SpectralField(const FrequencyGrid<Scalar>& grid, Coeffs coeffs)
      : grid_(grid), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != grid_.size())
      throw std::invalid_argument("SpectralField: coefficient count does not match grid");
    if (!coeffs_.allFinite())
      throw std::invalid_argument("SpectralField: non-finite coefficient");
  }

  const FrequencyGrid<Scalar>& grid() const { return grid_; }
  const Coeffs& coeffs() const { return coeffs_; }
  Coeffs& coeffs() { return coeffs_; }
  Index size() const { return coeffs_.size(); }

  Complex operator[](Index slot) const { return coeffs_[slot]; }
  Complex& operator[](Index slot) { return coeffs_[slot]; }

  /// Coefficient at mode k, zero outside the grid.
  Complex at_mode(Index k) const {
    return grid_.contains_mode(k) ? coeffs_[grid_.slot(k)] : Complex(0);
  }

  bool is_zero() const { return (coeffs_.array() == Complex(0)).all(); }

  SpectralField& operator+=(const SpectralField& o) {
    require_same_grid(o);
    coeffs_ += o.coeffs_;
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    require_same_grid(o);
    coeffs_ -= o.coeffs_;
    return *this;
  }
  SpectralField& operator*=(Complex a) {
    coeffs_ *= a;
    return *this;
  }

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(Complex a, SpectralField b) { return b *= a; }
  friend SpectralField operator*(Scalar a, SpectralField b) { return b *= Complex(a); }

  void require_same_grid(const SpectralField& o) const {
    if (grid_ != o.grid_) throw std::invalid_argument("SpectralField: grid mismatch");
  }

 private:
  FrequencyGrid<Scalar> grid_;
  Coeffs coeffs_;
};

template <typename Scalar>
void require_same_grid(const SpectralField<Scalar>& a, const SpectralField<Scalar>& b) {
  a.require_same_grid(b);
}

/// Plancherel-consistent discrete H^s norm:
/// ( sum_k <xi_k>^{2s} |v_k|^2 dxi/(2 pi) )^{1/2}.
template <typename Scalar>
Scalar hs_norm(const SpectralField<Scalar>& field, Scalar s) {
  const auto& g = field.grid();
  if (!field.coeffs().allFinite()) throw std::invalid_argument("hs_norm: non-finite field");
  Scalar acc(0);
  for (Index i = 0; i < field.size(); ++i) {
    const Scalar xi = g.xi(i);
    acc += std::pow(Scalar(1) + xi * xi, s) * std::norm(field[i]);
  }
  return std::sqrt(acc * g.spectral_weight());
}

template <typename Scalar>
Scalar hs_norm(const SpectralField<Scalar>& field, const NormSpec<Scalar>& norm) {
  return hs_norm(field, norm.s);
}

/// Free Schrodinger flow S(t) = e^{i t d_x^2}: multiplies mode xi by e^{-i xi^2 t}.
template <typename Scalar>
SpectralField<Scalar> free_propagate(const SpectralField<Scalar>& field, Scalar t) {
  SpectralField<Scalar> out(field);
  const auto& g = field.grid();
  for (Index i = 0; i < out.size(); ++i) {
    const Scalar xi = g.xi(i);
    out[i] *= std::polar(Scalar(1), -xi * xi * t);
  }
  return out;
}

namespace detail {

// Maps mode k to its slot in an unshifted FFT buffer of length m.
inline Index fft_slot(Index k, Index m) { return ((k % m) + m) % m; }

// kissfft caches twiddles per instance; one unscaled engine per thread.
template <typename Scalar>
Eigen::FFT<Scalar>& fft_engine() {
  thread_local Eigen::FFT<Scalar> fft = [] {
    Eigen::FFT<Scalar> f;
    f.SetFlag(Eigen::FFT<Scalar>::Unscaled);
    return f;
  }();
  return fft;
}

// Physical samples on an m-point grid over the same period, for modes
// supplied by `coeff(k)` with k in [k_lo, k_hi] (|k| < m/2 required).
template <typename Scalar, typename CoeffFn>
ComplexVector<Scalar> synthesize(Index m, Scalar length, Index k_lo, Index k_hi, CoeffFn coeff) {
  using Complex = std::complex<Scalar>;
  std::vector<Complex> spec(static_cast<size_t>(m), Complex(0));
  for (Index k = k_lo; k <= k_hi; ++k) {
    // x_0 = -L/2 contributes the phase e^{-i pi k} = (-1)^k
    const Scalar sign = (k % 2 == 0) ? Scalar(1) : Scalar(-1);
    spec[static_cast<size_t>(fft_slot(k, m))] += sign * coeff(k) / length;
  }
  std::vector<Complex> phys;
  fft_engine<Scalar>().inv(phys, spec);
  ComplexVector<Scalar> out(m);
  for (Index j = 0; j < m; ++j) out[j] = phys[static_cast<size_t>(j)];
  return out;
}

// Spectral coefficients of m physical samples, returned for the modes of `grid`.
template <typename Scalar>
ComplexVector<Scalar> analyze(const ComplexVector<Scalar>& samples, const FrequencyGrid<Scalar>& grid) {
  using Complex = std::complex<Scalar>;
  const Index m = samples.size();
  std::vector<Complex> phys(samples.data(), samples.data() + m);
  std::vector<Complex> spec;
  fft_engine<Scalar>().fwd(spec, phys);
  const Scalar h = grid.length() / Scalar(m);
  ComplexVector<Scalar> out(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    const Index k = grid.mode(i);
    const Scalar sign = (k % 2 == 0) ? Scalar(1) : Scalar(-1);
    out[i] = sign * h * spec[static_cast<size_t>(fft_slot(k, m))];
  }
  return out;
}

}  // namespace detail

/// Samples v(x_j) on the physical grid x_j = -L/2 + j L/n.
template <typename Scalar>
ComplexVector<Scalar> to_physical(const SpectralField<Scalar>& field) {
  const auto& g = field.grid();
  return detail::synthesize<Scalar>(g.size(), g.length(), g.min_mode(), g.max_mode(),
                                    [&](Index k) { return field[g.slot(k)]; });
}

template <typename Scalar>
SpectralField<Scalar> to_spectral(const ComplexVector<Scalar>& samples, const FrequencyGrid<Scalar>& grid) {
  if (samples.size() != grid.size())
    throw std::invalid_argument("to_spectral: sample count does not match grid");
  return SpectralField<Scalar>(grid, detail::analyze(samples, grid));
}

/// Zero-padded pseudo-spectral evaluation. Fields are synthesized on a grid
/// `factor` times finer, combined pointwise, and projected back onto the
/// retained modes. With factor 3 the cubic and quintic products are free of
/// aliasing on the retained modes.
template <typename Scalar>
class PaddedTransform {
 public:
  using Complex = std::complex<Scalar>;

  PaddedTransform(const FrequencyGrid<Scalar>& grid, Index factor = 3)
      : grid_(grid), m_(grid.size() * factor) {}

  Index padded_size() const { return m_; }

  /// Physical samples of v on the padded grid.
  ComplexVector<Scalar> samples(const SpectralField<Scalar>& v) const {
    return detail::synthesize<Scalar>(m_, grid_.length(), grid_.min_mode(), grid_.max_mode(),
                                      [&](Index k) { return v[grid_.slot(k)]; });
  }

  /// Physical samples of d_x conj(v) on the padded grid. conj(v) carries
  /// modes -k, including +n/2 which the padded grid represents.
  ComplexVector<Scalar> conj_derivative_samples(const SpectralField<Scalar>& v) const {
    return detail::synthesize<Scalar>(m_, grid_.length(), -grid_.max_mode(), -grid_.min_mode(), [&](Index k) {
      const Scalar xi = Scalar(k) * grid_.dxi();
      return Complex(0, xi) * std::conj(v[grid_.slot(-k)]);
    });
  }

  SpectralField<Scalar> project(const ComplexVector<Scalar>& padded) const {
    return SpectralField<Scalar>(grid_, detail::analyze(padded, grid_));
  }

 private:
  FrequencyGrid<Scalar> grid_;
  Index m_;
};

namespace detail {

// Cumulative trapezoid of |f|^2 from the left endpoint, G(x_0) = 0.
template <typename Scalar>
RealVector<Scalar> cumulative_mass(const ComplexVector<Scalar>& f, Scalar dx) {
  RealVector<Scalar> g(f.size());
  if (f.size() == 0) return g;
  g[0] = Scalar(0);
  for (Index j = 1; j < f.size(); ++j)
    g[j] = g[j - 1] + Scalar(0.5) * dx * (std::norm(f[j - 1]) + std::norm(f[j]));
  return g;
}

template <typename Scalar>
SpectralField<Scalar> apply_gauge(const SpectralField<Scalar>& field, Scalar direction) {
  const auto& g = field.grid();
  ComplexVector<Scalar> samples = to_physical(field);
  const RealVector<Scalar> phase = cumulative_mass(samples, g.dx());
  for (Index j = 0; j < samples.size(); ++j) samples[j] *= std::polar(Scalar(1), direction * phase[j]);
  return to_spectral(samples, g);
}

}  // namespace detail

/// w = exp(-i int_{x_0}^x |u|^2) u, pointwise on the physical grid.
template <typename Scalar>
SpectralField<Scalar> gauge_forward(const SpectralField<Scalar>& u) {
  return detail::apply_gauge(u, Scalar(-1));
}

/// u = exp(+i int_{x_0}^x |w|^2) w; exact inverse since |w| = |u| pointwise.
template <typename Scalar>
SpectralField<Scalar> gauge_inverse(const SpectralField<Scalar>& w) {
  return detail::apply_gauge(w, Scalar(1));
}

/// Field with coefficients sampled from a function of xi.
template <typename Scalar, typename Fn>
SpectralField<Scalar> field_from_profile(const FrequencyGrid<Scalar>& grid, Fn profile) {
  SpectralField<Scalar> out(grid);
  for (Index i = 0; i < grid.size(); ++i) out[i] = profile(grid.xi(i));
  return out;
}

/// Field from physical samples of a function of x.
template <typename Scalar, typename Fn>
SpectralField<Scalar> field_from_function(const FrequencyGrid<Scalar>& grid, Fn fn) {
  ComplexVector<Scalar> samples(grid.size());
  for (Index j = 0; j < grid.size(); ++j) samples[j] = fn(grid.x(j));
  return to_spectral(samples, grid);
}

/// Single mode of amplitude `a` at mode k.
template <typename Scalar>
SpectralField<Scalar> single_mode(const FrequencyGrid<Scalar>& grid, Index k, std::complex<Scalar> a) {
  if (!grid.contains_mode(k)) throw std::invalid_argument("single_mode: mode outside grid");
  SpectralField<Scalar> out(grid);
  out[grid.slot(k)] = a;
  return out;
}

}  // namespace dnls

#endif  // DNLS_SPECTRAL_HPP
