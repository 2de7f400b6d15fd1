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

#ifndef DNLS_RANDOM_HPP
#define DNLS_RANDOM_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "dnls/spectral.hpp"

namespace dnls {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A stream is
/// identified by its 64-bit key; the 128-bit counter is advanced per block
/// of four outputs, so any (key, position) pair is reproducible on its own.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;

  explicit Philox4x32(std::uint64_t key, std::uint64_t stream = 0)
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
        counter_{0, 0, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

  /// Stream for case `index` of suite `suite` under a base seed.
  static Philox4x32 for_case(std::uint64_t seed, std::uint32_t suite, std::uint32_t index) {
    return Philox4x32(seed, (std::uint64_t(suite) << 32) | index);
  }

  static Block bijection(Block ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
    for (int r = 0; r < 10; ++r) {
      const std::uint64_t p0 = std::uint64_t(kM0) * ctr[0];
      const std::uint64_t p1 = std::uint64_t(kM1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }

  std::uint32_t next_u32() {
    if (used_ == 4) {
      block_ = bijection(counter_, key_);
      if (++counter_[0] == 0) ++counter_[1];
      used_ = 0;
    }
    return block_[static_cast<size_t>(used_++)];
  }

  /// Uniform on (0, 1), 53 bits.
  double uniform() {
    const std::uint64_t hi = next_u32() >> 5, lo = next_u32() >> 6;
    return (double(hi) * 67108864.0 + double(lo) + 0.5) / 9007199254740992.0;
  }

  /// Standard normal by Box-Muller; both outputs are used.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double a = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::array<std::uint32_t, 2> key_;
  Block counter_;
  Block block_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0;
};

/// Complex Gaussian coefficients damped by <xi>^{-s-0.51}, normalized to unit
/// H^s norm.
template <typename Scalar>
SpectralField<Scalar> random_field(const FrequencyGrid<Scalar>& grid, Scalar s, Philox4x32& rng) {
  SpectralField<Scalar> out(grid);
  for (Index i = 0; i < grid.size(); ++i) {
    const Scalar re = Scalar(rng.normal()), im = Scalar(rng.normal());
    out[i] = std::complex<Scalar>(re, im) * std::pow(japanese(grid.xi(i)), -s - Scalar(0.51));
  }
  const Scalar norm = hs_norm(out, s);
  out *= std::complex<Scalar>(Scalar(1) / norm);
  return out;
}

/// Least squares line through (log x, log y). `residual` is the RMS of the
/// fit residuals in natural-log units.
struct SlopeFit {
  double slope = 0;
  double intercept = 0;
  double residual = 0;
  bool valid = false;
};

inline SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_loglog: size mismatch");
  SlopeFit f;
  const size_t m = x.size();
  if (m < 2) return f;
  std::vector<double> lx, ly;
  for (size_t i = 0; i < m; ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) return f;
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  double mx = 0, my = 0;
  for (size_t i = 0; i < m; ++i) mx += lx[i], my += ly[i];
  mx /= double(m);
  my /= double(m);
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < m; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0)) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (size_t i = 0; i < m; ++i) {
    const double r = ly[i] - (f.intercept + f.slope * lx[i]);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / double(m));
  f.valid = true;
  return f;
}

}  // namespace dnls

#endif  // DNLS_RANDOM_HPP
