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

#ifndef DNLS_SOLVERS_HPP
#define DNLS_SOLVERS_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dnls/nfr.hpp"
#include "dnls/operators.hpp"
#include "dnls/random.hpp"
#include "dnls/spectral.hpp"

namespace dnls {

template <typename Scalar>
struct SolverConfig {
  Index n = 32;
  Scalar length = Scalar(20);
  Scalar s = Scalar(0.6);
  Scalar dt = Scalar(1e-3);
  Scalar t_final = Scalar(0.1);
  int truncation = 2;  // J
  Scalar threshold = Scalar(4);  // N
  std::vector<Scalar> beta_override;
  Scalar picard_tol = Scalar(1e-10);
  int picard_max_iters = 30;
  Scalar c_hat = Scalar(0);  // empirical constant; 0 when not measured
  bool allow_noncompliant = false;
  double budget = kDefaultOperationBudget;

  FrequencyGrid<Scalar> grid() const { return FrequencyGrid<Scalar>(n, length); }

  ThresholdSchedule<Scalar> schedule() const {
    return beta_override.empty() ? ThresholdSchedule<Scalar>(s, threshold)
                                 : ThresholdSchedule<Scalar>::with_betas(s, threshold, beta_override);
  }

  int steps() const {
    if (!(dt > Scalar(0)) || !(t_final > Scalar(0))) throw std::invalid_argument("SolverConfig: dt and T must be > 0");
    const Scalar r = t_final / dt;
    const int k = static_cast<int>(std::lround(static_cast<double>(r)));
    if (k < 1 || std::abs(r - Scalar(k)) > Scalar(1e-9) * r)
      throw std::invalid_argument("SolverConfig: T must be an integer multiple of dt");
    return k;
  }

  void validate() const {
    grid();
    schedule();
    steps();
    if (truncation < 1) throw std::invalid_argument("SolverConfig: truncation J must be >= 1");
    if (!(picard_tol > Scalar(0)) || picard_max_iters < 1)
      throw std::invalid_argument("SolverConfig: invalid Picard controls");
  }
};

/// The smallness conditions of the contraction argument for given data.
template <typename Scalar>
struct Compliance {
  Scalar radius{};   // R = 2 ||v0||_{H^s}
  Scalar c_hat{};
  Scalar n_min{};    // 4 R^4
  Scalar t1{};       // 1 / (6 (1 + c) R^4)
  Scalar t_max{};    // min(T1, 1 / (6 c N^{1/2} R^2))
  bool threshold_ok = false;
  bool time_ok = false;
  bool compliant() const { return threshold_ok && time_ok; }
};

template <typename Scalar>
Compliance<Scalar> check_compliance(const SolverConfig<Scalar>& cfg, const SpectralField<Scalar>& v0) {
  Compliance<Scalar> c;
  c.radius = Scalar(2) * hs_norm(v0, cfg.s);
  c.c_hat = cfg.c_hat;
  const Scalar r2 = c.radius * c.radius, r4 = r2 * r2;
  c.n_min = Scalar(4) * r4;
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  c.t1 = r4 > 0 ? Scalar(1) / (Scalar(6) * (Scalar(1) + c.c_hat) * r4) : inf;
  const Scalar t2 = (c.c_hat > 0 && r2 > 0) ? Scalar(1) / (Scalar(6) * c.c_hat * std::sqrt(cfg.threshold) * r2) : inf;
  c.t_max = std::min(c.t1, t2);
  c.threshold_ok = cfg.threshold >= c.n_min;
  c.time_ok = cfg.c_hat > 0 && cfg.t_final <= c.t_max;
  return c;
}

template <typename Scalar>
struct Trajectory {
  std::vector<Scalar> times;
  std::vector<SpectralField<Scalar>> fields;
  std::string kind;
  int iterations = 0;
  std::vector<Scalar> residuals;
  bool compliant = false;

  size_t size() const { return times.size(); }
  const SpectralField<Scalar>& back() const { return fields.back(); }

  void push(Scalar t, SpectralField<Scalar> f) {
    if (!times.empty()) {
      if (!(t > times.back())) throw std::invalid_argument("Trajectory: times must increase strictly");
      require_same_grid(fields.front(), f);
    }
    times.push_back(t);
    fields.push_back(std::move(f));
  }

  /// sup_k ||f_k||_{H^s}.
  Scalar sup_norm(Scalar s) const {
    Scalar m(0);
    for (const auto& f : fields) m = std::max(m, hs_norm(f, s));
    return m;
  }
};

/// sup_k ||a_k - b_k||_{H^s}.
template <typename Scalar>
Scalar sup_distance(const Trajectory<Scalar>& a, const Trajectory<Scalar>& b, Scalar s) {
  if (a.size() != b.size()) throw std::invalid_argument("sup_distance: trajectories differ in length");
  Scalar m(0);
  for (size_t k = 0; k < a.size(); ++k) m = std::max(m, hs_norm(a.fields[k] - b.fields[k], s));
  return m;
}

class BlowUp : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, std::vector<Scalar> history)
      : std::runtime_error(what), residuals(std::move(history)) {}
  std::vector<Scalar> residuals;
};

/// d/dt v = Q(v) + T(v) with the pseudo-spectral right-hand sides.
template <typename Scalar>
SpectralField<Scalar> interaction_rhs(const SpectralField<Scalar>& v, Scalar t) {
  return eval_quintic(v, t) + eval_cubic_T_physical(v, t);
}

template <typename Scalar>
Scalar step_ratio(Scalar t_final, Scalar dt) {
  if (!(dt > 0) || !(t_final > 0)) throw std::invalid_argument("time grid: dt and T must be > 0");
  return t_final / dt;
}

/// Classical RK4 in the interaction representation from v0 at t = 0.
template <typename Scalar>
Trajectory<Scalar> integrate_reference(const SpectralField<Scalar>& v0, const SolverConfig<Scalar>& cfg,
                                       Scalar dt_override = Scalar(0)) {
  const Scalar dt = dt_override > 0 ? dt_override : cfg.dt;
  const Scalar r = step_ratio(cfg.t_final, dt);
  const int steps = static_cast<int>(std::lround(static_cast<double>(r)));
  const Scalar radius = Scalar(2) * hs_norm(v0, cfg.s);
  Trajectory<Scalar> out;
  out.kind = "reference";
  out.push(Scalar(0), v0);
  SpectralField<Scalar> v = v0;
  const Scalar h2 = dt / Scalar(2);
  for (int k = 0; k < steps; ++k) {
    const Scalar t = Scalar(k) * dt;
    const auto k1 = interaction_rhs(v, t);
    const auto k2 = interaction_rhs(v + h2 * k1, t + h2);
    const auto k3 = interaction_rhs(v + h2 * k2, t + h2);
    const auto k4 = interaction_rhs(v + dt * k3, t + dt);
    v += (dt / Scalar(6)) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
    if (radius > 0 && hs_norm(v, cfg.s) > Scalar(10) * radius)
      throw BlowUp("reference solver: ||v||_{H^s} exceeded 10R at t=" + std::to_string(double(t + dt)));
    out.push(Scalar(k + 1) * dt, v);
  }
  return out;
}

/// Gauge-transforms u0 and integrates the interaction-picture equation.
template <typename Scalar>
Trajectory<Scalar> solve_reference(const SpectralField<Scalar>& u0, const SolverConfig<Scalar>& cfg) {
  cfg.validate();
  return integrate_reference(gauge_forward(u0), cfg);
}

/// u(t) = gauge_inverse(S(t) v(t)).
template <typename Scalar>
SpectralField<Scalar> recover_u(const SpectralField<Scalar>& v, Scalar t) {
  return gauge_inverse(free_propagate(v, t));
}

/// Gamma(v)(t_k) = v0 + int_0^{t_k} [Q + sum TQ + sum TT1] + sum (T0(t_k) - T0(0)),
/// integrals by the trapezoid rule on the snapshot grid.
template <typename Scalar>
Trajectory<Scalar> picard_map(const Trajectory<Scalar>& traj, const SpectralField<Scalar>& v0,
                              const SolverConfig<Scalar>& cfg) {
  const int J = cfg.truncation;
  const auto sched = cfg.schedule();
  const size_t m = traj.size();
  if (m == 0) throw std::invalid_argument("picard_map: empty trajectory");
  std::vector<SpectralField<Scalar>> integrand, boundary;
  integrand.reserve(m);
  boundary.reserve(m);
  for (size_t k = 0; k < m; ++k) {
    const auto& v = traj.fields[k];
    const Scalar t = traj.times[k];
    SpectralField<Scalar> f = eval_quintic(v, t);
    SpectralField<Scalar> b(v.grid());
    for (int j = 1; j <= J; ++j) {
      f += eval_TQ(j, v, t, sched, cfg.budget);
      b += eval_T0(j, v, t, sched, cfg.budget);
    }
    for (int j = 0; j < J; ++j) f += eval_TT1(j, v, t, sched, cfg.budget);
    integrand.push_back(std::move(f));
    boundary.push_back(std::move(b));
  }
  Trajectory<Scalar> out;
  out.kind = "normal_form";
  SpectralField<Scalar> acc = v0;
  out.push(traj.times[0], v0);
  for (size_t k = 1; k < m; ++k) {
    const Scalar h = traj.times[k] - traj.times[k - 1];
    acc += (h / Scalar(2)) * (integrand[k - 1] + integrand[k]);
    out.push(traj.times[k], acc + boundary[k] - boundary[0]);
  }
  return out;
}

/// Constant trajectory v(t_k) = v0 on the solver's time grid.
template <typename Scalar>
Trajectory<Scalar> constant_trajectory(const SpectralField<Scalar>& v0, const SolverConfig<Scalar>& cfg) {
  Trajectory<Scalar> out;
  out.kind = "constant";
  const int steps = cfg.steps();
  for (int k = 0; k <= steps; ++k) out.push(Scalar(k) * cfg.dt, v0);
  return out;
}

/// Picard iteration on the truncated normal form equation. Starts from the
/// constant trajectory unless `start` is given. Refuses non-compliant
/// parameters unless cfg.allow_noncompliant is set.
template <typename Scalar>
Trajectory<Scalar> solve_normal_form(const SpectralField<Scalar>& v0, const SolverConfig<Scalar>& cfg,
                                     std::optional<Trajectory<Scalar>> start = std::nullopt) {
  cfg.validate();
  const bool compliant = check_compliance(cfg, v0).compliant();
  if (!compliant && !cfg.allow_noncompliant)
    throw std::invalid_argument("solve_normal_form: (N, T) violate the contraction conditions; set override");
  Trajectory<Scalar> cur = start ? std::move(*start) : constant_trajectory(v0, cfg);
  if (cur.size() != static_cast<size_t>(cfg.steps() + 1))
    throw std::invalid_argument("solve_normal_form: starting trajectory does not match the time grid");
  std::vector<Scalar> history;
  for (int it = 1; it <= cfg.picard_max_iters; ++it) {
    Trajectory<Scalar> next = picard_map(cur, v0, cfg);
    const Scalar res = sup_distance(next, cur, cfg.s);
    history.push_back(res);
    cur = std::move(next);
    if (res < cfg.picard_tol) {
      cur.iterations = it;
      cur.residuals = history;
      cur.compliant = compliant;
      return cur;
    }
  }
  throw NonConvergence<Scalar>("solve_normal_form: no convergence after " + std::to_string(cfg.picard_max_iters) +
                                   " iterations",
                               history);
}

/// ||Gamma(a) - Gamma(b)|| / ||a - b|| in sup-in-time H^s.
template <typename Scalar>
Scalar contraction_ratio(const Trajectory<Scalar>& a, const Trajectory<Scalar>& b, const SpectralField<Scalar>& v0,
                         const SolverConfig<Scalar>& cfg) {
  const Scalar d = sup_distance(a, b, cfg.s);
  if (!(d > 0)) throw std::invalid_argument("contraction_ratio: identical trajectories");
  return sup_distance(picard_map(a, v0, cfg), picard_map(b, v0, cfg), cfg.s) / d;
}

/// Largest of the normalized term-family ratios over unit random fields:
///   ||T_{T,1}^(1)|| / (N^{1/2}), ||Q||, ||T_0^(j+1)|| / N^{-j/2},
///   ||T_Q^(j+1)|| / N^{-j/2}, ||T_{T,1}^(j+1)|| / N^{-(j-1)/2},
/// for levels j = 1..J (the last family up to J-1), all in H^s.
template <typename Scalar>
Scalar measure_c_hat(const SolverConfig<Scalar>& cfg, int samples, std::uint64_t seed) {
  const auto g = cfg.grid();
  const auto sched = cfg.schedule();
  const Scalar N = cfg.threshold, s = cfg.s;
  Scalar c(0);
  for (int k = 0; k < samples; ++k) {
    auto rng = Philox4x32::for_case(seed, 0x63686174u, static_cast<std::uint32_t>(k));
    const auto v = random_field(g, s, rng);
    c = std::max(c, hs_norm(eval_quintic(v, Scalar(0)), s));
    c = std::max(c, hs_norm(eval_TT1(0, v, Scalar(0), sched, cfg.budget), s) / std::sqrt(N));
    for (int j = 1; j <= cfg.truncation; ++j) {
      const Scalar d = std::pow(N, -Scalar(j) / Scalar(2));
      c = std::max(c, hs_norm(eval_T0(j, v, Scalar(0), sched, cfg.budget), s) / d);
      c = std::max(c, hs_norm(eval_TQ(j, v, Scalar(0), sched, cfg.budget), s) / d);
      if (j < cfg.truncation)
        c = std::max(c, hs_norm(eval_TT1(j, v, Scalar(0), sched, cfg.budget), s) /
                            std::pow(N, -Scalar(j - 1) / Scalar(2)));
    }
  }
  return c;
}

template <typename Scalar>
struct CrossValidation {
  std::vector<Scalar> times;
  std::vector<Scalar> discrepancy;      // ||v_ref - v_nfr||_{H^s}
  std::vector<Scalar> remainder_times;
  std::vector<Scalar> remainder_norm;   // ||T_T^(J+1)(v_ref)||_{H^{s-1}}
  Scalar v0_norm{};
  int picard_iterations = 0;
  bool compliant = false;

  Scalar final_discrepancy() const { return discrepancy.back(); }
};

/// Runs both solvers from u0 and compares them snapshot by snapshot. The
/// remainder driver is sampled at `remainder_samples` evenly spaced
/// snapshots (0 skips it).
template <typename Scalar>
CrossValidation<Scalar> cross_validate(const SpectralField<Scalar>& u0, const SolverConfig<Scalar>& cfg,
                                       int remainder_samples = 5) {
  cfg.validate();
  const auto ref = solve_reference(u0, cfg);
  const auto& v0 = ref.fields.front();
  const auto nfr = solve_normal_form(v0, cfg);
  CrossValidation<Scalar> out;
  out.v0_norm = hs_norm(v0, cfg.s);
  out.picard_iterations = nfr.iterations;
  out.compliant = nfr.compliant;
  for (size_t k = 0; k < ref.size(); ++k) {
    out.times.push_back(ref.times[k]);
    out.discrepancy.push_back(hs_norm(ref.fields[k] - nfr.fields[k], cfg.s));
  }
  if (remainder_samples > 0) {
    const auto sched = cfg.schedule();
    const size_t last = ref.size() - 1;
    for (int q = 0; q < remainder_samples; ++q) {
      const size_t k = remainder_samples == 1 ? last : (last * static_cast<size_t>(q)) / size_t(remainder_samples - 1);
      out.remainder_times.push_back(ref.times[k]);
      out.remainder_norm.push_back(hs_norm(
          eval_remainder(cfg.truncation, ref.fields[k], ref.times[k], sched, cfg.budget), cfg.s - Scalar(1)));
    }
  }
  return out;
}

}  // namespace dnls

#endif  // DNLS_SOLVERS_HPP
