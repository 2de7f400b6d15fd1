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

#include "dnls/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <numbers>
#include <sstream>

#include "dnls/nfr.hpp"
#include "dnls/random.hpp"
#include "dnls/solvers.hpp"
#include "dnls/trees.hpp"

namespace dnls {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::uint32_t suite_id(const std::string& name) {
  const auto& names = suite_names();
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<std::uint32_t>(i + 1);
  throw SpecError("unknown suite '" + name + "'");
}

double theta_of(double s) { return std::min(2 * s - 1, 0.5); }

template <typename T>
std::vector<T> json_list(const Json& j, const char* key, const std::vector<T>& fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_array()) throw SpecError(std::string("spec: '") + key + "' must be a list");
  try {
    return v.get<std::vector<T>>();
  } catch (const Json::exception&) {
    throw SpecError(std::string("spec: '") + key + "' has entries of the wrong type");
  }
}

template <typename T>
T json_value(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw SpecError(std::string("spec: '") + key + "' has the wrong type");
  }
}

// One record of a report. Only `measured` and `pass` take part in replay
// comparisons; wall-clock numbers live in `timing`.
struct Case {
  std::string name;
  Json inputs = Json::object();
  Json measured = Json::object();
  bool pass = true;
  double seconds = 0;
};

struct Outcome {
  std::vector<Case> cases;
  Json series = Json::array();
  Json counts = Json::object();
};

// Log-log regression of y against x with plot-ready columns. The test is
// slope <= target + slack and, when `max_residual` is given, residual <= it.
Json slope_test(const std::string& name, const std::vector<double>& x, const std::vector<double>& y,
                double target, double slack, std::optional<double> max_residual) {
  const SlopeFit f = fit_loglog(x, y);
  Json j;
  j["name"] = name;
  j["x"] = x;
  j["y"] = y;
  Json fit = Json::array();
  for (double xi : x) fit.push_back(f.valid ? Json(std::exp(f.intercept + f.slope * std::log(xi))) : Json());
  j["fit"] = fit;
  j["valid"] = f.valid;
  j["slope"] = f.valid ? Json(f.slope) : Json();
  j["intercept"] = f.valid ? Json(f.intercept) : Json();
  j["residual"] = f.valid ? Json(f.residual) : Json();
  j["slope_bound"] = target + slack;
  j["residual_bound"] = max_residual ? Json(*max_residual) : Json();
  bool pass = f.valid && f.slope <= target + slack;
  if (pass && max_residual) pass = f.residual <= *max_residual;
  if (!f.valid) j["note"] = "non-positive values; no log-log fit";
  j["pass"] = pass;
  return j;
}

Case case_from_series(const Json& series, Json inputs) {
  Case c;
  c.name = series.at("name").get<std::string>();
  c.inputs = std::move(inputs);
  for (const char* k : {"slope", "intercept", "residual", "valid"}) c.measured[k] = series.at(k);
  c.pass = series.at("pass").get<bool>();
  return c;
}

std::optional<double> optional_tolerance(const ExperimentSpec& spec, const std::string& key) {
  if (spec.has_tolerance(key)) return spec.tolerance(key);
  return std::nullopt;
}

double param(const ExperimentSpec& spec, const std::string& key, double fallback) {
  auto it = spec.params.find(key);
  return it == spec.params.end() ? fallback : it->second;
}

SpectralField<double> gaussian_data(const FrequencyGrid<double>& g, double eps) {
  return field_from_function(g, [eps](double x) { return std::complex<double>(eps * std::exp(-x * x / 4)); });
}

// ---------------------------------------------------------------- trees

Outcome run_trees(const ExperimentSpec& spec) {
  Outcome out;
  const std::uint32_t sid = suite_id(spec.suite);
  for (int J : spec.J) {
    Case c;
    c.name = "count J=" + std::to_string(J);
    c.inputs["J"] = J;
    const auto t0 = Clock::now();
    const auto trees = enumerate_trees(J);
    c.seconds = seconds_since(t0);
    std::int64_t product = 1;
    for (int k = 1; k <= 2 * J - 1; k += 2) product *= k;
    c.measured["count"] = trees.size();
    c.measured["expected"] = product;
    c.pass = static_cast<std::int64_t>(trees.size()) == product && c.seconds <= spec.tolerance("max_seconds_count");
    out.cases.push_back(std::move(c));
  }

  const int max_index_J = static_cast<int>(param(spec, "index_max_J", 3));
  // Integer leaf frequencies with log-uniform magnitude up to max_mode: every
  // modulation is then exact in double, and deep F_J memberships occur.
  const double max_mode = param(spec, "max_mode", 1e6);
  const double rel = spec.tolerance("mu_rel");
  const auto sched = ThresholdSchedule<double>(spec.s.empty() ? 0.6 : spec.s.front(),
                                               spec.N.empty() ? 4.0 : spec.N.front());
  for (int J : spec.J) {
    if (J > max_index_J) continue;
    Case c;
    c.name = "index algebra J=" + std::to_string(J);
    c.inputs = {{"J", J}, {"samples", spec.samples}, {"max_mode", max_mode}};
    const auto t0 = Clock::now();
    const auto trees = enumerate_trees(J);
    auto rng = Philox4x32::for_case(spec.seed, sid, static_cast<std::uint32_t>(J));
    double worst = 0;
    std::int64_t structure_failures = 0, in_F = 0, F_failures = 0;
    const RestrictionPredicate<double> pred{sched, J};
    for (int k = 0; k < spec.samples; ++k) {
      const auto& tree = trees[rng.next_u32() % trees.size()];
      std::map<NodeId, double> leaves;
      for (NodeId a : tree.terminals()) {
        const double mag = std::floor(std::exp(rng.uniform() * std::log(max_mode + 1)));
        leaves[a] = (rng.next_u32() & 1u) ? mag : -mag;
      }
      const auto a = assign_indices(tree, leaves);

      // arity and node-count invariants
      bool ok = tree.node_count() == 3 * J + 1 && static_cast<int>(tree.parentals().size()) == J &&
                static_cast<int>(tree.terminals().size()) == 2 * J + 1 &&
                static_cast<int>(tree.chronicle().size()) == J - 1;
      for (NodeId p : tree.parentals())
        for (NodeId ch : tree.node(p).children) ok = ok && ch != kNoNode && tree.node(ch).parent == p;
      for (int j = 2; j <= J; ++j) ok = ok && tree.root_of_generation(j) == tree.chronicle()[size_t(j - 2)];
      // essential terminals partition the terminal set
      std::vector<int> hits(static_cast<size_t>(tree.node_count()), 0);
      for (int j = 1; j <= J; ++j)
        for (NodeId e : tree.essential_terminals(j)) ++hits[size_t(e)];
      for (NodeId id = 0; id < tree.node_count(); ++id) ok = ok && hits[size_t(id)] == (tree.is_terminal(id) ? 1 : 0);
      // node constraint
      for (NodeId p : tree.parentals()) {
        const auto& ch = tree.node(p).children;
        ok = ok && a.xi[size_t(p)] == a.xi[size_t(ch[0])] - a.xi[size_t(ch[1])] + a.xi[size_t(ch[2])];
      }
      if (!ok) ++structure_failures;

      for (int j = 1; j <= J; ++j) {
        const double m = a.mu_inner(j);
        for (double other : {a.mu_expanded(j), a.mu_outer(j)}) {
          const double scale = std::max(std::abs(m), std::abs(other));
          if (std::abs(m - other) > 1e-12) worst = std::max(worst, std::abs(m - other) / scale);
        }
      }
      if (pred(a)) {
        ++in_F;
        bool f_ok = true;
        for (int j = 1; j <= J; ++j)
          f_ok = f_ok && std::abs(a.phase_tilde[size_t(j - 1)]) > sched.b(j) * sched.threshold();
        for (int j = 2; j <= J; ++j) {
          const double mt = std::abs(a.phase_tilde[size_t(j - 1)]), mj = std::abs(a.phase[size_t(j - 1)]);
          f_ok = f_ok && 0.5 * mt < mj && mj < 2 * mt;
        }
        if (!f_ok) ++F_failures;
      }
    }
    c.seconds = seconds_since(t0);
    c.measured["max_mu_rel_disagreement"] = worst;
    c.measured["structure_failures"] = structure_failures;
    c.measured["in_F"] = in_F;
    c.measured["F_property_failures"] = F_failures;
    c.pass = worst <= rel && structure_failures == 0 && F_failures == 0 &&
             c.seconds <= spec.tolerance("max_seconds_index");
    out.cases.push_back(std::move(c));
  }
  return out;
}

// ------------------------------------------------------- operator_bounds

Outcome run_operator_bounds(const ExperimentSpec& spec) {
  Outcome out;
  if (spec.s.empty()) return out;
  if (spec.n.size() != 2 || spec.L.size() != 2)
    throw SpecError("operator_bounds: n and L must each list a base and a refined value");
  const std::uint32_t sid = suite_id(spec.suite);
  struct GridSpec {
    int n;
    double L;
    const char* label;
  };
  const std::array<GridSpec, 3> grids{GridSpec{spec.n[0], spec.L[0], "base"},
                                      GridSpec{spec.n[1], spec.L[0], "refined_n"},
                                      GridSpec{spec.n[1], spec.L[1], "refined_L"}};
  const double max_factor = spec.tolerance("max_factor");
  const std::array<const char*, 3> ratio_names{"T_phi", "cubic_derivative", "dt_v"};
  for (size_t si = 0; si < spec.s.size(); ++si) {
    const double s = spec.s[si];
    const auto t0 = Clock::now();
    std::array<std::array<double, 3>, 3> r{};
    for (size_t gi = 0; gi < grids.size(); ++gi) {
      const FrequencyGrid<double> g(grids[gi].n, grids[gi].L);
      for (int k = 0; k < spec.samples; ++k) {
        auto rng = Philox4x32::for_case(spec.seed, sid,
                                        static_cast<std::uint32_t>((si * 3 + gi) * 1000000 + size_t(k)));
        const auto a = random_field(g, s, rng), b = random_field(g, s, rng), c = random_field(g, s, rng);
        r[gi][0] = std::max(r[gi][0], hs_norm(eval_trilinear(TrilinearKernel<double>::phi(), a, b, c), s));
        r[gi][1] = std::max(r[gi][1], cubic_derivative_weaknorm_ratio(a, b, c, s));
        r[gi][2] = std::max(r[gi][2], dt_v_norm_check(a, 0.0, s));
      }
    }
    const double secs = seconds_since(t0) / 3.0;
    for (size_t q = 0; q < 3; ++q) {
      for (size_t gi = 1; gi < grids.size(); ++gi) {
        Case c;
        c.name = std::string(ratio_names[q]) + " s=" + Json(s).dump() + " " + grids[gi].label;
        c.inputs = {{"s", s},
                    {"samples", spec.samples},
                    {"from", {{"n", grids[gi - 1].n}, {"L", grids[gi - 1].L}}},
                    {"to", {{"n", grids[gi].n}, {"L", grids[gi].L}}}};
        const double from = r[gi - 1][q], to = r[gi][q];
        const double factor = to / from;
        c.measured = {{"ratio_from", from}, {"ratio_to", to}, {"factor", factor}};
        c.pass = factor < max_factor && factor > 1.0 / max_factor;
        c.seconds = secs;
        out.cases.push_back(std::move(c));
      }
    }
  }
  return out;
}

// ----------------------------------------------------------- weak_bounds

Outcome run_weak_bounds(const ExperimentSpec& spec) {
  Outcome out;
  if (spec.s.empty() || spec.M.empty()) return out;
  const std::uint32_t sid = suite_id(spec.suite);
  const FrequencyGrid<double> g(spec.n.at(0), spec.L.at(0));
  const double slack = spec.tolerance("slope_slack");
  const auto max_res = optional_tolerance(spec, "max_residual");
  const size_t nm = spec.M.size();
  for (size_t si = 0; si < spec.s.size(); ++si) {
    const double s = spec.s[si];
    const auto t0 = Clock::now();
    std::array<std::vector<double>, 3> rough_max;
    rough_max.fill(std::vector<double>(nm, 0.0));
    std::vector<double> smooth_max(nm, 0.0);
    for (int place = 0; place < 3; ++place) {
      for (int k = 0; k < spec.samples; ++k) {
        auto rng = Philox4x32::for_case(spec.seed, sid,
                                        static_cast<std::uint32_t>((si * 3 + size_t(place)) * 1000000 + size_t(k)));
        std::array<SpectralField<double>, 3> v{random_field(g, s, rng), random_field(g, s, rng),
                                               random_field(g, s, rng)};
        const auto rough = random_field(g, s - 1, rng);
        auto w = v;
        w[size_t(place)] = rough;
        for (size_t m = 0; m < nm; ++m) {
          const auto kernel = TrilinearKernel<double>::weak(spec.M[m]);
          rough_max[size_t(place)][m] =
              std::max(rough_max[size_t(place)][m], hs_norm(eval_trilinear(kernel, w[0], w[1], w[2]), s - 1));
          if (place == 0)
            smooth_max[m] = std::max(smooth_max[m], hs_norm(eval_trilinear(kernel, v[0], v[1], v[2]), s));
        }
      }
    }
    const double secs = seconds_since(t0);
    for (int place = 0; place < 3; ++place) {
      const std::string name = "weak H^{s-1} s=" + Json(s).dump() + " placement=" + std::to_string(place + 1);
      Json ser = slope_test(name, spec.M, rough_max[size_t(place)], -theta_of(s), slack, max_res);
      Case c = case_from_series(ser, {{"s", s}, {"placement", place + 1}, {"samples", spec.samples}});
      c.seconds = secs;
      out.cases.push_back(std::move(c));
      out.series.push_back(std::move(ser));
    }
    const std::string name = "weak H^s s=" + Json(s).dump();
    Json ser = slope_test(name, spec.M, smooth_max, -0.5, slack, max_res);
    Case c = case_from_series(ser, {{"s", s}, {"samples", spec.samples}});
    c.seconds = secs;
    out.cases.push_back(std::move(c));
    out.series.push_back(std::move(ser));
  }
  return out;
}

// ----------------------------------------------------------------- decay

Outcome run_decay(const ExperimentSpec& spec) {
  Outcome out;
  if (spec.s.empty() || spec.J.empty() || spec.N.empty() || spec.families.empty()) return out;
  const std::uint32_t sid = suite_id(spec.suite);
  const FrequencyGrid<double> g(spec.n.at(0), spec.L.at(0));
  const double slack = spec.tolerance("slope_slack");
  const double budget = param(spec, "budget", kDefaultOperationBudget);
  for (size_t si = 0; si < spec.s.size(); ++si) {
    const double s = spec.s[si];
    auto rng = Philox4x32::for_case(spec.seed, sid, static_cast<std::uint32_t>(si));
    const auto v = random_field(g, s, rng);
    for (int J : spec.J) {
      for (const auto& fname : spec.families) {
        const NfrFamily fam = parse_family(fname);
        const bool weak_norm = fam == NfrFamily::remainder;
        double target = 0;
        switch (fam) {
          case NfrFamily::remainder: target = -theta_of(s) * J; break;
          case NfrFamily::almost_resonant: target = -(J - 1) / 2.0; break;
          case NfrFamily::boundary:
          case NfrFamily::quintic: target = -J / 2.0; break;
        }
        const std::string name = fname + " J=" + std::to_string(J) + " s=" + Json(s).dump();
        const auto t0 = Clock::now();
        std::vector<double> y;
        for (double N : spec.N) {
          const ThresholdSchedule<double> sched(s, N);
          try {
            y.push_back(hs_norm(eval_family(fam, J, v, 0.0, sched, budget), weak_norm ? s - 1 : s));
          } catch (const BudgetExceeded& e) {
            throw BudgetExceeded("decay case '" + name + "' N=" + Json(N).dump() + ": " + e.what());
          }
        }
        const auto res_key = "max_residual_" + fname;
        Json ser = slope_test(name, spec.N, y, target, slack, optional_tolerance(spec, res_key));
        if (std::all_of(y.begin(), y.end(), [](double q) { return q == 0; }))
          ser["note"] = "identically zero on this grid for every N";
        Case c = case_from_series(ser, {{"family", fname}, {"J", J}, {"s", s}, {"norm", weak_norm ? "H^{s-1}" : "H^s"}});
        c.measured["norms"] = y;
        c.seconds = seconds_since(t0);
        out.cases.push_back(std::move(c));
        out.series.push_back(std::move(ser));
      }
    }
  }
  return out;
}

// ----------------------------------------------------------- solver_xval

SolverConfig<double> xval_config(const ExperimentSpec& spec, double s, int J) {
  SolverConfig<double> cfg;
  cfg.n = spec.n.at(0);
  cfg.length = spec.L.at(0);
  cfg.s = s;
  cfg.dt = spec.dt;
  cfg.t_final = spec.T;
  cfg.truncation = J;
  cfg.threshold = spec.N.at(0);
  cfg.picard_tol = param(spec, "picard_tol", cfg.picard_tol);
  cfg.picard_max_iters = static_cast<int>(param(spec, "picard_max_iters", cfg.picard_max_iters));
  cfg.budget = param(spec, "budget", cfg.budget);
  return cfg;
}

// v0 + rho (cos(w t) phi1 + sin(w t) phi2), rho drawn so the trajectory stays
// inside the ball of radius R = 2||v0||.
Trajectory<double> random_ball_trajectory(const SpectralField<double>& v0, const SolverConfig<double>& cfg,
                                          Philox4x32& rng) {
  const double R = 2 * hs_norm(v0, cfg.s);
  const auto phi1 = random_field(cfg.grid(), cfg.s, rng), phi2 = random_field(cfg.grid(), cfg.s, rng);
  const double rho = rng.uniform() * 0.45 * R / std::numbers::sqrt2;
  const double w = 2 * std::numbers::pi * (1 + rng.uniform()) / cfg.t_final;
  Trajectory<double> tr;
  tr.kind = "random";
  for (int k = 0; k <= cfg.steps(); ++k) {
    const double t = k * cfg.dt;
    tr.push(t, v0 + (rho * std::cos(w * t)) * phi1 + (rho * std::sin(w * t)) * phi2);
  }
  return tr;
}

Outcome run_solver_xval(const ExperimentSpec& spec) {
  Outcome out;
  if (spec.s.empty() || spec.J.empty()) return out;
  const std::uint32_t sid = suite_id(spec.suite);
  const double rel_tol = spec.tolerance("rel_discrepancy");
  const int c_samples = static_cast<int>(param(spec, "c_hat_samples", 4));
  const int rem_samples = static_cast<int>(param(spec, "remainder_samples", 3));
  const int pairs = static_cast<int>(param(spec, "picard_pairs", 0));
  for (size_t si = 0; si < spec.s.size(); ++si) {
    const double s = spec.s[si];
    std::vector<double> finals;
    for (int J : spec.J) {
      const auto t0 = Clock::now();
      auto cfg = xval_config(spec, s, J);
      cfg.c_hat = measure_c_hat(cfg, c_samples, spec.seed);
      const auto u0 = gaussian_data(cfg.grid(), spec.epsilon);
      const auto comp = check_compliance(cfg, gauge_forward(u0));
      Case c;
      c.name = "cross J=" + std::to_string(J) + " s=" + Json(s).dump();
      c.inputs = {{"J", J}, {"s", s}, {"N", cfg.threshold}, {"epsilon", spec.epsilon}, {"T", cfg.t_final},
                  {"dt", cfg.dt}, {"n", cfg.n}, {"L", cfg.length}};
      c.measured["c_hat"] = cfg.c_hat;
      c.measured["R"] = comp.radius;
      c.measured["N_min"] = comp.n_min;
      c.measured["T_max"] = comp.t_max;
      c.measured["compliant"] = comp.compliant();
      if (!comp.compliant()) {
        c.measured["note"] = "parameters violate the contraction conditions; not run";
        c.pass = false;
        out.cases.push_back(std::move(c));
        continue;
      }
      const auto xv = cross_validate(u0, cfg, rem_samples);
      finals.push_back(xv.final_discrepancy());
      c.measured["v0_norm"] = xv.v0_norm;
      c.measured["picard_iterations"] = xv.picard_iterations;
      c.measured["final_discrepancy"] = xv.final_discrepancy();
      c.measured["relative_discrepancy"] = xv.final_discrepancy() / xv.v0_norm;
      c.measured["remainder_times"] = xv.remainder_times;
      c.measured["remainder_norm"] = xv.remainder_norm;
      c.pass = xv.final_discrepancy() <= rel_tol * xv.v0_norm;
      c.seconds = seconds_since(t0);
      out.cases.push_back(std::move(c));
      Json ser;
      ser["name"] = "discrepancy J=" + std::to_string(J) + " s=" + Json(s).dump();
      ser["x"] = xv.times;
      ser["y"] = xv.discrepancy;
      out.series.push_back(std::move(ser));
    }
    if (finals.size() == spec.J.size() && finals.size() > 1) {
      Case c;
      c.name = "monotone in J s=" + Json(s).dump();
      c.inputs = {{"J", spec.J}, {"s", s}};
      c.measured["final_discrepancy"] = finals;
      c.pass = true;
      for (size_t q = 1; q < finals.size(); ++q) c.pass = c.pass && finals[q] <= finals[q - 1];
      out.cases.push_back(std::move(c));
    }

    if (pairs <= 0) continue;
    // Picard behavior at the largest truncation.
    const int J = *std::max_element(spec.J.begin(), spec.J.end());
    auto cfg = xval_config(spec, s, J);
    cfg.c_hat = measure_c_hat(cfg, c_samples, spec.seed);
    const auto v0 = gauge_forward(gaussian_data(cfg.grid(), spec.epsilon));
    const double R = 2 * hs_norm(v0, s);
    if (!check_compliance(cfg, v0).compliant()) {
      Case c;
      c.name = "picard s=" + Json(s).dump();
      c.measured["note"] = "parameters violate the contraction conditions; not run";
      c.pass = false;
      out.cases.push_back(std::move(c));
      continue;
    }
    {
      const auto t0 = Clock::now();
      Case c;
      c.name = "contraction J=" + std::to_string(J) + " s=" + Json(s).dump();
      c.inputs = {{"pairs", pairs}, {"J", J}, {"s", s}, {"R", R}};
      std::vector<double> ratios;
      for (int p = 0; p < pairs; ++p) {
        auto rng = Philox4x32::for_case(spec.seed, sid, static_cast<std::uint32_t>(1000 * (si + 1) + size_t(p)));
        const auto a = random_ball_trajectory(v0, cfg, rng), b = random_ball_trajectory(v0, cfg, rng);
        ratios.push_back(contraction_ratio(a, b, v0, cfg));
      }
      const double worst = *std::max_element(ratios.begin(), ratios.end());
      c.measured["ratios"] = ratios;
      c.measured["max_ratio"] = worst;
      c.pass = worst < spec.tolerance("contraction_max");
      c.seconds = seconds_since(t0);
      out.cases.push_back(std::move(c));
    }
    {
      const auto t0 = Clock::now();
      Case c;
      c.name = "fixed point J=" + std::to_string(J) + " s=" + Json(s).dump();
      c.inputs = {{"J", J}, {"s", s}, {"R", R}, {"picard_tol", cfg.picard_tol}};
      const auto from_constant = solve_normal_form(v0, cfg);
      auto start = integrate_reference(v0, cfg);
      const auto from_reference = solve_normal_form(v0, cfg, std::optional<Trajectory<double>>(std::move(start)));
      const double sup = from_constant.sup_norm(s);
      const double gap = sup_distance(from_constant, from_reference, s);
      c.measured["sup_norm"] = sup;
      c.measured["iterations_constant_start"] = from_constant.iterations;
      c.measured["iterations_reference_start"] = from_reference.iterations;
      c.measured["residuals_constant_start"] = from_constant.residuals;
      c.measured["start_gap"] = gap;
      c.pass = sup <= R && gap <= spec.tolerance("uniqueness_factor") * cfg.picard_tol;
      c.seconds = seconds_since(t0);
      out.cases.push_back(std::move(c));
    }
  }
  return out;
}

// ---------------------------------------------------------- conservation

Outcome run_conservation(const ExperimentSpec& spec) {
  Outcome out;
  if (spec.n.empty() || spec.L.empty()) return out;
  const std::uint32_t sid = suite_id(spec.suite);
  SolverConfig<double> cfg;
  cfg.n = spec.n[0];
  cfg.length = spec.L[0];
  cfg.s = spec.s.empty() ? 0.6 : spec.s[0];
  cfg.dt = spec.dt;
  cfg.t_final = spec.T;
  const auto g = cfg.grid();
  const auto u0 = gaussian_data(g, spec.epsilon);
  const auto v0 = gauge_forward(u0);
  {
    const auto t0 = Clock::now();
    Case c;
    c.name = "mass drift";
    c.inputs = {{"n", cfg.n}, {"L", cfg.length}, {"epsilon", spec.epsilon}, {"T", cfg.t_final}, {"dt", cfg.dt}};
    const auto tr = integrate_reference(v0, cfg);
    const double m0 = std::pow(hs_norm(v0, 0.0), 2);
    double drift = 0;
    for (const auto& f : tr.fields) drift = std::max(drift, std::abs(std::pow(hs_norm(f, 0.0), 2) - m0) / m0);
    c.measured["max_relative_drift"] = drift;
    c.pass = drift <= spec.tolerance("mass_drift");
    c.seconds = seconds_since(t0);
    out.cases.push_back(std::move(c));
  }
  {
    const auto t0 = Clock::now();
    Case c;
    c.name = "gauge roundtrip";
    c.inputs = {{"samples", spec.samples}, {"epsilon", spec.epsilon}};
    auto sup_err = [](const SpectralField<double>& u) {
      return (to_physical(gauge_inverse(gauge_forward(u))) - to_physical(u)).cwiseAbs().maxCoeff();
    };
    double worst = sup_err(u0);
    for (int k = 0; k < spec.samples; ++k) {
      auto rng = Philox4x32::for_case(spec.seed, sid, static_cast<std::uint32_t>(k));
      worst = std::max(worst, sup_err(random_field(g, cfg.s, rng)));
    }
    c.measured["max_sup_error"] = worst;
    c.pass = worst <= spec.tolerance("gauge_sup");
    c.seconds = seconds_since(t0);
    out.cases.push_back(std::move(c));
  }
  {
    const auto t0 = Clock::now();
    Case c;
    c.name = "step halving order";
    const double h = param(spec, "order_dt", 0.02);
    c.inputs = {{"dt", {h, h / 2, h / 4}}, {"T", cfg.t_final}, {"epsilon", spec.epsilon}};
    const auto a = integrate_reference(v0, cfg, h).back();
    const auto b = integrate_reference(v0, cfg, h / 2).back();
    const auto d = integrate_reference(v0, cfg, h / 4).back();
    const double e1 = hs_norm(a - b, 0.0), e2 = hs_norm(b - d, 0.0);
    const double ratio = e1 / e2;
    const double f = spec.tolerance("order_factor");
    c.measured = {{"e_coarse", e1}, {"e_fine", e2}, {"ratio", ratio}, {"observed_order", std::log2(ratio)}};
    c.pass = ratio >= 16 / f && ratio <= 16 * f;
    c.seconds = seconds_since(t0);
    out.cases.push_back(std::move(c));
  }
  return out;
}

// ------------------------------------------------------------- reports

std::string csv_cell(const Json& v) {
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }
  if (v.is_null()) return "";
  return csv_cell(Json(v.dump()));
}

void flatten(const std::string& prefix, const Json& v, std::vector<std::pair<std::string, Json>>& rows) {
  if (v.is_object()) {
    for (auto it = v.begin(); it != v.end(); ++it) flatten(prefix.empty() ? it.key() : prefix + "." + it.key(), *it, rows);
  } else if (v.is_array()) {
    for (size_t i = 0; i < v.size(); ++i) flatten(prefix + "[" + std::to_string(i) + "]", v[i], rows);
  } else {
    rows.emplace_back(prefix, v);
  }
}

void diff_json(const std::string& path, const Json& a, const Json& b, Json& diffs) {
  if (a.type() != b.type() || (!a.is_structured() && a != b)) {
    diffs.push_back({{"path", path}, {"report", a}, {"replay", b}});
    return;
  }
  if (a.is_object()) {
    for (auto it = a.begin(); it != a.end(); ++it)
      diff_json(path + "/" + it.key(), *it, b.contains(it.key()) ? b.at(it.key()) : Json(), diffs);
    for (auto it = b.begin(); it != b.end(); ++it)
      if (!a.contains(it.key())) diffs.push_back({{"path", path + "/" + it.key()}, {"report", Json()}, {"replay", *it}});
  } else if (a.is_array()) {
    if (a.size() != b.size()) {
      diffs.push_back({{"path", path + "#size"}, {"report", a.size()}, {"replay", b.size()}});
      return;
    }
    for (size_t i = 0; i < a.size(); ++i) diff_json(path + "/" + std::to_string(i), a[i], b[i], diffs);
  }
}

}  // namespace

// ------------------------------------------------------------ the spec

ExperimentSpec ExperimentSpec::defaults(const std::string& suite) {
  suite_id(suite);
  ExperimentSpec s;
  s.suite = suite;
  const double pi = std::numbers::pi;
  if (suite == "trees") {
    s.J = {1, 2, 3, 4, 5, 6};
    s.s = {1.0};  // beta_1 = 625 keeps F_2 reachable by sampling
    s.N = {4};
    s.samples = 10000;
    s.params = {{"index_max_J", 3}, {"max_mode", 1e6}};
    s.tolerances = {{"max_seconds_count", 10}, {"max_seconds_index", 30}, {"mu_rel", 1e-10}};
  } else if (suite == "operator_bounds") {
    s.s = {0.55, 0.6, 1.0};
    s.n = {64, 128};
    s.L = {32 * pi, 64 * pi};
    s.samples = 100;
    s.tolerances = {{"max_factor", 2}};
  } else if (suite == "weak_bounds") {
    s.s = {0.6, 0.8};
    s.n = {128};
    s.L = {4 * pi};
    s.M = {1, 4, 16, 64, 256};
    s.samples = 30;
    s.tolerances = {{"slope_slack", 0.15}};
  } else if (suite == "decay") {
    s.s = {0.6, 0.8};
    s.J = {1, 2};
    s.N = {4, 16, 64, 256};
    s.n = {32};
    s.L = {2 * pi};
    s.families = {"remainder", "t0", "tq", "tt1"};
    s.tolerances = {{"slope_slack", 0.3}, {"max_residual_remainder", 0.2}};
  } else if (suite == "solver_xval") {
    s.s = {0.6};
    s.J = {1, 2};
    s.N = {4};
    s.n = {32};
    s.L = {20};
    s.epsilon = 0.1;
    s.T = 0.1;
    s.dt = 1e-3;
    s.params = {{"c_hat_samples", 4}, {"remainder_samples", 3}, {"picard_pairs", 20}, {"picard_tol", 1e-10}};
    s.tolerances = {{"rel_discrepancy", 1e-2}, {"contraction_max", 1}, {"uniqueness_factor", 10}};
  } else if (suite == "conservation") {
    s.n = {64};
    s.L = {20};
    s.s = {0.6};
    s.epsilon = 1.0;
    s.T = 1.0;
    s.dt = 1e-3;
    s.samples = 5;
    s.params = {{"order_dt", 0.02}};
    s.tolerances = {{"mass_drift", 1e-8}, {"gauge_sup", 1e-12}, {"order_factor", 3}};
  }
  return s;
}

double ExperimentSpec::tolerance(const std::string& key) const {
  auto it = tolerances.find(key);
  if (it == tolerances.end()) throw SpecError("spec: suite '" + suite + "' needs tolerance '" + key + "'");
  return it->second;
}

Json ExperimentSpec::to_json() const {
  Json j;
  j["suite"] = suite;
  j["s"] = s;
  j["N"] = N;
  j["J"] = J;
  j["n"] = n;
  j["L"] = L;
  j["M"] = M;
  j["families"] = families;
  j["samples"] = samples;
  j["seed"] = seed;
  j["epsilon"] = epsilon;
  j["T"] = T;
  j["dt"] = dt;
  j["params"] = Json(params);
  j["tolerances"] = Json(tolerances);
  j["output"] = output;
  return j;
}

ExperimentSpec ExperimentSpec::from_json(const Json& j) {
  if (!j.is_object()) throw SpecError("spec: expected a JSON object");
  if (!j.contains("suite") || !j.at("suite").is_string()) throw SpecError("spec: missing 'suite'");
  static const std::set<std::string> known{"suite", "s",       "N", "J",  "n",      "L",          "M",     "families",
                                           "samples", "seed", "epsilon", "T", "dt", "params", "tolerances", "output"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw SpecError("spec: unknown key '" + it.key() + "'");
  ExperimentSpec d = defaults(j.at("suite").get<std::string>());
  ExperimentSpec s = d;
  s.s = json_list(j, "s", d.s);
  s.N = json_list(j, "N", d.N);
  s.J = json_list(j, "J", d.J);
  s.n = json_list(j, "n", d.n);
  s.L = json_list(j, "L", d.L);
  s.M = json_list(j, "M", d.M);
  s.families = json_list(j, "families", d.families);
  s.samples = json_value(j, "samples", d.samples);
  s.seed = json_value(j, "seed", d.seed);
  s.epsilon = json_value(j, "epsilon", d.epsilon);
  s.T = json_value(j, "T", d.T);
  s.dt = json_value(j, "dt", d.dt);
  s.output = json_value(j, "output", d.output);
  if (j.contains("params")) s.params = json_value(j, "params", d.params);
  if (j.contains("tolerances")) s.tolerances = json_value(j, "tolerances", d.tolerances);
  if (s.samples < 0) throw SpecError("spec: samples must be >= 0");
  for (const auto& f : s.families) {
    try {
      parse_family(f);
    } catch (const std::invalid_argument& e) {
      throw SpecError(std::string("spec: ") + e.what());
    }
  }
  for (int v : s.J)
    if (v < 1 || v > kMaxEnumeratedGeneration) throw SpecError("spec: J entries must lie in [1, 6]");
  for (int v : s.n)
    if (v < 2 || v % 2) throw SpecError("spec: grid sizes must be even and >= 2");
  for (double v : s.L)
    if (!(v > 0)) throw SpecError("spec: L entries must be > 0");
  for (double v : s.M)
    if (!(v >= 1)) throw SpecError("spec: M entries must be >= 1");
  for (double v : s.N)
    if (!(v > 1)) throw SpecError("spec: N entries must exceed 1");
  for (double v : s.s)
    if (!(v > 0.5)) throw SpecError("spec: s entries must exceed 1/2");
  return s;
}

std::string ExperimentSpec::hash() const {
  Json j = to_json();
  j.erase("output");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

// ------------------------------------------------------------- drivers

Json run_suite(const ExperimentSpec& spec) {
  static const std::map<std::string, std::function<Outcome(const ExperimentSpec&)>> runners{
      {"trees", run_trees},           {"operator_bounds", run_operator_bounds}, {"weak_bounds", run_weak_bounds},
      {"decay", run_decay},           {"solver_xval", run_solver_xval},         {"conservation", run_conservation}};
  auto it = runners.find(spec.suite);
  if (it == runners.end()) throw SpecError("unknown suite '" + spec.suite + "'");
  const auto t0 = Clock::now();
  Outcome o = it->second(spec);
  Json report;
  report["spec"] = spec.to_json();
  report["spec_hash"] = spec.hash();
  report["suite"] = spec.suite;
  Json cases = Json::array();
  Json timing = Json::object();
  bool pass = true;
  for (auto& c : o.cases) {
    cases.push_back({{"name", c.name}, {"inputs", c.inputs}, {"measured", c.measured}, {"pass", c.pass}});
    timing[c.name] = c.seconds;
    pass = pass && c.pass;
  }
  report["cases"] = cases;
  report["series"] = o.series;
  report["pass"] = pass;
  report["failed"] = Json::array();
  for (const auto& c : o.cases)
    if (!c.pass) report["failed"].push_back(c.name);
  report["timing"] = {{"wall_seconds", seconds_since(t0)}, {"cases", timing}};
  return report;
}

void write_report(const Json& report, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::string stem = (fs::path(dir) / report.at("suite").get<std::string>()).string();
  {
    std::ofstream f(stem + "_report.json");
    if (!f) throw std::runtime_error("cannot write " + stem + "_report.json");
    f << report.dump(2) << '\n';
  }
  {
    std::ofstream f(stem + "_cases.csv");
    if (!f) throw std::runtime_error("cannot write " + stem + "_cases.csv");
    f.precision(17);
    f << "case,pass,key,value\n";
    for (const auto& c : report.at("cases")) {
      std::vector<std::pair<std::string, Json>> rows;
      flatten("", c.at("measured"), rows);
      const std::string name = csv_cell(c.at("name")), pass = c.at("pass").get<bool>() ? "1" : "0";
      for (const auto& [k, v] : rows) f << name << ',' << pass << ',' << csv_cell(Json(k)) << ',' << csv_cell(v) << '\n';
    }
  }
  {
    std::ofstream f(stem + "_series.csv");
    if (!f) throw std::runtime_error("cannot write " + stem + "_series.csv");
    f << "series,x,y,fit\n";
    for (const auto& s : report.at("series")) {
      const auto& x = s.at("x");
      const auto& y = s.at("y");
      for (size_t i = 0; i < x.size(); ++i) {
        f << csv_cell(s.at("name")) << ',' << csv_cell(x[i]) << ',' << csv_cell(y[i]) << ',';
        if (s.contains("fit")) f << csv_cell(s.at("fit")[i]);
        f << '\n';
      }
    }
  }
}

Json replay(const Json& report) {
  if (!report.is_object() || !report.contains("spec")) throw SpecError("replay: report has no embedded spec");
  if (!report.contains("spec_hash") || !report.at("spec_hash").is_string())
    throw SpecError("replay: report has no spec hash");
  const ExperimentSpec spec = ExperimentSpec::from_json(report.at("spec"));
  Json result;
  result["spec_hash"] = report.at("spec_hash");
  Json diffs = Json::array();
  if (spec.hash() != report.at("spec_hash").get<std::string>()) {
    diffs.push_back({{"path", "/spec_hash"}, {"report", report.at("spec_hash")}, {"replay", spec.hash()}});
    result["identical"] = false;
    result["diffs"] = diffs;
    return result;
  }
  const Json fresh = run_suite(spec);
  Json a = Json::array(), b = Json::array();
  for (const auto& c : report.value("cases", Json::array())) a.push_back({{"name", c.at("name")}, {"measured", c.at("measured")}, {"pass", c.at("pass")}});
  for (const auto& c : fresh.at("cases")) b.push_back({{"name", c.at("name")}, {"measured", c.at("measured")}, {"pass", c.at("pass")}});
  diff_json("/cases", a, b, diffs);
  diff_json("/series", report.value("series", Json::array()), fresh.at("series"), diffs);
  result["identical"] = diffs.empty();
  result["diffs"] = diffs;
  return result;
}

}  // namespace dnls
