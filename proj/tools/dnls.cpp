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

// Command line front end. Exit codes: 0 pass, 1 test failures,
// 2 budget or configuration errors.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "dnls/config.hpp"
#include "dnls/harness.hpp"
#include "dnls/io.hpp"
#include "dnls/nfr.hpp"
#include "dnls/operators.hpp"
#include "dnls/random.hpp"
#include "dnls/solvers.hpp"
#include "dnls/trees.hpp"

namespace {

using dnls::Json;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kConfigError = 2;

struct FieldSource {
  int n = 32;
  double L = 2 * std::numbers::pi;
  double s = 0.6;
  std::uint64_t seed = 1;
};

void add_field_options(CLI::App* app, FieldSource& f) {
  app->add_option("--n", f.n, "grid size (even)")->capture_default_str();
  app->add_option("--L", f.L, "period length")->capture_default_str();
  app->add_option("--s", f.s, "Sobolev index")->capture_default_str();
  app->add_option("--seed", f.seed, "seed for random inputs")->capture_default_str();
}

// Input `slot` from a file if given, otherwise a unit random field drawn
// from stream (seed, slot).
dnls::SpectralField<double> input_field(const FieldSource& src, const std::vector<std::string>& files, size_t slot) {
  const dnls::FrequencyGrid<double> g(src.n, src.L);
  if (slot < files.size()) {
    auto f = dnls::load_field(files[slot]);
    if (f.grid() != g) throw dnls::ConfigError("input " + files[slot] + " does not match --n/--L");
    return f;
  }
  auto rng = dnls::Philox4x32::for_case(src.seed, 0, static_cast<std::uint32_t>(slot));
  return dnls::random_field(g, src.s, rng);
}

void print(const Json& j) { std::cout << j.dump(2) << '\n'; }

Json norms(const dnls::SpectralField<double>& f, double s) {
  return {{"Hs", dnls::hs_norm(f, s)}, {"Hs_minus_1", dnls::hs_norm(f, s - 1)}, {"L2", dnls::hs_norm(f, 0.0)}};
}

int cmd_trees(int J, bool as_json) {
  const auto trees = dnls::enumerate_trees(J);
  if (as_json) {
    Json out = {{"J", J}, {"count", trees.size()}, {"trees", Json::array()}};
    for (const auto& t : trees) out["trees"].push_back(t.serialize());
    print(out);
  } else {
    for (const auto& t : trees) std::cout << t.serialize() << '\n';
  }
  return kPass;
}

int cmd_op(const std::string& kernel, double M, double t, const FieldSource& src,
           const std::vector<std::string>& inputs, const std::string& output) {
  dnls::TrilinearKernel<double> k;
  if (kernel == "raw") k = dnls::TrilinearKernel<double>::raw(t);
  else if (kernel == "phi") k = dnls::TrilinearKernel<double>::phi();
  else k = dnls::TrilinearKernel<double>::weak(M);
  const auto a = input_field(src, inputs, 0), b = input_field(src, inputs, 1), c = input_field(src, inputs, 2);
  const auto r = dnls::eval_trilinear(k, a, b, c);
  if (!output.empty()) dnls::save_field(output, r);
  Json in = Json::array();
  for (const auto* f : {&a, &b, &c}) in.push_back(norms(*f, src.s));
  print({{"kernel", kernel}, {"M", M}, {"t", t}, {"n", src.n}, {"L", src.L}, {"s", src.s},
         {"inputs", in}, {"output", norms(r, src.s)}});
  return kPass;
}

int cmd_nfr(const std::string& family, int J, double N, double t, double budget, const FieldSource& src,
            const std::vector<std::string>& inputs, const std::string& output) {
  const auto fam = dnls::parse_family(family);
  const auto v = input_field(src, inputs, 0);
  const dnls::ThresholdSchedule<double> sched(src.s, N);
  const auto r = dnls::eval_family(fam, J, v, t, sched, budget);
  if (!output.empty()) dnls::save_field(output, r);
  print({{"family", family},
         {"J", J},
         {"N", N},
         {"s", src.s},
         {"t", t},
         {"n", src.n},
         {"L", src.L},
         {"degree", dnls::family_degree(fam, J)},
         {"theta", sched.theta()},
         {"input", norms(v, src.s)},
         {"output", norms(r, src.s)}});
  return kPass;
}

struct Loaded {
  dnls::KeyValueConfig kv;
  dnls::SolverConfig<double> cfg;
  dnls::SpectralField<double> u0;
};

Loaded load_config(const std::string& path) {
  auto kv = dnls::KeyValueConfig::load(path);
  auto cfg = dnls::solver_config_from(kv);
  auto u0 = dnls::initial_field_from(kv, cfg.grid());
  const int samples = static_cast<int>(kv.get_int("c_hat_samples", 0));
  if (cfg.c_hat == 0 && samples > 0)
    cfg.c_hat = dnls::measure_c_hat(cfg, samples, static_cast<std::uint64_t>(kv.get_int("seed", 20260101)));
  return {std::move(kv), cfg, std::move(u0)};
}

Json compliance_json(const dnls::SolverConfig<double>& cfg, const dnls::SpectralField<double>& v0) {
  const auto c = dnls::check_compliance(cfg, v0);
  return {{"R", c.radius}, {"c_hat", c.c_hat},        {"N_min", c.n_min},          {"T1", c.t1},
          {"T_max", c.t_max}, {"threshold_ok", c.threshold_ok}, {"time_ok", c.time_ok}, {"compliant", c.compliant()}};
}

int cmd_solve(const std::string& which, const std::string& config, std::string output) {
  auto [kv, cfg, u0] = load_config(config);
  if (output.empty()) output = kv.get("output", "");
  const auto v0 = dnls::gauge_forward(u0);
  Json report = {{"solver", which}, {"n", cfg.n}, {"L", cfg.length}, {"s", cfg.s}, {"dt", cfg.dt},
                 {"T", cfg.t_final}, {"J", cfg.truncation}, {"N", cfg.threshold}};
  report["compliance"] = compliance_json(cfg, v0);
  dnls::Trajectory<double> tr;
  if (which == "reference") {
    tr = dnls::solve_reference(u0, cfg);
  } else {
    try {
      tr = dnls::solve_normal_form(v0, cfg);
    } catch (const dnls::NonConvergence<double>& e) {
      report["error"] = e.what();
      report["residuals"] = e.residuals;
      print(report);
      return kFail;
    }
    report["iterations"] = tr.iterations;
    report["residuals"] = tr.residuals;
  }
  Json hs = Json::array();
  for (const auto& f : tr.fields) hs.push_back(dnls::hs_norm(f, cfg.s));
  report["times"] = tr.times;
  report["Hs_norm"] = hs;
  if (!output.empty()) {
    std::filesystem::create_directories(output);
    const auto path = (std::filesystem::path(output) / (which + "_trajectory.csv")).string();
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    dnls::write_trajectory(f, tr);
    report["trajectory_file"] = path;
    std::ofstream(std::filesystem::path(output) / (which + "_report.json")) << report.dump(2) << '\n';
  }
  print(report);
  return kPass;
}

int cmd_validate(const std::string& config) {
  auto [kv, cfg, u0] = load_config(config);
  const double tol = kv.get_double("tolerance", 1e-2);
  const int rem = static_cast<int>(kv.get_int("remainder_samples", 3));
  Json report = {{"n", cfg.n}, {"L", cfg.length}, {"s", cfg.s}, {"dt", cfg.dt}, {"T", cfg.t_final},
                 {"J", cfg.truncation}, {"N", cfg.threshold}};
  report["compliance"] = compliance_json(cfg, dnls::gauge_forward(u0));
  const auto xv = dnls::cross_validate(u0, cfg, rem);
  const double rel = xv.final_discrepancy() / xv.v0_norm;
  report["v0_norm"] = xv.v0_norm;
  report["picard_iterations"] = xv.picard_iterations;
  report["times"] = xv.times;
  report["discrepancy"] = xv.discrepancy;
  report["remainder_times"] = xv.remainder_times;
  report["remainder_norm"] = xv.remainder_norm;
  report["relative_discrepancy"] = rel;
  report["tolerance"] = tol;
  report["pass"] = rel <= tol;
  const std::string output = kv.get("output", "");
  if (!output.empty()) {
    std::filesystem::create_directories(output);
    std::ofstream(std::filesystem::path(output) / "cross_report.json") << report.dump(2) << '\n';
  }
  print(report);
  return rel <= tol ? kPass : kFail;
}

Json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw dnls::SpecError("cannot open " + path);
  try {
    return Json::parse(f);
  } catch (const Json::parse_error& e) {
    throw dnls::SpecError(path + ": " + e.what());
  }
}

int cmd_suite_run(const std::string& suite, const std::string& spec_path, std::string output, bool print_spec) {
  dnls::ExperimentSpec spec;
  if (!spec_path.empty()) spec = dnls::ExperimentSpec::from_json(read_json(spec_path));
  else if (!suite.empty()) spec = dnls::ExperimentSpec::defaults(suite);
  else throw dnls::SpecError("suite run: give --suite or --spec");
  if (print_spec) {
    print(spec.to_json());
    return kPass;
  }
  if (output.empty()) output = spec.output.empty() ? "reports" : spec.output;
  spec.output = output;
  const Json report = dnls::run_suite(spec);
  dnls::write_report(report, output);
  for (const auto& c : report.at("cases"))
    std::cout << (c.at("pass").get<bool>() ? "PASS " : "FAIL ") << c.at("name").get<std::string>() << '\n';
  std::cout << "report: " << (std::filesystem::path(output) / (spec.suite + "_report.json")).string() << '\n';
  return report.at("pass").get<bool>() ? kPass : kFail;
}

int cmd_suite_replay(const std::string& path) {
  const Json result = dnls::replay(read_json(path));
  print(result);
  return result.at("identical").get<bool>() ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dnls: normal form reduction toolkit for the derivative NLS"};
  app.require_subcommand(1);
  std::function<int()> action;

  auto* trees = app.add_subcommand("trees", "ordered trees")->require_subcommand(1);
  auto* enumerate = trees->add_subcommand("enumerate", "list all ordered trees of generation J");
  int tree_J = 1;
  bool tree_json = false;
  enumerate->add_option("--J", tree_J, "generation (1..6)")->required();
  enumerate->add_flag("--json", tree_json, "JSON output");
  enumerate->callback([&] { action = [&] { return cmd_trees(tree_J, tree_json); }; });

  FieldSource op_src, nfr_src;
  std::vector<std::string> op_inputs, nfr_inputs;
  std::string op_output, nfr_output;

  auto* op = app.add_subcommand("op", "trilinear operators")->require_subcommand(1);
  auto* op_eval = op->add_subcommand("eval", "evaluate a trilinear operator, print norms as JSON");
  std::string kernel = "phi";
  double op_M = 1, op_t = 0;
  op_eval->add_option("--kernel", kernel, "raw | phi | weak")
      ->check(CLI::IsMember({"raw", "phi", "weak"}))
      ->capture_default_str();
  op_eval->add_option("--M", op_M, "cutoff of the weak kernel (>= 1)")->capture_default_str();
  op_eval->add_option("--t", op_t, "time of the raw kernel")->capture_default_str();
  op_eval->add_option("--inputs", op_inputs, "up to three field CSV files; missing slots are random")->delimiter(',');
  op_eval->add_option("--output", op_output, "write the result as field CSV");
  add_field_options(op_eval, op_src);
  op_eval->callback([&] { action = [&] { return cmd_op(kernel, op_M, op_t, op_src, op_inputs, op_output); }; });

  auto* nfr = app.add_subcommand("nfr", "normal form terms")->require_subcommand(1);
  auto* nfr_eval = nfr->add_subcommand("eval", "evaluate one term family, print norms as JSON");
  std::string family = "remainder";
  int nfr_J = 1;
  double nfr_N = 4, nfr_t = 0, budget = dnls::kDefaultOperationBudget;
  nfr_eval->add_option("--family", family, "t0 | tq | tt1 | remainder")
      ->check(CLI::IsMember({"t0", "tq", "tt1", "remainder"}))
      ->capture_default_str();
  nfr_eval->add_option("--J", nfr_J, "level")->capture_default_str();
  nfr_eval->add_option("--N", nfr_N, "threshold")->capture_default_str();
  nfr_eval->add_option("--t", nfr_t, "time")->capture_default_str();
  nfr_eval->add_option("--budget", budget, "operation budget")->capture_default_str();
  nfr_eval->add_option("--input", nfr_inputs, "field CSV (random if absent)");
  nfr_eval->add_option("--output", nfr_output, "write the result as field CSV");
  add_field_options(nfr_eval, nfr_src);
  nfr_eval->callback([&] {
    action = [&] { return cmd_nfr(family, nfr_J, nfr_N, nfr_t, budget, nfr_src, nfr_inputs, nfr_output); };
  });

  std::string config, output;
  auto* solve = app.add_subcommand("solve", "run a solver from a config file")->require_subcommand(1);
  for (const char* which : {"reference", "nfr"}) {
    auto* sub = solve->add_subcommand(which, std::string(which) == "nfr" ? "normal form Picard solver"
                                                                          : "RK4 interaction-picture solver");
    sub->add_option("--config", config, "key-value config file")->required();
    sub->add_option("--output", output, "directory for trajectory CSV and report");
    const std::string w = which;
    sub->callback([&, w] { action = [&, w] { return cmd_solve(w, config, output); }; });
  }

  auto* validate = app.add_subcommand("validate", "solver comparisons")->require_subcommand(1);
  auto* cross = validate->add_subcommand("cross", "reference vs normal form solver");
  cross->add_option("--config", config, "key-value config file")->required();
  cross->callback([&] { action = [&] { return cmd_validate(config); }; });

  auto* suite = app.add_subcommand("suite", "experiment suites")->require_subcommand(1);
  auto* run = suite->add_subcommand("run", "run a suite and write JSON/CSV reports");
  std::string suite_name, spec_path, report_path;
  bool print_spec = false;
  run->add_option("--suite", suite_name, "suite name with default parameters")
      ->check(CLI::IsMember(dnls::suite_names()));
  run->add_option("--spec", spec_path, "JSON experiment spec");
  run->add_option("--output", output, "report directory");
  run->add_flag("--print-spec", print_spec, "print the resolved spec and exit");
  run->callback([&] { action = [&] { return cmd_suite_run(suite_name, spec_path, output, print_spec); }; });
  auto* rep = suite->add_subcommand("replay", "rerun a report's spec and compare measured values");
  rep->add_option("--report", report_path, "report JSON")->required();
  rep->callback([&] { action = [&] { return cmd_suite_replay(report_path); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }
  try {
    return action();
  } catch (const dnls::NonConvergence<double>& e) {
    std::cerr << e.what() << '\n';
    return kFail;
  } catch (const dnls::BlowUp& e) {
    std::cerr << e.what() << '\n';
    return kFail;
  } catch (const dnls::BudgetExceeded& e) {
    std::cerr << "budget: " << e.what() << '\n';
  } catch (const dnls::ConfigError& e) {
    std::cerr << e.what() << '\n';
  } catch (const dnls::SpecError& e) {
    std::cerr << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return kConfigError;
}
