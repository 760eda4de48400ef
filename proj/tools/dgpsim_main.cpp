#include <CLI11.hpp>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "dgpsim/error.hpp"
#include "dgpsim/estimator.hpp"
#include "dgpsim/ode_ref.hpp"
#include "dgpsim/oracle.hpp"
#include "dgpsim/report.hpp"
#include "dgpsim/scenario.hpp"
#include "dgpsim/simulation.hpp"

namespace fs = std::filesystem;
using namespace dgpsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidParam("cannot write '" + path.string() + "'");
  return out;
}

void print_summary(std::ostream& out, const RunResult& res, const Scenario& sc) {
  out << "algorithm " << to_string(sc.algorithm) << ", n = " << sc.size() << ", ticks = " << res.trajectory.rows.size()
      << ", seed = " << sc.master_seed << '\n';
  for (std::size_t w = 0; w < res.metrics.windows.size(); ++w) {
    const auto& win = res.metrics.windows[w];
    out << "  window " << w + 1 << " (t = " << format_double(static_cast<double>(win.start_tick) * sc.T())
        << " s): nadir " << format_double(win.nadir) << " Hz, settling " << format_double(win.settling_time)
        << " s\n";
  }
  out << "  terminal optimality gap " << format_double(res.metrics.terminal_optimality_gap) << '\n';
  out << "  disutility integral " << format_double(res.metrics.total_disutility_integral) << '\n';
}

int report_failure(const RunResult& res) {
  if (!res.failure) return kExitOk;
  std::cerr << res.failure->kind << " at tick " << res.failure->tick << ": " << res.failure->message << '\n';
  return kExitDiverged;
}

int cmd_run(const std::string& config, std::uint64_t seed, const fs::path& out_dir,
            const std::optional<std::string>& algorithm, bool full_trace, bool plots) {
  ScenarioOverrides ov;
  ov.seed = seed;
  if (algorithm) ov.algorithm = algorithm_from_string(*algorithm);
  const Scenario sc = load_scenario(config, ov);
  RunOptions opts;
  if (full_trace) opts.record_loads = true;
  const RunResult res = run(sc, opts);

  fs::create_directories(out_dir);
  {
    auto f = open_out(out_dir / "trajectory.csv");
    write_trajectory_csv(f, res.trajectory);
  }
  {
    auto f = open_out(out_dir / "metrics.csv");
    write_metrics_csv(f, res.metrics, sc);
  }
  if (plots) write_run_plots(out_dir, res.trajectory, sc);
  print_summary(std::cout, res, sc);
  return report_failure(res);
}

int cmd_oracle(const std::string& config) {
  const Scenario sc = load_scenario(config);
  std::cout << "segment,start_s,g_bar_mw,lambda_star,optimal_cost,strictly_feasible\n";
  std::optional<PrimalSolution> last;
  for (std::size_t s = 0; s < sc.schedule.entries.size(); ++s) {
    const auto& e = sc.schedule.entries[s];
    const double g_bar = e.level_mw - sc.schedule.nominal_mw;
    std::cout << s + 1 << ',' << format_double(static_cast<double>(e.start_tick) * sc.T()) << ','
              << format_double(g_bar) << ',';
    try {
      PrimalSolution sol = solve_primal(sc.specs, g_bar);
      std::cout << format_double(sol.lambda_star) << ',' << format_double(sol.optimal_cost) << ','
                << (sol.is_strictly_feasible ? "true" : "false") << '\n';
      last = std::move(sol);
    } catch (const Infeasible&) {
      std::cout << "nan,nan,infeasible\n";
    }
  }
  if (last) {
    std::cout << "\n# solution for the final segment\n";
    write_solution_csv(std::cout, *last);
  }
  return kExitOk;
}

int cmd_counterexample() {
  const OdeConfig cfg = boundary_counterexample();
  const std::vector<double> x0{0.1, 0.1};
  const auto samples = integrate(cfg, x0, 1000);
  const auto& end = samples.back();
  const PrimalSolution sol = solve_primal(cfg.specs, cfg.g_bar);
  const std::vector<double> attractive{0.25, 5.0 / 12.0};
  auto dist = [&](const std::vector<double>& p) {
    return std::max(std::abs(end.x[0] - p[0]), std::abs(end.x[1] - p[1]));
  };
  std::cout << "t,x1,x2,y,z,u\n";
  for (const auto& s : samples) {
    std::cout << format_double(s.t) << ',' << format_double(s.x[0]) << ',' << format_double(s.x[1]) << ','
              << format_double(s.diag.y) << ',' << format_double(s.diag.z) << ',' << format_double(s.diag.u) << '\n';
  }
  const auto at_end = check_optimality(cfg.specs, end.x, cfg.g_bar, 1e-6);
  const auto at_opt = check_optimality(cfg.specs, sol.x_star, cfg.g_bar, 1e-6);
  std::cout << "\n# terminal state [" << format_double(end.x[0]) << ", " << format_double(end.x[1]) << "]\n"
            << "# primal optimum [" << format_double(sol.x_star[0]) << ", " << format_double(sol.x_star[1])
            << "], distance " << format_double(dist(sol.x_star)) << ", optimal there: " << std::boolalpha
            << at_opt.optimal << '\n'
            << "# equilibrium [0.25, 5/12], distance " << format_double(dist(attractive))
            << ", optimal there: " << at_end.optimal << '\n';
  return kExitOk;
}

int cmd_compare(const std::string& config, std::uint64_t seed, const fs::path& out_dir) {
  ScenarioOverrides ov;
  ov.seed = seed;
  const Scenario sc = load_scenario(config, ov);
  const Comparison cmp = compare(sc);
  fs::create_directories(out_dir);
  {
    auto f = open_out(out_dir / "compare.csv");
    write_comparison_csv(f, cmp);
  }
  {
    auto f = open_out(out_dir / "ordering.csv");
    write_comparison_report(f, cmp, sc);
  }
  write_comparison_report(std::cout, cmp, sc);
  int code = kExitOk;
  for (const auto& [algo, res] : cmp.runs) {
    if (report_failure(res) != kExitOk) code = kExitDiverged;
  }
  return code;
}

int cmd_check(const std::string& config) {
  // build_scenario already rejects a disconnected graph or a plant that
  // fails the decoupling condition; this reports the numbers behind them.
  const Scenario sc = load_scenario(config);
  bool ok = true;
  std::cout << "loads " << sc.size() << ", edges " << sc.topology.edge_count() << ", connected "
            << std::boolalpha << is_connected(sc.topology) << '\n';

  const Eigen::MatrixXd Ad = input_decoupled_dynamics(sc.plant);
  const Eigen::VectorXcd eig = Ad.eigenvalues();
  std::cout << "plant order " << sc.plant.order() << ", CB " << format_double(sc.plant.input_gain())
            << ", spectral radius " << format_double(sc.plant.spectral_radius()) << '\n';
  std::cout << "decoupled dynamics eigenvalue moduli:";
  for (Eigen::Index i = 0; i < eig.size(); ++i) std::cout << ' ' << format_double(std::abs(eig[i]));
  const bool prop = check_prop1(sc.plant);
  std::cout << "\ninput-decoupling stability " << (prop ? "ok" : "FAILED")
            << (sc.noise.perfect_estimate ? " (estimator bypassed)" : "") << '\n';
  if (!prop && !sc.noise.perfect_estimate) ok = false;

  double lo = 0.0, hi = 0.0;
  for (const auto& s : sc.specs) {
    lo += s.box_lo;
    hi += s.box_hi;
  }
  std::cout << "aggregate flexibility [" << format_double(lo) << ", " << format_double(hi) << "] MW\n";
  for (std::size_t s = 0; s < sc.schedule.entries.size(); ++s) {
    const auto& e = sc.schedule.entries[s];
    const double g_bar = e.level_mw - sc.schedule.nominal_mw;
    const char* status = g_bar > lo && g_bar < hi ? "strictly feasible"
                         : g_bar >= lo && g_bar <= hi ? "feasible (boundary)"
                                                      : "infeasible";
    std::cout << "segment " << s + 1 << ": target " << format_double(g_bar) << " MW, " << status << '\n';
    if (g_bar < lo || g_bar > hi) ok = false;
  }
  std::cout << (ok ? "check passed" : "check FAILED") << '\n';
  return ok ? kExitOk : kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed gradient projection demand response simulator"};
  app.require_subcommand(1);

  std::string config;
  std::uint64_t seed = 1;
  std::string out_dir;
  std::string algorithm;
  bool full_trace = false;
  bool plots = false;

  auto* run_cmd = app.add_subcommand("run", "simulate one scenario and write trajectory.csv and metrics.csv");
  run_cmd->add_option("--config", config, "scenario file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", seed, "master seed");
  run_cmd->add_option("--out", out_dir, "output directory")->required();
  run_cmd->add_option("--algorithm", algorithm, "dgp, dual or none")
      ->check(CLI::IsMember({"dgp", "dual", "none"}));
  run_cmd->add_flag("--full-trace", full_trace, "per-load columns for any n");
  run_cmd->add_flag("--plots", plots, "also write SVG plots");

  auto* oracle_cmd = app.add_subcommand("oracle", "solve the static allocation for each schedule segment");
  oracle_cmd->add_option("--config", config, "scenario file")->required()->check(CLI::ExistingFile);

  auto* cx_cmd = app.add_subcommand("counterexample", "integrate the two-load boundary example");

  auto* cmp_cmd = app.add_subcommand("compare", "run none, dgp and dual on one scenario");
  cmp_cmd->add_option("--config", config, "scenario file")->required()->check(CLI::ExistingFile);
  cmp_cmd->add_option("--seed", seed, "master seed");
  cmp_cmd->add_option("--out", out_dir, "output directory")->required();

  auto* check_cmd = app.add_subcommand("check", "validate a scenario and print a report");
  check_cmd->add_option("--config", config, "scenario file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_cmd) {
      std::optional<std::string> algo;
      if (!algorithm.empty()) algo = algorithm;
      return cmd_run(config, seed, out_dir, algo, full_trace, plots);
    }
    if (*oracle_cmd) return cmd_oracle(config);
    if (*cx_cmd) return cmd_counterexample();
    if (*cmp_cmd) return cmd_compare(config, seed, out_dir);
    if (*check_cmd) return cmd_check(config);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "diverged at tick " << e.tick() << ": " << e.what() << '\n';
    return kExitDiverged;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
