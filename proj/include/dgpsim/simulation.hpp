#pragma once

// Closed-loop simulation: generation schedule -> mismatch -> grid -> noisy
// per-load frequency measurements -> observers -> load algorithm -> loads.
//
// Tick k:
//   u[k]   = (g[k] - g*) - sum_i x_i[k]
//   grid   x_s[k+1] = A x_s[k] + B (u[k] + zeta[k]),  dw[k] = C x_s[k+1]
//   load i measures dw[k] + xi_i[k] and recovers u_hat_i[k]
//   loads  x[k] -> x[k+1] with the configured algorithm
// Row k of the trajectory holds x[k], u[k], dw[k] and u_hat[k].

#include <optional>
#include <string>
#include <vector>

#include "dgpsim/scenario.hpp"

namespace dgpsim {

struct TrajectoryRecord {
  long k = 0;
  double t = 0.0;                      // s
  double freq_deviation = 0.0;         // Hz
  double u = 0.0;                      // MW
  double mean_u_hat = 0.0;             // MW
  double total_disutility = 0.0;
  double y = 0.0;                      // MW, NaN when the current target is infeasible
  double z = 0.0;                      // MW
  double generation = 0.0;             // MW
  double total_load_deviation = 0.0;   // MW
};

struct Trajectory {
  std::vector<TrajectoryRecord> rows;
  // loads[k][i] = x_i[k]; filled only when per-load recording is on.
  std::vector<std::vector<double>> loads;
  std::vector<double> final_x;  // x after the last tick
};

struct ContingencyWindow {
  long start_tick = 0;
  long end_tick = 0;            // exclusive
  double nadir = 0.0;           // Hz, signed deviation of largest magnitude
  double settling_time = 0.0;   // s from window start; NaN if never settled
};

struct Metrics {
  std::vector<ContingencyWindow> windows;
  double terminal_optimality_gap = 0.0;  // largest KKT residual of final_x
  double total_disutility_integral = 0.0;
};

struct RunFailure {
  std::string kind;  // "SimulationDiverged" or "EstimatorDiverged"
  long tick = 0;
  std::string message;
};

struct RunResult {
  Trajectory trajectory;
  Metrics metrics;
  std::optional<RunFailure> failure;
};

struct RunOptions {
  // Record per-load positions. Defaults to n <= 32.
  std::optional<bool> record_loads;
  // Overrides scenario.threads when set.
  std::optional<unsigned> threads;
};

// Deterministic for a given scenario (including seed), independent of the
// thread count. Divergence stops the run; the partial trajectory is returned
// together with the failure.
RunResult run(const Scenario& scenario, const RunOptions& options = {});

// Windows start at each schedule step after tick 0 and end at the next step or
// the end of the run; a flat schedule yields one window over the whole run.
Metrics compute_metrics(const Trajectory& trajectory, const Scenario& scenario);

}  // namespace dgpsim
