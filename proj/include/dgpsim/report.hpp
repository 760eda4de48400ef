#pragma once

// File outputs of the harness. The trajectory CSV is the stable contract;
// SVG plots are rendered from the same data for convenience.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "dgpsim/oracle.hpp"
#include "dgpsim/simulation.hpp"

namespace dgpsim {

// Shortest text that parses back to the same double; "nan" for NaN.
std::string format_double(double value);

// Fixed columns: k,t,freq_deviation_hz,u_mw,mean_u_hat_mw,total_disutility,
// y_mw,z_mw,generation_mw,total_load_deviation_mw, then x_1..x_n when
// per-load data was recorded.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

// window,start_tick,start_s,end_tick,nadir_hz,settling_time_s rows followed by
// summary rows (terminal_optimality_gap, total_disutility_integral).
void write_metrics_csv(std::ostream& out, const Metrics& metrics, const Scenario& scenario);

void write_solution_csv(std::ostream& out, const PrimalSolution& solution);

struct PlotSeries {
  std::string label;
  std::vector<double> t;
  std::vector<double> value;
};
void write_svg_plot(const std::filesystem::path& path, const std::string& title, const std::string& y_label,
                    const std::vector<PlotSeries>& series);

// Frequency, mismatch and disutility plots of one run.
void write_run_plots(const std::filesystem::path& dir, const Trajectory& trajectory, const Scenario& scenario);

struct Comparison {
  std::map<Algorithm, RunResult> runs;  // dual absent when not applicable
  std::string dual_skipped_reason;
};

// Runs none, dgp and (when applicable) dual on the same scenario and seed.
Comparison compare(const Scenario& scenario);
void write_comparison_csv(std::ostream& out, const Comparison& comparison);
// Nadir table per contingency window and the |nadir| ordering.
void write_comparison_report(std::ostream& out, const Comparison& comparison, const Scenario& scenario);

}  // namespace dgpsim
