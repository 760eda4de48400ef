#include "dgpsim/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>

#include "dgpsim/error.hpp"

namespace dgpsim {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  const bool per_load = !trajectory.loads.empty();
  out << "k,t,freq_deviation_hz,u_mw,mean_u_hat_mw,total_disutility,y_mw,z_mw,generation_mw,"
         "total_load_deviation_mw";
  if (per_load) {
    for (std::size_t i = 0; i < trajectory.loads.front().size(); ++i) out << ",x_" << i + 1;
  }
  out << '\n';
  for (std::size_t r = 0; r < trajectory.rows.size(); ++r) {
    const TrajectoryRecord& row = trajectory.rows[r];
    out << row.k << ',' << format_double(row.t) << ',' << format_double(row.freq_deviation) << ','
        << format_double(row.u) << ',' << format_double(row.mean_u_hat) << ','
        << format_double(row.total_disutility) << ',' << format_double(row.y) << ',' << format_double(row.z)
        << ',' << format_double(row.generation) << ',' << format_double(row.total_load_deviation);
    if (per_load) {
      for (double x : trajectory.loads[r]) out << ',' << format_double(x);
    }
    out << '\n';
  }
}

void write_metrics_csv(std::ostream& out, const Metrics& metrics, const Scenario& scenario) {
  out << "window,start_tick,start_s,end_tick,nadir_hz,settling_time_s\n";
  for (std::size_t w = 0; w < metrics.windows.size(); ++w) {
    const auto& win = metrics.windows[w];
    out << w + 1 << ',' << win.start_tick << ','
        << format_double(static_cast<double>(win.start_tick) * scenario.T()) << ',' << win.end_tick << ','
        << format_double(win.nadir) << ',' << format_double(win.settling_time) << '\n';
  }
  out << "# terminal_optimality_gap," << format_double(metrics.terminal_optimality_gap) << '\n';
  out << "# total_disutility_integral," << format_double(metrics.total_disutility_integral) << '\n';
}

void write_solution_csv(std::ostream& out, const PrimalSolution& solution) {
  out << "load,x_star_mw,critical_lo_mw,critical_hi_mw\n";
  for (std::size_t i = 0; i < solution.x_star.size(); ++i) {
    out << i + 1 << ',' << format_double(solution.x_star[i]) << ','
        << format_double(solution.critical_sets[i].lo) << ',' << format_double(solution.critical_sets[i].hi)
        << '\n';
  }
}

void write_svg_plot(const std::filesystem::path& path, const std::string& title, const std::string& y_label,
                    const std::vector<PlotSeries>& series) {
  static const char* const kColors[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e"};
  constexpr double W = 800, H = 400, L = 70, R = 20, Tm = 40, B = 50;
  double t0 = INFINITY, t1 = -INFINITY, v0 = INFINITY, v1 = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      if (!std::isfinite(s.value[i])) continue;
      t0 = std::min(t0, s.t[i]);
      t1 = std::max(t1, s.t[i]);
      v0 = std::min(v0, s.value[i]);
      v1 = std::max(v1, s.value[i]);
    }
  }
  if (!(t1 > t0)) t1 = t0 + 1.0;
  if (!(v1 > v0)) {
    v0 -= 0.5;
    v1 += 0.5;
  }
  auto px = [&](double t) { return L + (t - t0) / (t1 - t0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (v - v0) / (v1 - v0) * (H - Tm - B); };

  std::ofstream out(path);
  if (!out) throw InvalidParam("cannot write plot '" + path.string() + "'");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n"
      << "<rect x=\"" << L << "\" y=\"" << Tm << "\" width=\"" << W - L - R << "\" height=\"" << H - Tm - B
      << "\" fill=\"none\" stroke=\"black\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">time (s)</text>\n"
      << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2
      << ")\" text-anchor=\"middle\">" << y_label << "</text>\n";
  for (double v : {v0, 0.5 * (v0 + v1), v1}) {
    out << "<text x=\"" << L - 4 << "\" y=\"" << py(v) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
        << format_double(std::round(v * 1e4) / 1e4) << "</text>\n";
  }
  for (double t : {t0, 0.5 * (t0 + t1), t1}) {
    out << "<text x=\"" << px(t) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
        << format_double(std::round(t * 100) / 100) << "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % std::size(kColors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < series[s].t.size(); ++i) {
      if (std::isfinite(series[s].value[i])) out << px(series[s].t[i]) << ',' << py(series[s].value[i]) << ' ';
    }
    out << "\"/>\n<text x=\"" << L + 10 << "\" y=\"" << Tm + 16 + 16 * static_cast<double>(s) << "\" fill=\""
        << color << "\" font-size=\"12\">" << series[s].label << "</text>\n";
  }
  out << "</svg>\n";
}

namespace {

PlotSeries series_of(const Trajectory& traj, const std::string& label, double TrajectoryRecord::*field,
                     double offset = 0.0) {
  PlotSeries s{label, {}, {}};
  for (const auto& row : traj.rows) {
    s.t.push_back(row.t);
    s.value.push_back(row.*field + offset);
  }
  return s;
}

}  // namespace

void write_run_plots(const std::filesystem::path& dir, const Trajectory& traj, const Scenario& scenario) {
  const std::string name(to_string(scenario.algorithm));
  write_svg_plot(dir / "frequency.svg", "Grid frequency", "frequency (Hz)",
                 {series_of(traj, name, &TrajectoryRecord::freq_deviation, scenario.plant.nominal_hz)});
  write_svg_plot(dir / "mismatch.svg", "Consumption-generation mismatch", "u (MW)",
                 {series_of(traj, name, &TrajectoryRecord::u)});
  write_svg_plot(dir / "disutility.svg", "Total consumer disutility", "disutility",
                 {series_of(traj, name, &TrajectoryRecord::total_disutility)});
}

Comparison compare(const Scenario& scenario) {
  Comparison cmp;
  for (Algorithm a : {Algorithm::None, Algorithm::Dgp, Algorithm::Dual}) {
    try {
      cmp.runs.emplace(a, run(with_algorithm(scenario, a)));
    } catch (const DualNeedsStrictConvexity& e) {
      cmp.dual_skipped_reason = e.what();
    }
  }
  return cmp;
}

void write_comparison_csv(std::ostream& out, const Comparison& cmp) {
  out << "k,t";
  for (const auto& [algo, res] : cmp.runs) {
    const std::string name(to_string(algo));
    out << ",freq_deviation_hz_" << name << ",u_mw_" << name << ",total_disutility_" << name;
  }
  out << '\n';
  std::size_t rows = SIZE_MAX;
  for (const auto& [algo, res] : cmp.runs) rows = std::min(rows, res.trajectory.rows.size());
  if (cmp.runs.empty()) rows = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& first = cmp.runs.begin()->second.trajectory.rows[r];
    out << first.k << ',' << format_double(first.t);
    for (const auto& [algo, res] : cmp.runs) {
      const auto& row = res.trajectory.rows[r];
      out << ',' << format_double(row.freq_deviation) << ',' << format_double(row.u) << ','
          << format_double(row.total_disutility);
    }
    out << '\n';
  }
}

void write_comparison_report(std::ostream& out, const Comparison& cmp, const Scenario& scenario) {
  out << "window,start_s";
  for (const auto& [algo, res] : cmp.runs) out << ",nadir_hz_" << to_string(algo);
  out << ",ordering\n";
  if (cmp.runs.empty()) return;
  const std::size_t windows = cmp.runs.begin()->second.metrics.windows.size();
  for (std::size_t w = 0; w < windows; ++w) {
    out << w + 1 << ','
        << format_double(static_cast<double>(cmp.runs.begin()->second.metrics.windows[w].start_tick) * scenario.T());
    std::vector<std::pair<double, Algorithm>> order;
    for (const auto& [algo, res] : cmp.runs) {
      const double nadir = w < res.metrics.windows.size() ? res.metrics.windows[w].nadir : NAN;
      out << ',' << format_double(nadir);
      order.emplace_back(std::abs(nadir), algo);
    }
    std::sort(order.begin(), order.end());
    out << ',';
    for (std::size_t i = 0; i < order.size(); ++i) out << (i ? " < " : "") << to_string(order[i].second);
    out << '\n';
  }
  if (!cmp.dual_skipped_reason.empty()) out << "# dual skipped: " << cmp.dual_skipped_reason << '\n';
}

}  // namespace dgpsim
