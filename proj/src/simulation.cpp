#include "dgpsim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "dgpsim/dual_baseline.hpp"
#include "dgpsim/error.hpp"
#include "dgpsim/estimator.hpp"
#include "dgpsim/ode_ref.hpp"
#include "dgpsim/oracle.hpp"
#include "dgpsim/parallel.hpp"

namespace dgpsim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Oracle solution for every schedule segment; empty when infeasible.
std::vector<std::optional<PrimalSolution>> segment_oracles(const Scenario& s) {
  std::vector<std::optional<PrimalSolution>> out;
  for (const auto& entry : s.schedule.entries) {
    try {
      out.emplace_back(solve_primal(s.specs, entry.level_mw - s.schedule.nominal_mw));
    } catch (const Infeasible&) {
      out.emplace_back(std::nullopt);
    }
  }
  return out;
}

// Algorithm-agnostic view of the load population.
class LoadPopulation {
 public:
  explicit LoadPopulation(const Scenario& s) : scenario_(s), x_(s.size(), 0.0) {
    if (s.algorithm == Algorithm::Dgp) dgp_.emplace(s.specs, s.topology);
    if (s.algorithm == Algorithm::Dual) dual_.emplace(s.specs, s.topology);
  }

  const std::vector<double>& positions() const noexcept { return x_; }

  void advance(std::span<const double> u_hat, long step_index, unsigned threads) {
    const StepSizes steps = step_sizes(scenario_.steps, step_index);
    if (dgp_) {
      dgp_->tick(u_hat, steps, threads);
      for (std::size_t i = 0; i < x_.size(); ++i) x_[i] = dgp_->agents()[i].x;
    } else if (dual_) {
      dual_->tick(u_hat, steps.gamma, threads);
      for (std::size_t i = 0; i < x_.size(); ++i) x_[i] = dual_->agents()[i].x;
    }
  }

 private:
  const Scenario& scenario_;
  std::vector<double> x_;
  std::optional<DgpNetwork> dgp_;
  std::optional<DualNetwork> dual_;
};

}  // namespace

RunResult run(const Scenario& s, const RunOptions& options) {
  const std::size_t n = s.size();
  const unsigned threads = options.threads.value_or(s.threads);
  const bool record_loads = options.record_loads.value_or(n <= 32);
  const auto oracles = segment_oracles(s);

  LoadPopulation loads(s);
  PlantState plant = rest_state(s.plant);
  std::optional<EstimatorBank> observers;
  if (!s.noise.perfect_estimate) observers.emplace(s.plant, n, s.noise.measurement_std);

  auto process_rng = make_stream(s.master_seed, StreamPurpose::ProcessNoise);
  std::vector<std::mt19937_64> meas_rng;
  meas_rng.reserve(n);
  for (std::size_t i = 0; i < n; ++i) meas_rng.push_back(make_stream(s.master_seed, StreamPurpose::MeasurementNoise, i));
  std::normal_distribution<double> standard_normal(0.0, 1.0);

  std::vector<double> y_meas(n, 0.0);
  std::vector<double> u_hat(n, 0.0);
  RunResult result;
  auto& traj = result.trajectory;
  traj.rows.reserve(static_cast<std::size_t>(s.ticks));
  if (record_loads) traj.loads.reserve(static_cast<std::size_t>(s.ticks));

  long step_origin = 0;
  std::size_t segment = 0;
  for (long k = 0; k < s.ticks; ++k) {
    const std::size_t seg = s.schedule.segment_at(k);
    if (seg != segment) {
      segment = seg;
      if (s.reset_gamma_on_step) step_origin = k;
    }
    const std::vector<double>& x = loads.positions();
    const double generation = s.schedule.generation_at(k);
    const double total_load = std::accumulate(x.begin(), x.end(), 0.0);
    const double u = (generation - s.schedule.nominal_mw) - total_load;

    try {
      const double zeta = s.noise.process_std > 0.0 ? s.noise.process_std * standard_normal(process_rng) : 0.0;
      PlantStepResult step = plant_step(s.plant, plant, u, zeta);
      plant = std::move(step.state);

      if (observers) {
        parallel_for(n, threads, [&](std::size_t i) {
          std::normal_distribution<double> gauss(0.0, 1.0);
          const double xi = s.noise.measurement_std > 0.0 ? s.noise.measurement_std * gauss(meas_rng[i]) : 0.0;
          y_meas[i] = step.freq_deviation + xi;
        });
        observers->update(y_meas, u_hat);
      } else {
        std::fill(u_hat.begin(), u_hat.end(), u);
      }

      TrajectoryRecord row;
      row.k = k;
      row.t = static_cast<double>(k) * s.T();
      row.freq_deviation = step.freq_deviation;
      row.u = u;
      row.mean_u_hat = std::accumulate(u_hat.begin(), u_hat.end(), 0.0) / static_cast<double>(n);
      row.total_disutility = total_disutility(s.specs, x);
      if (oracles[seg]) {
        const Diagnostics d = mismatch_diagnostics(oracles[seg]->critical_sets, x, generation - s.schedule.nominal_mw);
        row.y = d.y;
        row.z = d.z;
      } else {
        row.y = row.z = kNaN;
      }
      row.generation = generation;
      row.total_load_deviation = total_load;
      traj.rows.push_back(row);
      if (record_loads) traj.loads.push_back(x);

      loads.advance(u_hat, k - step_origin, threads);
    } catch (const DivergenceError& e) {
      const bool estimator = dynamic_cast<const EstimatorDiverged*>(&e) != nullptr;
      result.failure = RunFailure{estimator ? "EstimatorDiverged" : "SimulationDiverged", k, e.what()};
      break;
    }
  }
  traj.final_x = loads.positions();
  if (!traj.rows.empty()) result.metrics = compute_metrics(traj, s);
  return result;
}

Metrics compute_metrics(const Trajectory& trajectory, const Scenario& s) {
  Metrics m;
  const auto& rows = trajectory.rows;
  if (rows.empty()) throw InvalidParam("cannot compute metrics of an empty trajectory");
  const long last = rows.back().k + 1;

  std::vector<long> starts;
  for (const auto& e : s.schedule.entries) {
    if (e.start_tick > 0 && e.start_tick < last) starts.push_back(e.start_tick);
  }
  if (starts.empty()) starts.push_back(rows.front().k);

  for (std::size_t w = 0; w < starts.size(); ++w) {
    ContingencyWindow win;
    win.start_tick = starts[w];
    win.end_tick = w + 1 < starts.size() ? starts[w + 1] : last;
    long last_outside = -1;
    for (const auto& r : rows) {
      if (r.k < win.start_tick || r.k >= win.end_tick) continue;
      if (std::abs(r.freq_deviation) > std::abs(win.nadir)) win.nadir = r.freq_deviation;
      if (std::abs(r.freq_deviation) > s.settle_band_hz) last_outside = r.k;
    }
    if (last_outside < 0) {
      win.settling_time = 0.0;
    } else if (last_outside + 1 >= win.end_tick) {
      win.settling_time = kNaN;
    } else {
      win.settling_time = static_cast<double>(last_outside + 1 - win.start_tick) * s.T();
    }
    m.windows.push_back(win);
  }

  for (const auto& r : rows) m.total_disutility_integral += r.total_disutility * s.T();
  if (trajectory.final_x.size() == s.size()) {
    const double g_bar = s.schedule.deviation_at(last);
    m.terminal_optimality_gap = check_optimality(s.specs, trajectory.final_x, g_bar, 0.0).max_residual;
  } else {
    m.terminal_optimality_gap = kNaN;
  }
  return m;
}

}  // namespace dgpsim
