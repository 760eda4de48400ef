#pragma once

// Single-frequency grid model driven by the consumption-generation mismatch.
//
// Continuous-time dynamics (state order: frequency deviation in Hz, governor
// mechanical power deviation in MW, optional secondary set-point in MW):
//
//   M  dw/dt   = p_m + u - D w
//   tau dp_m/dt = -p_m - w / R  (+ p_ref when the integral trim is enabled)
//   dp_ref/dt  = -K_i w         (only when K_i > 0)
//
// The model is discretized with an exact zero-order hold at interval T and
// driven by u[k] + zeta[k], where zeta is process noise on the input channel.

#include <optional>
#include <vector>

#include <Eigen/Core>

namespace dgpsim {

struct PlantParams {
  double inertia = 10.0;        // M, MW s / Hz
  double damping = 1.0;         // D, MW / Hz
  double governor_tau = 5.0;    // tau, s
  std::optional<double> droop = 0.05;  // R, Hz / MW; nullopt disables the governor droop
  double integral_gain = 0.0;   // K_i, MW / (Hz s); 0 disables the secondary trim
  double nominal_hz = 60.0;
};

struct PlantModel {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
  double T = 0.0;
  double sigma_process = 0.0;  // MW
  double nominal_hz = 60.0;

  Eigen::Index order() const noexcept { return A.rows(); }
  double input_gain() const { return C.dot(B); }  // C B, Hz per MW
  // Steady-state output per unit constant input, C (I - A)^{-1} B.
  double dc_gain() const;
  double spectral_radius() const;
};

// Throws InvalidParam for non-positive T / M / tau / R or negative D / K_i,
// UnstablePlant if the discrete A has spectral radius >= 1, and
// DegenerateInputPath if C B == 0.
PlantModel build_plant(const PlantParams& params, double T, double sigma_process = 0.0);

struct PlantState {
  Eigen::VectorXd x;
  long k = 0;
};

PlantState rest_state(const PlantModel& model);

struct PlantStepResult {
  PlantState state;
  double freq_deviation;  // Hz, C x after the update
};

// x' = A x + B (u + noise); output taken from x'. Throws SimulationDiverged
// when the state is or becomes non-finite.
PlantStepResult plant_step(const PlantModel& model, const PlantState& state, double mismatch,
                           double noise_sample);

struct ScheduleEntry {
  long start_tick;
  double level_mw;
};

struct GenerationSchedule {
  std::vector<ScheduleEntry> entries;
  double nominal_mw = 0.0;

  // Throws InvalidParam unless entries is non-empty, starts at tick 0 and is
  // strictly increasing in start_tick.
  void validate() const;
  double deviation_at(long k) const { return generation_at(k) - nominal_mw; }
  double generation_at(long k) const;
  // Index of the entry active at tick k.
  std::size_t segment_at(long k) const;
};

// Schedule given in seconds, converted with round(t / T).
GenerationSchedule schedule_from_seconds(const std::vector<double>& times_s,
                                         const std::vector<double>& levels_mw, double nominal_mw,
                                         double T);

// 200 MW until 20 s, 190 MW until 50 s, 170 MW afterwards; nominal 200 MW.
GenerationSchedule contingency_schedule(double T);

double generation_at(const GenerationSchedule& schedule, long k);

}  // namespace dgpsim
