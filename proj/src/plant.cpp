#include "dgpsim/plant.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <unsupported/Eigen/MatrixFunctions>

#include "dgpsim/error.hpp"

namespace dgpsim {

namespace {

constexpr double kStabilityMargin = 1e-12;

}  // namespace

double PlantModel::dc_gain() const {
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(order(), order());
  return C * (I - A).partialPivLu().solve(B);
}

double PlantModel::spectral_radius() const {
  return A.eigenvalues().cwiseAbs().maxCoeff();
}

PlantModel build_plant(const PlantParams& p, double T, double sigma_process) {
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidParam("discretization interval T must be > 0");
  if (!(p.inertia > 0.0)) throw InvalidParam("inertia M must be > 0");
  if (!(p.governor_tau > 0.0)) throw InvalidParam("governor time constant must be > 0");
  if (!(p.damping >= 0.0)) throw InvalidParam("damping D must be >= 0");
  if (p.droop && !(*p.droop > 0.0)) throw InvalidParam("droop R must be > 0 when enabled");
  if (!(p.integral_gain >= 0.0)) throw InvalidParam("integral gain must be >= 0");
  if (!(sigma_process >= 0.0)) throw InvalidParam("process noise std must be >= 0");

  const bool trim = p.integral_gain > 0.0;
  const Eigen::Index n = trim ? 3 : 2;
  Eigen::MatrixXd Ac = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd Bc = Eigen::VectorXd::Zero(n);
  Ac(0, 0) = -p.damping / p.inertia;
  Ac(0, 1) = 1.0 / p.inertia;
  if (p.droop) Ac(1, 0) = -1.0 / (*p.droop * p.governor_tau);
  Ac(1, 1) = -1.0 / p.governor_tau;
  if (trim) {
    Ac(1, 2) = 1.0 / p.governor_tau;
    Ac(2, 0) = -p.integral_gain;
  }
  Bc(0) = 1.0 / p.inertia;

  // exp([[Ac, Bc], [0, 0]] T) = [[A, B], [0, 1]]
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = Ac * T;
  aug.topRightCorner(n, 1) = Bc * T;
  const Eigen::MatrixXd phi = aug.exp();

  PlantModel model;
  model.A = phi.topLeftCorner(n, n);
  model.B = phi.topRightCorner(n, 1);
  model.C = Eigen::RowVectorXd::Zero(n);
  model.C(0) = 1.0;
  model.T = T;
  model.sigma_process = sigma_process;
  model.nominal_hz = p.nominal_hz;

  const double rho = model.spectral_radius();
  if (!(rho < 1.0 - kStabilityMargin)) {
    throw UnstablePlant("discretized plant has spectral radius " + std::to_string(rho));
  }
  if (std::abs(model.input_gain()) <= 1e-14 * model.B.norm()) {
    throw DegenerateInputPath("C B is zero; the input cannot be recovered from the output");
  }
  return model;
}

PlantState rest_state(const PlantModel& model) {
  return PlantState{Eigen::VectorXd::Zero(model.order()), 0};
}

PlantStepResult plant_step(const PlantModel& model, const PlantState& state, double mismatch,
                           double noise_sample) {
  if (!state.x.allFinite()) throw SimulationDiverged("plant state is not finite", state.k);
  PlantStepResult out{PlantState{model.A * state.x + model.B * (mismatch + noise_sample), state.k + 1},
                      0.0};
  if (!out.state.x.allFinite()) throw SimulationDiverged("plant state diverged", state.k);
  out.freq_deviation = model.C.dot(out.state.x);
  return out;
}

void GenerationSchedule::validate() const {
  if (entries.empty()) throw InvalidParam("generation schedule is empty");
  if (entries.front().start_tick != 0) throw InvalidParam("generation schedule must start at tick 0");
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].start_tick <= entries[i - 1].start_tick) {
      throw InvalidParam("generation schedule start ticks must be strictly increasing");
    }
  }
}

std::size_t GenerationSchedule::segment_at(long k) const {
  std::size_t seg = 0;
  while (seg + 1 < entries.size() && entries[seg + 1].start_tick <= k) ++seg;
  return seg;
}

double GenerationSchedule::generation_at(long k) const {
  if (k < 0) throw InvalidParam("tick must be >= 0");
  return entries[segment_at(k)].level_mw;
}

GenerationSchedule schedule_from_seconds(const std::vector<double>& times_s,
                                         const std::vector<double>& levels_mw, double nominal_mw,
                                         double T) {
  if (times_s.size() != levels_mw.size()) {
    throw InvalidParam("schedule times and levels differ in length");
  }
  GenerationSchedule schedule;
  schedule.nominal_mw = nominal_mw;
  for (std::size_t i = 0; i < times_s.size(); ++i) {
    schedule.entries.push_back({std::lround(times_s[i] / T), levels_mw[i]});
  }
  schedule.validate();
  return schedule;
}

GenerationSchedule contingency_schedule(double T) {
  return schedule_from_seconds({0.0, 20.0, 50.0}, {200.0, 190.0, 170.0}, 200.0, T);
}

double generation_at(const GenerationSchedule& schedule, long k) {
  return schedule.generation_at(k);
}

}  // namespace dgpsim
