#pragma once

// Unknown-input observer used by every load to recover the grid mismatch from
// its own noisy frequency measurement.
//
// The state estimate follows the unbiased minimum-variance filter for systems
// with unknown inputs (Kitanidis 1987): the gain L minimizes trace(P) subject to
// L C B = B, which removes any dependence of the estimation error on the
// unknown input. The input itself is then recovered by treating the newest
// output as exact and solving the state equation for the previous input:
//
//   u_hat[k] = (C B)^{-1} (y[k] - C A x_hat[k])
//   x_hat[k+1] = A x_hat[k] + L (y[k] - C A x_hat[k])
//
// y[k] is the output produced after u[k] was applied (see plant_step), so
// u_hat[k] is an estimate of the mismatch at the same tick.

#include <span>

#include <Eigen/Core>

#include "dgpsim/plant.hpp"

namespace dgpsim {

// (I - B (C B)^{-1} C) A. Throws DegenerateInputPath when C B == 0.
Eigen::MatrixXd input_decoupled_dynamics(const PlantModel& model);

// True iff every eigenvalue of input_decoupled_dynamics(model) lies strictly
// inside the unit circle (bounded error variance).
bool check_prop1(const PlantModel& model);

// Minimum-trace gain subject to L (C G) = G, for predicted covariance Pminus,
// unknown-input matrix G (n x m), output matrix C (p x n, p >= m) and
// measurement covariance R (p x p). When p == m the constraint alone fixes
// L = G (C G)^{-1}.
Eigen::MatrixXd unbiased_gain(const Eigen::MatrixXd& Pminus, const Eigen::MatrixXd& G,
                              const Eigen::MatrixXd& C, const Eigen::MatrixXd& R);

struct EstimatorState {
  Eigen::VectorXd x_hat;
  Eigen::MatrixXd P;
  double last_u_hat = 0.0;
  double sigma_meas = 0.0;  // Hz
  long k = 0;
};

// x_hat = 0, P = 10 I.
EstimatorState initial_estimator_state(const PlantModel& model, double sigma_meas);

struct EstimatorUpdate {
  EstimatorState state;
  double u_hat;
};

// Throws EstimatorDiverged on non-finite results.
EstimatorUpdate estimator_update(const PlantModel& model, const EstimatorState& est, double y_meas);

// A set of independent observers sharing one plant model and one measurement
// noise level. The gain/covariance recursion does not depend on the data, so it
// is advanced once per tick for the whole bank; only the state estimates are
// per load.
class EstimatorBank {
 public:
  EstimatorBank(const PlantModel& model, std::size_t loads, double sigma_meas);

  std::size_t size() const noexcept { return static_cast<std::size_t>(x_hat_.cols()); }
  const Eigen::MatrixXd& covariance() const noexcept { return P_; }
  Eigen::VectorXd estimate(std::size_t load) const { return x_hat_.col(static_cast<Eigen::Index>(load)); }

  // One measurement per load in, one mismatch estimate per load out.
  void update(std::span<const double> y_meas, std::span<double> u_hat);

 private:
  const PlantModel* model_;
  double sigma_meas_;
  Eigen::MatrixXd P_;
  Eigen::MatrixXd x_hat_;
  Eigen::RowVectorXd CA_;
  long k_ = 0;
};

}  // namespace dgpsim
