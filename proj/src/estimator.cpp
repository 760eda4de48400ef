#include "dgpsim/estimator.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "dgpsim/error.hpp"

namespace dgpsim {

namespace {

constexpr double kInitialCovariance = 10.0;
constexpr double kAsymmetryTolerance = 1e-9;

double checked_input_gain(const PlantModel& model) {
  const double cb = model.input_gain();
  if (cb == 0.0 || !std::isfinite(cb)) {
    throw DegenerateInputPath("C B is zero; the unknown input is unobservable");
  }
  return cb;
}

// Joseph-form covariance update; valid for any gain, keeps P symmetric.
Eigen::MatrixXd propagate_covariance(const PlantModel& model, const Eigen::MatrixXd& P,
                                     double sigma_meas, Eigen::MatrixXd& gain_out, long k) {
  const Eigen::Index n = model.order();
  const double sp2 = model.sigma_process * model.sigma_process;
  const Eigen::MatrixXd Pminus = model.A * P * model.A.transpose() + sp2 * model.B * model.B.transpose();
  const Eigen::MatrixXd R = Eigen::MatrixXd::Constant(1, 1, sigma_meas * sigma_meas);
  gain_out = unbiased_gain(Pminus, model.B, model.C, R);
  const Eigen::MatrixXd IminusLC = Eigen::MatrixXd::Identity(n, n) - gain_out * model.C;
  Eigen::MatrixXd next = IminusLC * Pminus * IminusLC.transpose() + gain_out * R * gain_out.transpose();
  if (!next.allFinite()) throw EstimatorDiverged("estimator covariance is not finite", k);
  if ((next - next.transpose()).cwiseAbs().maxCoeff() > kAsymmetryTolerance * (1.0 + next.norm())) {
    throw EstimatorDiverged("estimator covariance lost symmetry", k);
  }
  return 0.5 * (next + next.transpose());
}

}  // namespace

Eigen::MatrixXd input_decoupled_dynamics(const PlantModel& model) {
  const double cb = checked_input_gain(model);
  const Eigen::Index n = model.order();
  return (Eigen::MatrixXd::Identity(n, n) - model.B * model.C / cb) * model.A;
}

bool check_prop1(const PlantModel& model) {
  const Eigen::MatrixXd M = input_decoupled_dynamics(model);
  return M.eigenvalues().cwiseAbs().maxCoeff() < 1.0;
}

Eigen::MatrixXd unbiased_gain(const Eigen::MatrixXd& Pminus, const Eigen::MatrixXd& G,
                              const Eigen::MatrixXd& C, const Eigen::MatrixXd& R) {
  const Eigen::MatrixXd F = C * G;
  if (F.rows() < F.cols()) throw InvalidParam("unknown inputs outnumber outputs");
  if (F.rows() == F.cols()) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(F);
    if (!lu.isInvertible()) throw DegenerateInputPath("C G is singular");
    return G * lu.inverse();
  }
  // L = K + (G - K F)(F' S^-1 F)^-1 F' S^-1,  K = P- C' S^-1,  S = C P- C' + R
  const Eigen::MatrixXd S = C * Pminus * C.transpose() + R;
  const Eigen::MatrixXd Sinv = S.ldlt().solve(Eigen::MatrixXd::Identity(S.rows(), S.cols()));
  const Eigen::MatrixXd K = Pminus * C.transpose() * Sinv;
  const Eigen::MatrixXd FtSinv = F.transpose() * Sinv;
  const Eigen::MatrixXd info = FtSinv * F;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
  if (!lu.isInvertible()) throw DegenerateInputPath("C G does not have full column rank");
  return K + (G - K * F) * lu.inverse() * FtSinv;
}

EstimatorState initial_estimator_state(const PlantModel& model, double sigma_meas) {
  if (!(sigma_meas >= 0.0)) throw InvalidParam("measurement noise std must be >= 0");
  checked_input_gain(model);
  const Eigen::Index n = model.order();
  return EstimatorState{Eigen::VectorXd::Zero(n),
                        kInitialCovariance * Eigen::MatrixXd::Identity(n, n), 0.0, sigma_meas, 0};
}

EstimatorUpdate estimator_update(const PlantModel& model, const EstimatorState& est, double y_meas) {
  const double cb = checked_input_gain(model);
  Eigen::MatrixXd gain;
  EstimatorState next;
  next.P = propagate_covariance(model, est.P, est.sigma_meas, gain, est.k);
  const Eigen::VectorXd predicted = model.A * est.x_hat;
  const double innovation = y_meas - model.C.dot(predicted);
  next.x_hat = predicted + gain.col(0) * innovation;
  next.last_u_hat = innovation / cb;
  next.sigma_meas = est.sigma_meas;
  next.k = est.k + 1;
  if (!next.x_hat.allFinite() || !std::isfinite(next.last_u_hat)) {
    throw EstimatorDiverged("estimator state is not finite", est.k);
  }
  return EstimatorUpdate{next, next.last_u_hat};
}

EstimatorBank::EstimatorBank(const PlantModel& model, std::size_t loads, double sigma_meas)
    : model_(&model), sigma_meas_(sigma_meas) {
  const EstimatorState init = initial_estimator_state(model, sigma_meas);
  P_ = init.P;
  x_hat_ = Eigen::MatrixXd::Zero(model.order(), static_cast<Eigen::Index>(loads));
  CA_ = model.C * model.A;
}

void EstimatorBank::update(std::span<const double> y_meas, std::span<double> u_hat) {
  if (y_meas.size() != size() || u_hat.size() != size()) {
    throw ArityMismatch("estimator bank expects one measurement per load");
  }
  const double cb = model_->input_gain();
  Eigen::MatrixXd gain;
  P_ = propagate_covariance(*model_, P_, sigma_meas_, gain, k_);
  const Eigen::VectorXd L = gain.col(0);
  const Eigen::Map<const Eigen::RowVectorXd> y(y_meas.data(), static_cast<Eigen::Index>(y_meas.size()));
  const Eigen::RowVectorXd innovation = y - CA_ * x_hat_;
  x_hat_ = model_->A * x_hat_ + L * innovation;
  if (!x_hat_.allFinite()) throw EstimatorDiverged("estimator state is not finite", k_);
  for (std::size_t i = 0; i < size(); ++i) u_hat[i] = innovation(static_cast<Eigen::Index>(i)) / cb;
  ++k_;
}

}  // namespace dgpsim
