#pragma once

// Noiseless continuous-time limit of the DGP iteration,
//
//   dx/dt = Gamma_box[ -c L grad f(x) + u(t) 1 ],   u(t) = g_bar - 1'x(t),
//
// where Gamma_box zeroes any velocity component that would push a coordinate
// sitting on its bound out of the box. Integrated with explicit Euler followed
// by clamping onto the box.
//
// Along trajectories the Lyapunov-style quantities
//   y(x) = sum_i dist(x_i, X_i*)      X_i* = {x in box_i : grad f_i(x) = lambda*}
//   z(x) = y(x) + |u(x)|
// are tracked; for strictly feasible instances z never increases.

#include <optional>
#include <span>
#include <vector>

#include "dgpsim/disutility.hpp"
#include "dgpsim/graph.hpp"
#include "dgpsim/oracle.hpp"

namespace dgpsim {

struct OdeConfig {
  std::vector<DisutilitySpec> specs;
  GraphTopology topology;
  double c = 1.0;
  double g_bar = 0.0;
  double dt = 1e-3;
  double t_end = 10.0;
  // Critical gradient sets from the oracle; required by diagnostics().
  std::optional<std::vector<Interval>> critical_sets;
};

// 1e-3 / (c * max_i q_i).
double default_ode_dt(std::span<const DisutilitySpec> specs, double c);

// Runs the oracle and stores its critical gradient sets in cfg.
void attach_oracle(OdeConfig& cfg);

// Throws DomainViolation if x is outside the box.
std::vector<double> projected_rhs(const OdeConfig& cfg, std::span<const double> x);

struct Diagnostics {
  double y;  // MW
  double z;  // MW
  double u;  // MW
};

// Throws OracleRequired when cfg.critical_sets is empty.
Diagnostics diagnostics(const OdeConfig& cfg, std::span<const double> x);

// Same quantities for arbitrary critical sets; used by the simulation harness.
Diagnostics mismatch_diagnostics(std::span<const Interval> critical_sets, std::span<const double> x,
                                 double g_bar);

struct OdeSample {
  double t;
  std::vector<double> x;
  Diagnostics diag;
};

// Records every `stride`-th step plus the final state. Runs the oracle first if
// cfg carries no critical sets. Throws DomainViolation if x0 is outside the box.
std::vector<OdeSample> integrate(OdeConfig cfg, std::span<const double> x0, std::size_t stride = 1);

// Two loads, f_i = x_i^2, box [0, 1/4] x [0, 1], one edge, c = 1, g_bar = 1.
// The unique optimum [1/4, 3/4] sits on the boundary and is not an equilibrium;
// the flow settles at [1/4, 5/12] instead.
OdeConfig boundary_counterexample();

}  // namespace dgpsim
