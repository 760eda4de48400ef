#include "dgpsim/ode_ref.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dgpsim/error.hpp"

namespace dgpsim {

double default_ode_dt(std::span<const DisutilitySpec> specs, double c) {
  double q_max = 0.0;
  for (const auto& s : specs) q_max = std::max(q_max, s.q);
  if (!(q_max > 0.0) || !(c > 0.0)) throw InvalidParam("need c > 0 and at least one load");
  return 1e-3 / (c * q_max);
}

void attach_oracle(OdeConfig& cfg) {
  cfg.critical_sets = solve_primal(cfg.specs, cfg.g_bar).critical_sets;
}

std::vector<double> projected_rhs(const OdeConfig& cfg, std::span<const double> x) {
  const std::size_t n = cfg.specs.size();
  if (x.size() != n || cfg.topology.size() != n) throw ArityMismatch("state size does not match the instance");
  double u = cfg.g_bar;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = cfg.specs[i];
    if (x[i] < s.box_lo || x[i] > s.box_hi) {
      throw DomainViolation("coordinate " + std::to_string(i) + " lies outside its box");
    }
    u -= x[i];
    g[i] = grad(s, x[i]);
  }
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    double consensus = 0.0;
    for (NodeId j : cfg.topology.neighbors(i)) consensus += g[j] - g[i];
    double vi = cfg.c * consensus + u;
    if ((x[i] >= cfg.specs[i].box_hi && vi > 0.0) || (x[i] <= cfg.specs[i].box_lo && vi < 0.0)) vi = 0.0;
    v[i] = vi;
  }
  return v;
}

Diagnostics mismatch_diagnostics(std::span<const Interval> critical_sets, std::span<const double> x,
                                 double g_bar) {
  if (critical_sets.size() != x.size()) throw ArityMismatch("one critical set per load is required");
  double y = 0.0;
  double u = g_bar;
  for (std::size_t i = 0; i < x.size(); ++i) {
    y += critical_sets[i].distance(x[i]);
    u -= x[i];
  }
  return Diagnostics{y, y + std::abs(u), u};
}

Diagnostics diagnostics(const OdeConfig& cfg, std::span<const double> x) {
  if (!cfg.critical_sets) throw OracleRequired("critical gradient sets have not been computed");
  return mismatch_diagnostics(*cfg.critical_sets, x, cfg.g_bar);
}

std::vector<OdeSample> integrate(OdeConfig cfg, std::span<const double> x0, std::size_t stride) {
  if (!(cfg.dt > 0.0) || !(cfg.t_end >= 0.0)) throw InvalidParam("need dt > 0 and t_end >= 0");
  if (stride == 0) throw InvalidParam("stride must be >= 1");
  if (!cfg.critical_sets) attach_oracle(cfg);
  std::vector<double> x(x0.begin(), x0.end());
  const auto steps = static_cast<std::size_t>(std::ceil(cfg.t_end / cfg.dt - 1e-9));

  std::vector<OdeSample> out;
  out.reserve(steps / stride + 2);
  out.push_back(OdeSample{0.0, x, diagnostics(cfg, x)});
  for (std::size_t s = 1; s <= steps; ++s) {
    const std::vector<double> v = projected_rhs(cfg, x);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = project(cfg.specs[i], x[i] + cfg.dt * v[i]);
    if (s % stride == 0 || s == steps) {
      out.push_back(OdeSample{static_cast<double>(s) * cfg.dt, x, diagnostics(cfg, x)});
    }
  }
  return out;
}

OdeConfig boundary_counterexample() {
  std::vector<DisutilitySpec> specs{
      DisutilitySpec{Family::Quadratic, 1.0, 0.0, 0.0, 0.25},
      DisutilitySpec{Family::Quadratic, 1.0, 0.0, 0.0, 1.0},
  };
  const std::vector<Edge> edge{{0, 1}};
  OdeConfig cfg{specs, GraphTopology::from_edges(2, edge), 1.0, 1.0, 1e-3, 20.0, std::nullopt};
  return cfg;
}

}  // namespace dgpsim
