#include "dgpsim/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "dgpsim/error.hpp"

namespace dgpsim {

namespace {

constexpr double kBisectionTol = 1e-10;
constexpr int kMaxBisections = 400;

double bound_eps(double bound) { return 1e-12 * std::max(1.0, std::abs(bound)); }

bool strictly_inside(const DisutilitySpec& s, double x) {
  return x > s.box_lo + bound_eps(s.box_lo) && x < s.box_hi - bound_eps(s.box_hi);
}

void require_feasible(std::span<const DisutilitySpec> specs, double g_bar) {
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& s : specs) {
    lo += s.box_lo;
    hi += s.box_hi;
  }
  const double slack = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
  if (g_bar < lo - slack || g_bar > hi + slack) {
    std::ostringstream msg;
    msg << "target " << g_bar << " MW lies outside the feasible range [" << lo << ", " << hi << "]";
    throw Infeasible(msg.str());
  }
}

// Fills in cost, feasibility flag and critical sets from x_star / lambda_star.
void finish(std::span<const DisutilitySpec> specs, PrimalSolution& sol) {
  sol.optimal_cost = total_disutility(specs, sol.x_star);
  sol.is_strictly_feasible = true;
  sol.critical_sets.clear();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (!strictly_inside(specs[i], sol.x_star[i])) sol.is_strictly_feasible = false;
    Interval set = gradient_level_set(specs[i], sol.lambda_star);
    if (set.empty() || set.distance(sol.x_star[i]) > 1e-9 * std::max(1.0, std::abs(sol.x_star[i]))) {
      set = Interval{sol.x_star[i], sol.x_star[i]};
    }
    sol.critical_sets.push_back(set);
  }
}

std::vector<double> plateau_point(std::span<const DisutilitySpec> specs, double g_bar,
                                  const PlateauTieBreak& tie) {
  double width = 0.0;
  for (const auto& s : specs) {
    if (s.family == Family::FlatQuadratic) width += s.a;
  }
  std::vector<double> x(specs.size(), 0.0);
  if (width == 0.0) return x;
  const double share = g_bar / width;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].family == Family::FlatQuadratic) x[i] = share * specs[i].a;
  }
  if (tie.rule == PlateauTieBreak::Rule::Proportional) return x;

  // Random zero-sum direction inside the dead bands, scaled to stay feasible.
  std::mt19937_64 rng(tie.seed);
  std::vector<double> d(specs.size(), 0.0);
  double drift = 0.0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].family != Family::FlatQuadratic) continue;
    d[i] = std::uniform_real_distribution<double>(-specs[i].a, specs[i].a)(rng) - x[i];
    drift += d[i];
  }
  double t_max = 1.0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].family != Family::FlatQuadratic) continue;
    d[i] -= drift * specs[i].a / width;
    if (d[i] > 0.0) t_max = std::min(t_max, (specs[i].a - x[i]) / d[i]);
    if (d[i] < 0.0) t_max = std::min(t_max, (-specs[i].a - x[i]) / d[i]);
  }
  const double t = std::max(0.0, t_max) * std::uniform_real_distribution<double>(0.05, 0.95)(rng);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    x[i] = std::clamp(x[i] + t * d[i], -specs[i].a, specs[i].a);
  }
  return x;
}

}  // namespace

double total_disutility(std::span<const DisutilitySpec> specs, std::span<const double> x) {
  if (specs.size() != x.size()) throw ArityMismatch("one position per disutility spec is required");
  double cost = 0.0;
  for (std::size_t i = 0; i < specs.size(); ++i) cost += eval(specs[i], x[i]);
  return cost;
}

double aggregate_response(std::span<const DisutilitySpec> specs, double lambda) {
  double total = 0.0;
  for (const auto& s : specs) total += price_response(s, lambda);
  return total;
}

PrimalSolution solve_primal(std::span<const DisutilitySpec> specs, double g_bar, PlateauTieBreak tie_break) {
  if (specs.empty()) throw InvalidParam("no loads");
  for (const auto& s : specs) validate_shape(s);
  require_feasible(specs, g_bar);

  PrimalSolution sol;
  double dead_band = 0.0;
  for (const auto& s : specs) {
    if (s.family == Family::FlatQuadratic) dead_band += s.a;
  }
  if (dead_band > 0.0 && std::abs(g_bar) <= dead_band) {
    sol.lambda_star = 0.0;
    sol.x_star = plateau_point(specs, g_bar, tie_break);
    finish(specs, sol);
    return sol;
  }

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& s : specs) {
    lo = std::min(lo, grad(s, s.box_lo));
    hi = std::max(hi, grad(s, s.box_hi));
  }
  lo -= 1.0;
  hi += 1.0;
  const double tol = kBisectionTol * std::max(1.0, std::abs(g_bar));
  double lambda = 0.5 * (lo + hi);
  for (int it = 0; it < kMaxBisections; ++it) {
    lambda = 0.5 * (lo + hi);
    if (!(lo < lambda && lambda < hi)) break;  // bracket exhausted at double resolution
    const double residual = aggregate_response(specs, lambda) - g_bar;
    if (std::abs(residual) < tol) break;
    if (residual < 0.0) {
      lo = lambda;
    } else {
      hi = lambda;
    }
  }
  sol.lambda_star = lambda;
  sol.x_star.reserve(specs.size());
  for (const auto& s : specs) sol.x_star.push_back(price_response(s, lambda));
  finish(specs, sol);
  return sol;
}

PrimalSolution brute_force_primal(std::span<const DisutilitySpec> specs, double g_bar, double grid_step) {
  const std::size_t n = specs.size();
  if (n == 0) throw InvalidParam("no loads");
  if (n > 4) throw TooLarge("brute-force search supports at most 4 loads");
  if (!(grid_step > 0.0)) throw InvalidParam("grid step must be > 0");
  for (const auto& s : specs) validate_shape(s);

  // Grid per coordinate, always including both box ends, with cached costs.
  std::vector<std::vector<double>> grids(n), costs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = specs[i];
    const auto steps = static_cast<long>(std::floor((s.box_hi - s.box_lo) / grid_step));
    for (long m = 0; m <= steps; ++m) grids[i].push_back(s.box_lo + static_cast<double>(m) * grid_step);
    if (grids[i].back() < s.box_hi) grids[i].push_back(s.box_hi);
    for (double x : grids[i]) costs[i].push_back(eval(s, x));
  }

  // Every coordinate takes a turn as the one that closes the balance, so a
  // coordinate resting on a bound is hit exactly by some pass.
  const double slack = 1e-12 * std::max(1.0, std::abs(g_bar));
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<double> best;
  std::vector<double> point(n, 0.0);
  std::vector<std::size_t> free_dims;
  for (std::size_t closing_dim = 0; closing_dim < n; ++closing_dim) {
    free_dims.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (i != closing_dim) free_dims.push_back(i);
    }
    const DisutilitySpec& last = specs[closing_dim];
    const double lo = last.box_lo - slack, hi = last.box_hi + slack;

    // Odometer over all but the first free coordinate, which is scanned inline.
    const std::size_t outer = free_dims.empty() ? 0 : free_dims.size() - 1;
    std::vector<std::size_t> idx(outer, 0);
    while (true) {
      double outer_sum = 0.0, outer_cost = 0.0;
      for (std::size_t m = 0; m < outer; ++m) {
        const std::size_t i = free_dims[m + 1];
        outer_sum += grids[i][idx[m]];
        outer_cost += costs[i][idx[m]];
      }
      if (free_dims.empty()) {
        const double closing = g_bar;
        if (closing >= lo && closing <= hi) {
          point[closing_dim] = std::clamp(closing, last.box_lo, last.box_hi);
          best_cost = eval(last, point[closing_dim]);
          best = point;
        }
      } else {
        const std::size_t f = free_dims[0];
        const auto& grid = grids[f];
        const auto& cost = costs[f];
        for (std::size_t m = 0; m < grid.size(); ++m) {
          const double closing = g_bar - outer_sum - grid[m];
          if (closing < lo || closing > hi) continue;
          const double c = outer_cost + cost[m] + eval(last, std::clamp(closing, last.box_lo, last.box_hi));
          if (c < best_cost) {
            best_cost = c;
            for (std::size_t k = 0; k < outer; ++k) point[free_dims[k + 1]] = grids[free_dims[k + 1]][idx[k]];
            point[f] = grid[m];
            point[closing_dim] = std::clamp(closing, last.box_lo, last.box_hi);
            best = point;
          }
        }
      }
      std::size_t d = 0;
      while (d < idx.size() && ++idx[d] == grids[free_dims[d + 1]].size()) idx[d++] = 0;
      if (d == idx.size()) break;
    }
  }
  if (best.empty()) throw Infeasible("no grid point satisfies the balance constraint");

  PrimalSolution sol;
  sol.x_star = best;
  sol.lambda_star = grad(specs[n - 1], best[n - 1]);
  for (std::size_t i = 0; i < n; ++i) {
    if (strictly_inside(specs[i], best[i])) {
      sol.lambda_star = grad(specs[i], best[i]);
      break;
    }
  }
  finish(specs, sol);
  return sol;
}

std::string Violation::describe() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::OutOfBox:
      out << "load " << index << " lies outside its box by " << magnitude;
      break;
    case Kind::EqualityResidual:
      out << "balance residual |sum x - g_bar| = " << magnitude;
      break;
    case Kind::GradientMismatch:
      out << "load " << index << " gradient differs from the common multiplier by " << magnitude;
      break;
    case Kind::UpperBoundKkt:
      out << "load " << index << " at its upper bound has gradient above the multiplier by " << magnitude;
      break;
    case Kind::LowerBoundKkt:
      out << "load " << index << " at its lower bound has gradient below the multiplier by " << magnitude;
      break;
    case Kind::NoMultiplier:
      out << "no multiplier separates upper- and lower-bound gradients (gap " << magnitude << ")";
      break;
  }
  return out.str();
}

OptimalityReport check_optimality(std::span<const DisutilitySpec> specs, std::span<const double> x,
                                  double g_bar, double tol) {
  if (specs.size() != x.size()) throw ArityMismatch("one position per disutility spec is required");
  OptimalityReport report;
  auto record = [&](Violation::Kind kind, std::size_t index, double magnitude) {
    report.max_residual = std::max(report.max_residual, magnitude);
    if (magnitude > tol) report.violations.push_back(Violation{kind, index, magnitude});
  };

  double sum = 0.0;
  std::vector<double> interior_grads;
  double max_grad_hi = -std::numeric_limits<double>::infinity();
  double min_grad_lo = std::numeric_limits<double>::infinity();
  enum class Where { Interior, Upper, Lower };
  std::vector<Where> where(specs.size(), Where::Interior);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    sum += x[i];
    const double excess = std::max(s.box_lo - x[i], x[i] - s.box_hi);
    if (excess > 0.0) record(Violation::Kind::OutOfBox, i, excess);
    const double g = grad(s, x[i]);
    if (x[i] >= s.box_hi - bound_eps(s.box_hi)) {
      where[i] = Where::Upper;
      max_grad_hi = std::max(max_grad_hi, g);
    } else if (x[i] <= s.box_lo + bound_eps(s.box_lo)) {
      where[i] = Where::Lower;
      min_grad_lo = std::min(min_grad_lo, g);
    } else {
      interior_grads.push_back(g);
    }
  }
  record(Violation::Kind::EqualityResidual, 0, std::abs(sum - g_bar));

  if (!interior_grads.empty()) {
    std::sort(interior_grads.begin(), interior_grads.end());
    const std::size_t m = interior_grads.size();
    report.lambda = m % 2 == 1 ? interior_grads[m / 2] : 0.5 * (interior_grads[m / 2 - 1] + interior_grads[m / 2]);
  } else if (std::isfinite(max_grad_hi) && std::isfinite(min_grad_lo)) {
    report.lambda = 0.5 * (max_grad_hi + min_grad_lo);
    record(Violation::Kind::NoMultiplier, 0, std::max(0.0, 0.5 * (max_grad_hi - min_grad_lo)));
  } else {
    report.lambda = std::isfinite(max_grad_hi) ? max_grad_hi : min_grad_lo;
  }

  for (std::size_t i = 0; i < specs.size(); ++i) {
    const double g = grad(specs[i], x[i]);
    switch (where[i]) {
      case Where::Interior:
        record(Violation::Kind::GradientMismatch, i, std::abs(g - report.lambda));
        break;
      case Where::Upper:
        record(Violation::Kind::UpperBoundKkt, i, std::max(0.0, g - report.lambda));
        break;
      case Where::Lower:
        record(Violation::Kind::LowerBoundKkt, i, std::max(0.0, report.lambda - g));
        break;
    }
  }
  report.optimal = report.violations.empty();
  return report;
}

}  // namespace dgpsim
