#pragma once

// Centralized reference solutions of
//
//   minimize sum_i f_i(x_i)  s.t.  sum_i x_i = g_bar,  x_i in [lo_i, hi_i].
//
// solve_primal bisects on the common marginal cost lambda: every load answers
// lambda with the box-clamped minimizer of f_i(x) - lambda x, and the total
// answer is nondecreasing in lambda. brute_force_primal is an independent
// grid search for tiny instances and exists to cross-check the former.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dgpsim/disutility.hpp"

namespace dgpsim {

struct PrimalSolution {
  std::vector<double> x_star;
  double lambda_star = 0.0;
  bool is_strictly_feasible = false;
  double optimal_cost = 0.0;
  // Per load: {x in box : grad f_i(x) = lambda_star}. For a load pinned at a
  // bound where that set is empty, the singleton {x_star_i}. When lambda_star
  // is 0 on flat-quadratic loads these are whole intervals and x_star is one
  // point of the optimal polytope.
  std::vector<Interval> critical_sets;
};

// How to pick a point when the optimum is a dead-band plateau (lambda* = 0).
struct PlateauTieBreak {
  enum class Rule { Proportional, Randomized };
  Rule rule = Rule::Proportional;  // residual shared in proportion to a_i
  std::uint64_t seed = 0;          // used by Randomized only
};

double total_disutility(std::span<const DisutilitySpec> specs, std::span<const double> x);

// sum_i price_response(spec_i, lambda).
double aggregate_response(std::span<const DisutilitySpec> specs, double lambda);

// Throws Infeasible when g_bar lies outside [sum lo_i, sum hi_i].
PrimalSolution solve_primal(std::span<const DisutilitySpec> specs, double g_bar,
                            PlateauTieBreak tie_break = {});

// Exhaustive search over box grids of n-1 coordinates with the remaining one
// closing the equality, repeated for each choice of the closing coordinate.
// Throws TooLarge for n > 4, Infeasible when no grid point is feasible.
PrimalSolution brute_force_primal(std::span<const DisutilitySpec> specs, double g_bar, double grid_step);

struct Violation {
  enum class Kind { OutOfBox, EqualityResidual, GradientMismatch, UpperBoundKkt, LowerBoundKkt, NoMultiplier };
  Kind kind;
  std::size_t index;  // load index; unused for EqualityResidual / NoMultiplier
  double magnitude;

  std::string describe() const;
};

struct OptimalityReport {
  bool optimal = false;
  double lambda = 0.0;         // multiplier used for the gradient checks
  double max_residual = 0.0;   // largest KKT residual regardless of tol
  std::vector<Violation> violations;
};

// First-order optimality of x within tol. Interior coordinates must share the
// gradient lambda (median interior gradient); coordinates at the upper bound
// need grad <= lambda + tol, at the lower bound grad >= lambda - tol.
OptimalityReport check_optimality(std::span<const DisutilitySpec> specs, std::span<const double> x,
                                  double g_bar, double tol);

}  // namespace dgpsim
