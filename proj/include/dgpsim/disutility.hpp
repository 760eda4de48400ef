#pragma once

// Consumer disutility models. A load's disutility depends only on its own
// consumption deviation x (MW) from nominal. Two families are supported:
//
//   FlatQuadratic:  f(x) = 0               for |x| <= a
//                   f(x) = q (x - a)^2     for x >= a
//                   f(x) = q (x + a)^2     for x <= -a
//   Quadratic:      f(x) = q x^2
//
// Gradients are in cost per MW. eval/grad are defined on the whole real line;
// the admissible box only enters through project().

#include <string_view>

namespace dgpsim {

enum class Family { FlatQuadratic, Quadratic };

std::string_view to_string(Family family) noexcept;
Family family_from_string(std::string_view name);

struct DisutilitySpec {
  Family family = Family::Quadratic;
  double q = 1.0;       // curvature, 1/MW
  double a = 0.0;       // dead-band half-width, MW (0 for Quadratic)
  double box_lo = -1.0;  // MW
  double box_hi = 1.0;   // MW

  bool strictly_convex() const noexcept { return family == Family::Quadratic; }
};

// Structural checks: q > 0, a >= 0 (a == 0 for Quadratic), box_lo < box_hi and,
// for FlatQuadratic, a dead band strictly inside the box. Throws InvalidParam.
void validate_shape(const DisutilitySpec& spec);

// validate_shape plus box_lo < 0 < box_hi, i.e. the nominal point is interior.
// Scenario loads must pass this; analytical examples may only need the former.
void validate(const DisutilitySpec& spec);

DisutilitySpec make_quadratic(double q, double box_lo, double box_hi);
DisutilitySpec make_flat_quadratic(double q, double a, double box_lo, double box_hi);

double eval(const DisutilitySpec& spec, double x) noexcept;
double grad(const DisutilitySpec& spec, double x) noexcept;

// Preimage of a gradient value. Only strictly convex specs are invertible;
// FlatQuadratic throws NotInvertible.
double inv_grad(const DisutilitySpec& spec, double g);

// Euclidean projection onto [box_lo, box_hi].
double project(const DisutilitySpec& spec, double v) noexcept;

// Minimizer of f(x) - lambda * x over the box, i.e. the load's response to a
// common marginal price lambda. At lambda == 0 a FlatQuadratic spec has a
// whole interval of minimizers; this returns the midpoint 0.
double price_response(const DisutilitySpec& spec, double lambda) noexcept;

// Closed interval {x in box : grad(x) == g}. Empty when lo > hi.
struct Interval {
  double lo;
  double hi;
  bool empty() const noexcept { return lo > hi; }
  double distance(double x) const noexcept;
};
Interval gradient_level_set(const DisutilitySpec& spec, double g) noexcept;

}  // namespace dgpsim
