#include "dgpsim/disutility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dgpsim/error.hpp"

namespace dgpsim {

std::string_view to_string(Family family) noexcept {
  switch (family) {
    case Family::FlatQuadratic:
      return "flat_quadratic";
    case Family::Quadratic:
      return "quadratic";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  if (name == "flat_quadratic") return Family::FlatQuadratic;
  if (name == "quadratic") return Family::Quadratic;
  throw InvalidParam("unknown disutility family '" + std::string(name) + "'");
}

void validate_shape(const DisutilitySpec& spec) {
  if (!(spec.q > 0.0) || !std::isfinite(spec.q)) {
    throw InvalidParam("disutility curvature q must be positive and finite");
  }
  if (!(spec.a >= 0.0) || !std::isfinite(spec.a)) {
    throw InvalidParam("dead-band half-width a must be non-negative");
  }
  if (!(spec.box_lo < spec.box_hi) || !std::isfinite(spec.box_lo) || !std::isfinite(spec.box_hi)) {
    throw InvalidParam("box bounds must be finite with box_lo < box_hi");
  }
  if (spec.family == Family::Quadratic && spec.a != 0.0) {
    throw InvalidParam("quadratic disutility has no dead band (a must be 0)");
  }
  if (spec.family == Family::FlatQuadratic && !(spec.a < spec.box_hi && -spec.a > spec.box_lo)) {
    throw InvalidParam("dead band [-a, a] must lie strictly inside the box");
  }
}

void validate(const DisutilitySpec& spec) {
  validate_shape(spec);
  if (!(spec.box_lo < 0.0 && 0.0 < spec.box_hi)) {
    throw InvalidParam("box must contain the nominal point 0 in its interior");
  }
}

DisutilitySpec make_quadratic(double q, double box_lo, double box_hi) {
  DisutilitySpec spec{Family::Quadratic, q, 0.0, box_lo, box_hi};
  validate(spec);
  return spec;
}

DisutilitySpec make_flat_quadratic(double q, double a, double box_lo, double box_hi) {
  DisutilitySpec spec{Family::FlatQuadratic, q, a, box_lo, box_hi};
  validate(spec);
  return spec;
}

double eval(const DisutilitySpec& spec, double x) noexcept {
  if (spec.family == Family::Quadratic) return spec.q * x * x;
  if (x >= spec.a) return spec.q * (x - spec.a) * (x - spec.a);
  if (x <= -spec.a) return spec.q * (x + spec.a) * (x + spec.a);
  return 0.0;
}

double grad(const DisutilitySpec& spec, double x) noexcept {
  if (spec.family == Family::Quadratic) return 2.0 * spec.q * x;
  if (x > spec.a) return 2.0 * spec.q * (x - spec.a);
  if (x < -spec.a) return 2.0 * spec.q * (x + spec.a);
  return 0.0;
}

double inv_grad(const DisutilitySpec& spec, double g) {
  if (!spec.strictly_convex()) {
    throw NotInvertible("gradient of a flat-quadratic disutility is not invertible");
  }
  return g / (2.0 * spec.q);
}

double project(const DisutilitySpec& spec, double v) noexcept {
  return std::clamp(v, spec.box_lo, spec.box_hi);
}

double price_response(const DisutilitySpec& spec, double lambda) noexcept {
  double x = lambda / (2.0 * spec.q);
  if (spec.family == Family::FlatQuadratic) {
    if (lambda > 0.0) {
      x += spec.a;
    } else if (lambda < 0.0) {
      x -= spec.a;
    }
  }
  return project(spec, x);
}

double Interval::distance(double x) const noexcept {
  if (empty()) return std::numeric_limits<double>::infinity();
  if (x < lo) return lo - x;
  if (x > hi) return x - hi;
  return 0.0;
}

Interval gradient_level_set(const DisutilitySpec& spec, double g) noexcept {
  double lo = 0.0;
  double hi = 0.0;
  if (spec.family == Family::FlatQuadratic && g == 0.0) {
    lo = -spec.a;
    hi = spec.a;
  } else {
    double x = g / (2.0 * spec.q);
    if (spec.family == Family::FlatQuadratic) x += (g > 0.0 ? spec.a : -spec.a);
    lo = hi = x;
  }
  return Interval{std::max(lo, spec.box_lo), std::min(hi, spec.box_hi)};
}

}  // namespace dgpsim
