#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "dgpsim/error.hpp"
#include "dgpsim/oracle.hpp"
#include "reference.hpp"

using namespace dgpsim;

TEST_CASE("symmetric pair splits evenly") {
  const std::vector<DisutilitySpec> specs{{Family::Quadratic, 1, 0, 0, 1}, {Family::Quadratic, 1, 0, 0, 1}};
  const auto sol = solve_primal(specs, 1.0);
  CHECK(sol.x_star[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(sol.x_star[1] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(sol.lambda_star == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sol.is_strictly_feasible);
}

TEST_CASE("boundary optimum of the two-load example") {
  const std::vector<DisutilitySpec> specs{{Family::Quadratic, 1, 0, 0, 0.25}, {Family::Quadratic, 1, 0, 0, 1}};
  const auto sol = solve_primal(specs, 1.0);
  CHECK(sol.x_star[0] == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(sol.x_star[1] == doctest::Approx(0.75).epsilon(1e-9));
  CHECK_FALSE(sol.is_strictly_feasible);
  CHECK(sol.optimal_cost == doctest::Approx(0.0625 + 0.5625).epsilon(1e-9));
  CHECK(check_optimality(specs, sol.x_star, 1.0, 1e-8).optimal);
  // the ODE equilibrium is not a solution: the balance is off by 1/3
  const std::vector<double> eq{0.25, 5.0 / 12.0};
  const auto rep = check_optimality(specs, eq, 1.0, 1e-6);
  CHECK_FALSE(rep.optimal);
  bool saw_equality = false;
  for (const auto& v : rep.violations) {
    if (v.kind == Violation::Kind::EqualityResidual) {
      saw_equality = true;
      CHECK(v.magnitude == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    }
  }
  CHECK(saw_equality);
}

TEST_CASE("flat three-load instance agrees with brute force") {
  const std::vector<DisutilitySpec> specs{make_flat_quadratic(1, 0.2, -1, 1), make_flat_quadratic(2, 0.1, -1, 1),
                                          make_flat_quadratic(1, 0.3, -1, 1)};
  const auto sol = solve_primal(specs, 0.4);
  const auto bf = brute_force_primal(specs, 0.4, 1e-3);
  CHECK(std::abs(sol.optimal_cost - bf.optimal_cost) <= 1e-4);
  CHECK(sol.optimal_cost <= bf.optimal_cost + 1e-12);
  CHECK(std::accumulate(sol.x_star.begin(), sol.x_star.end(), 0.0) == doctest::Approx(0.4).epsilon(1e-9));
}

TEST_CASE("brute force on random quadratic triples") {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 50; ++t) {
    const auto inst = ref::random_instance(rng, 3, Family::Quadratic);
    const auto sol = solve_primal(inst.specs, inst.g_bar);
    const auto bf = brute_force_primal(inst.specs, inst.g_bar, 1e-3);
    CHECK(std::abs(sol.optimal_cost - bf.optimal_cost) <= 1e-4);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(sol.x_star[i] - bf.x_star[i]) <= 2e-3);
  }
}

TEST_CASE("corner and origin targets") {
  const std::vector<DisutilitySpec> specs{make_quadratic(1, -1, 2), make_quadratic(3, -2, 0.5), make_quadratic(0.2, -1, 1)};
  const auto top = solve_primal(specs, 3.5);
  CHECK(top.x_star[0] == doctest::Approx(2.0));
  CHECK(top.x_star[1] == doctest::Approx(0.5));
  CHECK(top.x_star[2] == doctest::Approx(1.0));
  const auto origin = solve_primal(specs, 0.0);
  for (double x : origin.x_star) CHECK(std::abs(x) < 1e-9);
  CHECK(origin.optimal_cost < 1e-15);
  CHECK_THROWS_AS(solve_primal(specs, 3.6), Infeasible);
  CHECK_THROWS_AS(solve_primal(specs, -4.1), Infeasible);
}

TEST_CASE("dead-band plateau") {
  const std::vector<DisutilitySpec> specs{make_flat_quadratic(1, 0.2, -1, 1), make_flat_quadratic(2, 0.4, -1, 1)};
  const auto sol = solve_primal(specs, 0.3);
  CHECK(sol.lambda_star == 0.0);
  CHECK(sol.optimal_cost == 0.0);
  CHECK(sol.x_star[0] + sol.x_star[1] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(sol.critical_sets[0].lo == doctest::Approx(-0.2));
  CHECK(sol.critical_sets[1].hi == doctest::Approx(0.4));
  // proportional split by band width
  CHECK(sol.x_star[0] == doctest::Approx(0.1));
  const auto rnd = solve_primal(specs, 0.3, PlateauTieBreak{PlateauTieBreak::Rule::Randomized, 7});
  CHECK(rnd.lambda_star == 0.0);
  CHECK(rnd.x_star[0] + rnd.x_star[1] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(std::abs(rnd.x_star[0]) <= 0.2 + 1e-12);
  CHECK(std::abs(rnd.x_star[1]) <= 0.4 + 1e-12);
  CHECK(check_optimality(specs, rnd.x_star, 0.3, 1e-8).optimal);
}

TEST_CASE("multiplier is unique and monotone in the target") {
  std::mt19937_64 rng(43);
  for (Family fam : {Family::Quadratic, Family::FlatQuadratic}) {
    const auto inst = ref::random_instance(rng, 6, fam);
    double lo = 0.0, hi = 0.0;
    for (const auto& s : inst.specs) {
      lo += s.box_lo;
      hi += s.box_hi;
    }
    double prev = -INFINITY;
    for (int m = 1; m < 40; ++m) {
      const double g = lo + (hi - lo) * m / 40.0;
      const auto sol = solve_primal(inst.specs, g);
      CHECK(sol.lambda_star >= prev - 1e-9);
      prev = sol.lambda_star;
      if (sol.lambda_star != 0.0) {
        CHECK(aggregate_response(inst.specs, sol.lambda_star) == doctest::Approx(g).epsilon(1e-8).scale(1.0));
      }
      CHECK(check_optimality(inst.specs, sol.x_star, g, 1e-8).optimal);
    }
  }
}

TEST_CASE("oracle solutions pass the optimality check") {
  std::mt19937_64 rng(47);
  for (int t = 0; t < 100; ++t) {
    const auto inst = ref::random_instance(rng, 2 + t % 9, t % 2 ? Family::Quadratic : Family::FlatQuadratic);
    const auto sol = solve_primal(inst.specs, inst.g_bar);
    const auto rep = check_optimality(inst.specs, sol.x_star, inst.g_bar, 1e-8);
    CHECK(rep.optimal);
    CHECK(rep.max_residual <= 1e-8);
  }
}

TEST_CASE("perturbing an interior pair breaks optimality") {
  std::mt19937_64 rng(53);
  const double tol = 1e-4;
  int tested = 0;
  for (int t = 0; t < 60 && tested < 20; ++t) {
    const auto inst = ref::random_instance(rng, 5, Family::Quadratic);
    auto sol = solve_primal(inst.specs, inst.g_bar);
    std::vector<std::size_t> interior;
    for (std::size_t i = 0; i < 5; ++i) {
      const auto& s = inst.specs[i];
      if (sol.x_star[i] > s.box_lo + 1e-2 && sol.x_star[i] < s.box_hi - 1e-2) interior.push_back(i);
    }
    if (interior.size() < 2) continue;
    ++tested;
    auto x = sol.x_star;
    x[interior[0]] += 10 * tol;
    x[interior[1]] -= 10 * tol;
    const auto rep = check_optimality(inst.specs, x, inst.g_bar, tol);
    CHECK_FALSE(rep.optimal);
    bool mismatch = false;
    for (const auto& v : rep.violations) mismatch |= v.kind == Violation::Kind::GradientMismatch;
    CHECK(mismatch);
  }
  CHECK(tested >= 10);
}

TEST_CASE("optimality check reports box and KKT violations") {
  const std::vector<DisutilitySpec> specs{make_quadratic(1, -1, 1), make_quadratic(1, -1, 1)};
  const std::vector<double> outside{1.5, -0.5};
  auto rep = check_optimality(specs, outside, 1.0, 1e-6);
  CHECK_FALSE(rep.optimal);
  CHECK(rep.violations.front().kind == Violation::Kind::OutOfBox);
  CHECK_FALSE(rep.violations.front().describe().empty());

  // x1 at its upper bound while the other load has the larger gradient
  const std::vector<DisutilitySpec> wide{make_quadratic(1, -1, 0.2), make_quadratic(1, -1, 1)};
  const std::vector<double> x{0.2, 0.9};
  rep = check_optimality(wide, x, 1.1, 1e-6);
  CHECK(rep.optimal);
  const std::vector<double> y{-0.5, 1.0};
  rep = check_optimality(wide, y, 0.5, 1e-6);
  CHECK_FALSE(rep.optimal);
}

TEST_CASE("brute force limits") {
  const std::vector<DisutilitySpec> five(5, make_quadratic(1, -1, 1));
  CHECK_THROWS_AS(brute_force_primal(five, 0.0, 0.1), TooLarge);
  const std::vector<DisutilitySpec> two(2, make_quadratic(1, -1, 1));
  CHECK_THROWS_AS(brute_force_primal(two, 0.0, 0.0), InvalidParam);
  const auto corner = brute_force_primal(two, 2.0, 0.1);
  CHECK(corner.x_star[0] == doctest::Approx(1.0));
  CHECK(corner.x_star[1] == doctest::Approx(1.0));
}
