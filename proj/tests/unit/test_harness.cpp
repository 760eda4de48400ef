#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "dgpsim/error.hpp"
#include "dgpsim/report.hpp"
#include "dgpsim/scenario.hpp"
#include "dgpsim/simulation.hpp"
#include "reference.hpp"

using namespace dgpsim;

namespace {

const char* const kSmall = R"(
[loads]
n = 12
family = quadratic
seed = 5

[graph]
band = 2

[schedule]
nominal_mw = 200
times_s = 0, 5, 12
levels_mw = 200, 199, 197.5

[run]
duration_s = 20
)";

std::string csv_of(const RunResult& r) {
  std::ostringstream out;
  write_trajectory_csv(out, r.trajectory);
  return out.str();
}

}  // namespace

TEST_CASE("paper defaults sample boxes that total 60 MW") {
  const Scenario s = build_scenario("");
  CHECK(s.size() == 1000);
  CHECK(s.band_half_width == 1);
  CHECK(s.ticks == 1000);
  CHECK(s.T() == 0.1);
  double total = 0.0;
  for (const auto& spec : s.specs) {
    CHECK(spec.family == Family::FlatQuadratic);
    CHECK(spec.box_lo == -spec.box_hi);
    CHECK(spec.a == doctest::Approx(0.1 * spec.box_hi).epsilon(1e-12));
    CHECK(1.0 / spec.q >= 0.1);
    CHECK(1.0 / spec.q <= 0.3);
    total += spec.box_hi;
  }
  CHECK(std::abs(total - 60.0) <= 1e-9);
  CHECK(s.schedule.generation_at(100) == 200.0);
  CHECK(s.schedule.generation_at(300) == 190.0);
  CHECK(s.schedule.generation_at(600) == 170.0);
  CHECK(s.steps.c == 5.0);
  CHECK(s.steps.exponent == 0.8);
  double q_min = INFINITY;
  for (const auto& spec : s.specs) q_min = std::min(q_min, spec.q);
  CHECK(s.steps.gamma0 == doctest::Approx(1.5 * q_min / 1000.0));
}

TEST_CASE("dual on flat loads is refused") {
  CHECK_THROWS_AS(build_scenario("[algorithm]\nname = dual\n"), DualNeedsStrictConvexity);
  const Scenario flat = build_scenario("[loads]\nn = 10\n");
  CHECK_THROWS_AS(with_algorithm(flat, Algorithm::Dual), DualNeedsStrictConvexity);
  CHECK_NOTHROW(build_scenario("[loads]\nn = 10\nfamily = quadratic\n[algorithm]\nname = dual\n"));
}

TEST_CASE("fully specified scenario needs no sampling") {
  const char* doc = R"(
[loads]
n = 2
family = quadratic
q = 1, 2
box_lo = -1, -0.5
box_hi = 2, 0.5
[graph]
edges = 1 2
)";
  const Scenario a = build_scenario(doc, ScenarioOverrides{11, std::nullopt});
  const Scenario b = build_scenario(doc, ScenarioOverrides{99, std::nullopt});
  REQUIRE(a.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(a.specs[i].q == b.specs[i].q);
    CHECK(a.specs[i].box_lo == b.specs[i].box_lo);
    CHECK(a.specs[i].box_hi == b.specs[i].box_hi);
  }
  CHECK(a.specs[1].q == 2.0);
  CHECK(a.specs[1].box_hi == 0.5);
  CHECK(a.topology.edge_count() == 1);
}

TEST_CASE("config errors name the field") {
  auto message = [](const std::string& doc) -> std::string {
    try {
      build_scenario(doc);
    } catch (const ConfigError& e) {
      return e.what();
    }
    return "";
  };
  CHECK(message("[loads]\nbogus = 1\n").find("bogus") != std::string::npos);
  CHECK(message("[nonsense]\nx = 1\n").find("nonsense") != std::string::npos);
  CHECK(message("[loads]\nn = abc\n").find("[loads] n") != std::string::npos);
  CHECK(message("[loads]\nn = 3\nq = 1, 2\n").find("q") != std::string::npos);
  CHECK(message("[loads]\nfamily = cubic\n").find("family") != std::string::npos);
  CHECK(message("[loads]\nn = 4\n[graph]\nedges = 1 2; 3 4\n").find("graph") != std::string::npos);
  CHECK(message("[plant]\ninterval_s = 0\n").find("plant") != std::string::npos);
  CHECK(message("[plant]\ndamping = 0\ndroop_enabled = false\n").find("plant") != std::string::npos);
  CHECK(message("[algorithm]\ngamma_exponent = 0.4\n").find("algorithm") != std::string::npos);
  CHECK(message("[algorithm]\nname = newton\n").find("name") != std::string::npos);
  CHECK(message("[run]\nticks = 10\nduration_s = 1\n").find("run") != std::string::npos);
  CHECK(message("[schedule]\ntimes_s = 0, 10\nlevels_mw = 200\n").find("schedule") != std::string::npos);
  CHECK(message("[loads]\nn = 2\nfamily = quadratic\na = 0.1, 0.1\n").find("dead band") != std::string::npos);
  CHECK_THROWS_AS(load_scenario("/nonexistent/file.ini"), ConfigError);
}

TEST_CASE("instance seed is separate from the noise seed") {
  const Scenario a = build_scenario(kSmall, ScenarioOverrides{1, std::nullopt});
  const Scenario b = with_seed(a, 2);
  CHECK(b.master_seed == 2);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.specs[i].q == b.specs[i].q);
  const auto ra = run(a), rb = run(b);
  CHECK(ra.trajectory.rows[50].freq_deviation != rb.trajectory.rows[50].freq_deviation);
}

TEST_CASE("quiet nominal operation stays at rest") {
  for (const char* algo : {"dgp", "dual", "none"}) {
    const std::string doc = std::string(R"(
[loads]
n = 6
family = quadratic
[noise]
process_std = 0
measurement_std = 0
[schedule]
times_s = 0
levels_mw = 200
[run]
ticks = 300
[algorithm]
name = )") + algo + "\n";
    const auto res = run(build_scenario(doc));
    REQUIRE_FALSE(res.failure.has_value());
    for (const auto& row : res.trajectory.rows) {
      CHECK(row.freq_deviation == 0.0);
      CHECK(row.u == 0.0);
      CHECK(row.total_load_deviation == 0.0);
    }
    for (double x : res.trajectory.final_x) CHECK(x == 0.0);
    CHECK(res.metrics.windows.size() == 1);
    CHECK(res.metrics.windows[0].nadir == 0.0);
    CHECK(res.metrics.windows[0].settling_time == 0.0);
  }
}

TEST_CASE("energy bookkeeping holds on every row") {
  const Scenario s = build_scenario(kSmall);
  const auto res = run(s, RunOptions{true, std::nullopt});
  REQUIRE(res.trajectory.loads.size() == res.trajectory.rows.size());
  for (std::size_t r = 0; r < res.trajectory.rows.size(); ++r) {
    const auto& row = res.trajectory.rows[r];
    CHECK(row.t == doctest::Approx(row.k * s.T()).epsilon(1e-15));
    CHECK(row.k == static_cast<long>(r));
    double sum = 0.0;
    for (double x : res.trajectory.loads[r]) sum += x;
    CHECK(row.generation == generation_at(s.schedule, row.k));
    CHECK(row.total_load_deviation == sum);
    CHECK(row.u == (row.generation - s.schedule.nominal_mw) - sum);
    CHECK(row.z == doctest::Approx(row.y + std::abs(row.u)).epsilon(1e-12));
  }
}

TEST_CASE("generator-only runs leave loads at zero") {
  const Scenario s = with_algorithm(build_scenario(kSmall), Algorithm::None);
  const auto res = run(s, RunOptions{true, std::nullopt});
  for (const auto& xs : res.trajectory.loads) {
    for (double x : xs) CHECK(x == 0.0);
  }
  CHECK(res.metrics.windows.size() == 2);
  CHECK(res.metrics.windows[0].nadir < 0.0);
}

TEST_CASE("identical output for any thread count") {
  Scenario s = build_scenario(kSmall);
  const auto one = run(s, RunOptions{std::nullopt, 1u});
  const auto four = run(s, RunOptions{std::nullopt, 4u});
  CHECK(csv_of(one) == csv_of(four));
  const auto again = run(s, RunOptions{std::nullopt, 1u});
  CHECK(csv_of(one) == csv_of(again));

  Scenario d = with_algorithm(s, Algorithm::Dual);
  CHECK(csv_of(run(d, RunOptions{std::nullopt, 1u})) == csv_of(run(d, RunOptions{std::nullopt, 3u})));
}

TEST_CASE("perfect estimates reproduce the dense update") {
  const std::string doc = std::string(kSmall) + "[noise]\nprocess_std = 0\nmeasurement_std = 0\nperfect_estimate = true\n";
  const Scenario s = build_scenario(doc);
  const auto res = run(s, RunOptions{true, std::nullopt});
  REQUIRE_FALSE(res.failure.has_value());
  const std::size_t n = s.size();
  const Eigen::MatrixXd L = ref::band_laplacian(n, 2);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  double worst = 0.0;
  for (std::size_t r = 0; r < res.trajectory.rows.size(); ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(res.trajectory.loads[r][i] - x(static_cast<Eigen::Index>(i))));
    }
    const double u = res.trajectory.rows[r].u;
    const auto steps = step_sizes(s.steps, static_cast<long>(r));
    x = ref::dense_dgp_step(s.specs, L, x, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), u), steps.alpha,
                            steps.gamma);
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("metrics of synthetic trajectories") {
  const Scenario s = build_scenario(kSmall);
  Trajectory flat;
  for (long k = 0; k < 200; ++k) flat.rows.push_back(TrajectoryRecord{k, k * 0.1});
  flat.final_x.assign(s.size(), 0.0);
  auto m = compute_metrics(flat, s);
  REQUIRE(m.windows.size() == 2);
  CHECK(m.windows[0].start_tick == 50);
  CHECK(m.windows[0].end_tick == 120);
  CHECK(m.windows[1].end_tick == 200);
  for (const auto& w : m.windows) {
    CHECK(w.nadir == 0.0);
    CHECK(w.settling_time == 0.0);
  }

  Trajectory dip = flat;
  dip.rows[70].freq_deviation = -0.3;
  dip.rows[75].freq_deviation = 0.2;
  m = compute_metrics(dip, s);
  CHECK(m.windows[0].nadir == -0.3);
  CHECK(m.windows[0].settling_time == doctest::Approx(2.6));  // back in band from tick 76
  CHECK(m.windows[1].nadir == 0.0);

  Trajectory never = flat;
  never.rows.back().freq_deviation = -0.05;
  CHECK(std::isnan(compute_metrics(never, s).windows[1].settling_time));
}

TEST_CASE("low-noise quadratic run ends near the optimum") {
  const std::string doc = R"(
[loads]
n = 10
family = quadratic
seed = 3
[noise]
process_std = 0.01
[schedule]
times_s = 0, 10
levels_mw = 200, 196
[run]
duration_s = 3000
)";
  const auto res = run(build_scenario(doc));
  REQUIRE_FALSE(res.failure.has_value());
  CHECK(res.metrics.terminal_optimality_gap <= 5e-2);
}

TEST_CASE("trajectory csv layout") {
  const auto res = run(build_scenario(kSmall));
  const std::string csv = csv_of(res);
  const std::string header = csv.substr(0, csv.find('\n'));
  CHECK(header.rfind("k,t,freq_deviation_hz,u_mw,mean_u_hat_mw,total_disutility,y_mw,z_mw,generation_mw,"
                     "total_load_deviation_mw,x_1,",
                     0) == 0);
  CHECK(header.find("x_12") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(res.trajectory.rows.size()) + 1);

  const auto big = run(build_scenario("[loads]\nn = 40\n[run]\nticks = 5\n"));
  std::ostringstream out;
  write_trajectory_csv(out, big.trajectory);
  CHECK(out.str().find("x_1") == std::string::npos);
  const auto full = run(build_scenario("[loads]\nn = 40\n[run]\nticks = 5\n"), RunOptions{true, std::nullopt});
  std::ostringstream out2;
  write_trajectory_csv(out2, full.trajectory);
  CHECK(out2.str().find("x_40") != std::string::npos);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.0, 0.1, -1.0 / 3.0, 1e-300, 123456.789, -2.5e17}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(NAN) == "nan");
}

TEST_CASE("divergence is reported with its tick") {
  const char* doc = R"(
[loads]
n = 4
family = quadratic
[noise]
process_std = 1e300
[run]
ticks = 50
)";
  const auto res = run(build_scenario(doc));
  REQUIRE(res.failure.has_value());
  CHECK(res.failure->tick >= 0);
  CHECK(res.trajectory.rows.size() == static_cast<std::size_t>(res.failure->tick));
}
