#pragma once

// Scenario configuration: an INI document with the sections plant, loads,
// graph, noise, schedule, algorithm and run. Every key has a default, so an
// empty document describes the 1000-load contingency study. Unknown sections
// or keys are rejected. docs/config.md lists every key.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "dgpsim/dgp.hpp"
#include "dgpsim/disutility.hpp"
#include "dgpsim/graph.hpp"
#include "dgpsim/plant.hpp"

namespace dgpsim {

enum class Algorithm { Dgp, Dual, None };

std::string_view to_string(Algorithm algorithm) noexcept;
Algorithm algorithm_from_string(std::string_view name);

struct NoiseSettings {
  double process_std = 0.5;        // MW, on the plant input
  double measurement_std = 1e-4;   // Hz, independent per load
  bool perfect_estimate = false;   // bypass the observers: u_hat_i = u exactly
};

struct Scenario {
  std::vector<DisutilitySpec> specs;
  GraphTopology topology;
  std::size_t band_half_width = 0;  // 0 when the graph came from an edge list
  PlantParams plant_params;
  PlantModel plant;
  NoiseSettings noise;
  GenerationSchedule schedule;
  Algorithm algorithm = Algorithm::Dgp;
  StepSchedule steps;
  bool reset_gamma_on_step = false;
  long ticks = 0;
  std::uint64_t master_seed = 1;
  unsigned threads = 1;
  double settle_band_hz = 0.01;

  // Source document, kept so that seed overrides can re-sample the loads.
  std::string source_doc;
  std::filesystem::path base_dir;

  std::size_t size() const noexcept { return specs.size(); }
  double T() const noexcept { return plant.T; }
};

// Command-line style overrides applied on top of the document.
struct ScenarioOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<Algorithm> algorithm;
};

// Parses and validates a scenario. Throws ConfigError (field-level message) on
// malformed documents, DualNeedsStrictConvexity for the dual algorithm with
// flat-quadratic loads. Relative edge-list paths resolve against base_dir.
Scenario build_scenario(std::string_view config_doc, const ScenarioOverrides& overrides = {},
                        const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path, const ScenarioOverrides& overrides = {});

// Copy with a different algorithm, re-running the algorithm-dependent checks.
Scenario with_algorithm(Scenario scenario, Algorithm algorithm);
// Rebuilds from the source document with another run seed. Loads are
// re-sampled unless the document pins [loads] seed.
Scenario with_seed(const Scenario& scenario, std::uint64_t seed);

// Independent random stream for (master seed, purpose, index).
enum class StreamPurpose : std::uint32_t { BoxSizes = 1, Curvatures = 2, ProcessNoise = 3, MeasurementNoise = 4 };
std::mt19937_64 make_stream(std::uint64_t master_seed, StreamPurpose purpose, std::uint64_t index = 0);

}  // namespace dgpsim
