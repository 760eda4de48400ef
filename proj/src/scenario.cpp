#include "dgpsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dgpsim/error.hpp"
#include "dgpsim/estimator.hpp"

namespace dgpsim {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"plant",
       {"inertia", "damping", "governor_tau", "droop", "droop_enabled", "integral_gain", "nominal_hz",
        "interval_s"}},
      {"loads",
       {"n", "family", "seed", "box_total_mw", "xbar_raw_lo", "xbar_raw_hi", "inv_q_lo", "inv_q_hi",
        "deadband_fraction", "q", "box_lo", "box_hi", "a"}},
      {"graph", {"band", "edges", "edges_file"}},
      {"noise", {"process_std", "measurement_std", "perfect_estimate"}},
      {"schedule", {"nominal_mw", "times_s", "levels_mw"}},
      {"algorithm", {"name", "c", "gamma0", "gamma_exponent", "reset_gamma_on_step"}},
      {"run", {"duration_s", "ticks", "seed", "threads", "settle_band_hz"}},
  };
  return keys;
}

// Typed, field-aware access to the parsed document.
class ConfigReader {
 public:
  explicit ConfigReader(pt::ptree tree) : tree_(std::move(tree)) {
    for (const auto& [section, body] : tree_) {
      const auto it = allowed_keys().find(section);
      if (it == allowed_keys().end()) throw ConfigError("unknown section [" + section + "]");
      if (!body.data().empty()) throw ConfigError("key '" + section + "' appears outside any section");
      for (const auto& [key, value] : body) {
        if (!it->second.count(key)) throw ConfigError("[" + section + "] unknown key '" + key + "'");
      }
    }
  }

  bool has(const std::string& section, const std::string& key) const {
    return tree_.get_child_optional(pt::ptree::path_type(section + "." + key, '.')).has_value();
  }

  std::string text(const std::string& section, const std::string& key, const std::string& fallback) const {
    auto v = tree_.get_optional<std::string>(pt::ptree::path_type(section + "." + key, '.'));
    return v ? trim(*v) : fallback;
  }

  double number(const std::string& section, const std::string& key, double fallback) const {
    if (!has(section, key)) return fallback;
    return parse_number(section, key, text(section, key, ""));
  }

  long integer(const std::string& section, const std::string& key, long fallback) const {
    if (!has(section, key)) return fallback;
    const std::string raw = text(section, key, "");
    std::size_t used = 0;
    long value = 0;
    try {
      value = std::stol(raw, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != raw.size() || raw.empty()) fail(section, key, "expected an integer, got '" + raw + "'");
    return value;
  }

  bool boolean(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string raw = text(section, key, "");
    if (raw == "true" || raw == "1" || raw == "yes") return true;
    if (raw == "false" || raw == "0" || raw == "no") return false;
    fail(section, key, "expected true/false, got '" + raw + "'");
  }

  std::vector<double> numbers(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    std::string raw = text(section, key, "");
    std::replace(raw.begin(), raw.end(), ',', ' ');
    std::istringstream in(raw);
    std::string token;
    while (in >> token) out.push_back(parse_number(section, key, token));
    return out;
  }

  [[noreturn]] static void fail(const std::string& section, const std::string& key, const std::string& why) {
    throw ConfigError("[" + section + "] " + key + ": " + why);
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\"");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\"");
    return s.substr(b, e - b + 1);
  }

  static double parse_number(const std::string& section, const std::string& key, const std::string& raw) {
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(raw, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != raw.size() || raw.empty() || !std::isfinite(value)) {
      fail(section, key, "expected a number, got '" + raw + "'");
    }
    return value;
  }

  pt::ptree tree_;
};

std::vector<DisutilitySpec> build_loads(const ConfigReader& cfg, std::uint64_t run_seed) {
  const Family family = [&] {
    try {
      return family_from_string(cfg.text("loads", "family", "flat_quadratic"));
    } catch (const InvalidParam& e) {
      ConfigReader::fail("loads", "family", e.what());
    }
  }();
  const auto seed = static_cast<std::uint64_t>(cfg.integer("loads", "seed", static_cast<long>(run_seed)));
  std::vector<double> q = cfg.numbers("loads", "q");
  std::vector<double> box_hi = cfg.numbers("loads", "box_hi");
  std::vector<double> box_lo = cfg.numbers("loads", "box_lo");
  std::vector<double> a = cfg.numbers("loads", "a");

  long n_cfg = cfg.integer("loads", "n", -1);
  std::size_t n = 0;
  if (n_cfg >= 0) {
    n = static_cast<std::size_t>(n_cfg);
  } else if (!q.empty()) {
    n = q.size();
  } else if (!box_hi.empty()) {
    n = box_hi.size();
  } else {
    n = 1000;
  }
  if (n < 1) ConfigReader::fail("loads", "n", "need at least one load");
  auto check_len = [&](const std::vector<double>& v, const char* key) {
    if (!v.empty() && v.size() != n) {
      ConfigReader::fail("loads", key, "expected " + std::to_string(n) + " values, got " + std::to_string(v.size()));
    }
  };
  check_len(q, "q");
  check_len(box_hi, "box_hi");
  check_len(box_lo, "box_lo");
  check_len(a, "a");
  if (family == Family::Quadratic && !a.empty()) {
    ConfigReader::fail("loads", "a", "quadratic loads have no dead band");
  }

  if (box_hi.empty()) {
    const double total = cfg.number("loads", "box_total_mw", 60.0);
    const double lo = cfg.number("loads", "xbar_raw_lo", 0.5);
    const double hi = cfg.number("loads", "xbar_raw_hi", 1.5);
    if (!(total > 0.0)) ConfigReader::fail("loads", "box_total_mw", "must be > 0");
    if (!(lo > 0.0 && lo <= hi)) ConfigReader::fail("loads", "xbar_raw_lo", "need 0 < xbar_raw_lo <= xbar_raw_hi");
    auto rng = make_stream(seed, StreamPurpose::BoxSizes);
    std::uniform_real_distribution<double> dist(lo, hi);
    double raw_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      box_hi.push_back(dist(rng));
      raw_sum += box_hi.back();
    }
    for (double& x : box_hi) x *= total / raw_sum;
  }
  if (box_lo.empty()) {
    for (double hi : box_hi) box_lo.push_back(-hi);
  }
  if (q.empty()) {
    const double lo = cfg.number("loads", "inv_q_lo", 0.1);
    const double hi = cfg.number("loads", "inv_q_hi", 0.3);
    if (!(lo > 0.0 && lo <= hi)) ConfigReader::fail("loads", "inv_q_lo", "need 0 < inv_q_lo <= inv_q_hi");
    auto rng = make_stream(seed, StreamPurpose::Curvatures);
    std::uniform_real_distribution<double> dist(lo, hi);
    for (std::size_t i = 0; i < n; ++i) q.push_back(1.0 / dist(rng));
  }
  if (family == Family::FlatQuadratic && a.empty()) {
    const double fraction = cfg.number("loads", "deadband_fraction", 0.1);
    if (!(fraction >= 0.0 && fraction < 1.0)) ConfigReader::fail("loads", "deadband_fraction", "must be in [0, 1)");
    for (double hi : box_hi) a.push_back(fraction * hi);
  }

  std::vector<DisutilitySpec> specs;
  for (std::size_t i = 0; i < n; ++i) {
    DisutilitySpec s{family, q[i], family == Family::FlatQuadratic ? a[i] : 0.0, box_lo[i], box_hi[i]};
    try {
      validate(s);
    } catch (const InvalidParam& e) {
      throw ConfigError("[loads] load " + std::to_string(i + 1) + ": " + e.what());
    }
    specs.push_back(s);
  }
  return specs;
}

std::vector<Edge> parse_inline_edges(const std::string& raw) {
  std::string text = raw;
  std::replace(text.begin(), text.end(), ';', '\n');
  std::replace(text.begin(), text.end(), ',', '\n');
  std::istringstream in(text);
  return parse_edge_list(in);
}

GraphTopology build_graph(const ConfigReader& cfg, std::size_t n, const std::filesystem::path& base_dir,
                          std::size_t& half_width) {
  const bool inline_edges = cfg.has("graph", "edges");
  const bool file_edges = cfg.has("graph", "edges_file");
  if (inline_edges && file_edges) ConfigReader::fail("graph", "edges", "give either edges or edges_file");
  try {
    if (inline_edges || file_edges) {
      if (cfg.has("graph", "band")) ConfigReader::fail("graph", "band", "cannot combine band with an edge list");
      half_width = 0;
      std::vector<Edge> edges;
      if (inline_edges) {
        edges = parse_inline_edges(cfg.text("graph", "edges", ""));
      } else {
        std::filesystem::path path = cfg.text("graph", "edges_file", "");
        if (path.is_relative()) path = base_dir / path;
        edges = read_edge_list(path);
      }
      return GraphTopology::from_edges(n, edges);
    }
    const long band = cfg.integer("graph", "band", 1);
    if (band < 1) ConfigReader::fail("graph", "band", "must be >= 1");
    half_width = static_cast<std::size_t>(band);
    return band_graph(n, std::min(half_width, n));
  } catch (const InvalidParam& e) {
    throw ConfigError(std::string("[graph] ") + e.what());
  }
}

void check_algorithm(const Scenario& s) {
  if (s.algorithm != Algorithm::Dual) return;
  for (std::size_t i = 0; i < s.specs.size(); ++i) {
    if (!s.specs[i].strictly_convex()) {
      throw DualNeedsStrictConvexity("the dual algorithm needs strictly convex disutilities; load " +
                                     std::to_string(i + 1) + " is " + std::string(to_string(s.specs[i].family)));
    }
  }
}

}  // namespace

std::string_view to_string(Algorithm algorithm) noexcept {
  switch (algorithm) {
    case Algorithm::Dgp:
      return "dgp";
    case Algorithm::Dual:
      return "dual";
    case Algorithm::None:
      return "none";
  }
  return "unknown";
}

Algorithm algorithm_from_string(std::string_view name) {
  if (name == "dgp") return Algorithm::Dgp;
  if (name == "dual") return Algorithm::Dual;
  if (name == "none") return Algorithm::None;
  throw ConfigError("unknown algorithm '" + std::string(name) + "' (expected dgp, dual or none)");
}

std::mt19937_64 make_stream(std::uint64_t master_seed, StreamPurpose purpose, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(purpose), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

Scenario build_scenario(std::string_view config_doc, const ScenarioOverrides& overrides,
                        const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(config_doc)};
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  const ConfigReader cfg(std::move(tree));

  Scenario s;
  s.source_doc = std::string(config_doc);
  s.base_dir = base_dir;
  s.master_seed = overrides.seed.value_or(static_cast<std::uint64_t>(cfg.integer("run", "seed", 1)));

  s.specs = build_loads(cfg, s.master_seed);
  s.topology = build_graph(cfg, s.specs.size(), base_dir, s.band_half_width);

  PlantParams& p = s.plant_params;
  p.inertia = cfg.number("plant", "inertia", p.inertia);
  p.damping = cfg.number("plant", "damping", p.damping);
  p.governor_tau = cfg.number("plant", "governor_tau", p.governor_tau);
  p.droop = cfg.number("plant", "droop", *p.droop);
  if (!cfg.boolean("plant", "droop_enabled", true)) p.droop.reset();
  p.integral_gain = cfg.number("plant", "integral_gain", p.integral_gain);
  p.nominal_hz = cfg.number("plant", "nominal_hz", p.nominal_hz);
  const double T = cfg.number("plant", "interval_s", 0.1);

  s.noise.process_std = cfg.number("noise", "process_std", s.noise.process_std);
  s.noise.measurement_std = cfg.number("noise", "measurement_std", s.noise.measurement_std);
  s.noise.perfect_estimate = cfg.boolean("noise", "perfect_estimate", false);
  if (!(s.noise.process_std >= 0.0)) ConfigReader::fail("noise", "process_std", "must be >= 0");
  if (!(s.noise.measurement_std >= 0.0)) ConfigReader::fail("noise", "measurement_std", "must be >= 0");

  try {
    s.plant = build_plant(p, T, s.noise.process_std);
  } catch (const Error& e) {
    throw ConfigError(std::string("[plant] ") + e.what());
  }
  if (!s.noise.perfect_estimate && !check_prop1(s.plant)) {
    throw ConfigError("[plant] input-decoupled observer dynamics are not stable; the estimator cannot run");
  }

  std::vector<double> times = cfg.numbers("schedule", "times_s");
  std::vector<double> levels = cfg.numbers("schedule", "levels_mw");
  if (times.empty() && levels.empty()) {
    times = {0.0, 20.0, 50.0};
    levels = {200.0, 190.0, 170.0};
  }
  try {
    s.schedule = schedule_from_seconds(times, levels, cfg.number("schedule", "nominal_mw", 200.0), T);
  } catch (const InvalidParam& e) {
    throw ConfigError(std::string("[schedule] ") + e.what());
  }

  if (overrides.algorithm) {
    s.algorithm = *overrides.algorithm;
  } else {
    try {
      s.algorithm = algorithm_from_string(cfg.text("algorithm", "name", "dgp"));
    } catch (const ConfigError& e) {
      ConfigReader::fail("algorithm", "name", e.what());
    }
  }
  s.steps.c = cfg.number("algorithm", "c", 5.0);
  s.steps.exponent = cfg.number("algorithm", "gamma_exponent", 0.8);
  const std::string gamma0 = cfg.text("algorithm", "gamma0", "auto");
  s.steps.gamma0 = gamma0 == "auto" ? default_gamma0(s.specs) : cfg.number("algorithm", "gamma0", 0.0);
  s.reset_gamma_on_step = cfg.boolean("algorithm", "reset_gamma_on_step", false);
  try {
    s.steps.validate();
  } catch (const InvalidParam& e) {
    throw ConfigError(std::string("[algorithm] ") + e.what());
  }

  if (cfg.has("run", "ticks") && cfg.has("run", "duration_s")) {
    ConfigReader::fail("run", "ticks", "give either ticks or duration_s");
  }
  s.ticks = cfg.has("run", "ticks") ? cfg.integer("run", "ticks", 0)
                                    : std::lround(cfg.number("run", "duration_s", 100.0) / T);
  if (s.ticks < 1) ConfigReader::fail("run", "ticks", "must be >= 1");
  const long threads = cfg.integer("run", "threads", 1);
  if (threads < 1) ConfigReader::fail("run", "threads", "must be >= 1");
  s.threads = static_cast<unsigned>(threads);
  s.settle_band_hz = cfg.number("run", "settle_band_hz", 0.01);
  if (!(s.settle_band_hz > 0.0)) ConfigReader::fail("run", "settle_band_hz", "must be > 0");

  check_algorithm(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path, const ScenarioOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return build_scenario(buf.str(), overrides, path.parent_path());
}

Scenario with_algorithm(Scenario scenario, Algorithm algorithm) {
  scenario.algorithm = algorithm;
  check_algorithm(scenario);
  return scenario;
}

Scenario with_seed(const Scenario& scenario, std::uint64_t seed) {
  Scenario rebuilt = build_scenario(scenario.source_doc, ScenarioOverrides{seed, scenario.algorithm},
                                    scenario.base_dir);
  rebuilt.threads = scenario.threads;
  return rebuilt;
}

}  // namespace dgpsim
