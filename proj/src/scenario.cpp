#include "vpon/scenario.hpp"

#include <filesystem>
#include <fstream>

#include "json_util.hpp"
#include "vpon/layout_json.hpp"

namespace vpon {

using nlohmann::json;
using namespace detail;

namespace {

ChannelConfig parse_channel(const json& j) {
  check_keys(j, "channel", {"line_rate_bps", "gc_s", "wavelengths", "fiber_delay_us_per_km"});
  ChannelConfig ch;
  if (j.contains("line_rate_bps"))
    ch.line_rate_bps = as_double(j.at("line_rate_bps"), "channel.line_rate_bps");
  if (j.contains("gc_s")) ch.gc_s = as_double(j.at("gc_s"), "channel.gc_s");
  if (j.contains("wavelengths")) ch.wavelengths = as_int(j.at("wavelengths"), "channel.wavelengths");
  if (j.contains("fiber_delay_us_per_km"))
    ch.fiber_delay_us_per_km =
        as_double(j.at("fiber_delay_us_per_km"), "channel.fiber_delay_us_per_km");
  try {
    ch.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return ch;
}

RateLadder parse_ladder(const json& j, const std::string& path) {
  check_keys(j, path, {"thresholds", "rates_bps"});
  const json& th = require(j, path, "thresholds");
  const json& ra = require(j, path, "rates_bps");
  if (!th.is_array() || !ra.is_array())
    throw ConfigError("config: " + path + " thresholds/rates_bps must be arrays");
  RateLadder ladder;
  for (std::size_t i = 0; i < th.size(); ++i)
    ladder.thresholds.push_back(as_int(th.at(i), path + ".thresholds[" + std::to_string(i) + "]"));
  for (std::size_t i = 0; i < ra.size(); ++i)
    ladder.rates_bps.push_back(as_double(ra.at(i), path + ".rates_bps[" + std::to_string(i) + "]"));
  return ladder;
}

GeneratorParams parse_generator(const json& j) {
  check_keys(j, "generator",
             {"seed", "n_macro", "smalls_per_macro_mean", "area", "min_separation_km",
              "split71_fraction", "m", "gamma", "nu", "detour"});
  GeneratorParams g;
  if (j.contains("seed")) g.seed = static_cast<std::uint64_t>(as_int64(j.at("seed"), "generator.seed"));
  if (j.contains("n_macro")) g.n_macro = as_int(j.at("n_macro"), "generator.n_macro");
  if (j.contains("smalls_per_macro_mean"))
    g.smalls_per_macro_mean =
        as_double(j.at("smalls_per_macro_mean"), "generator.smalls_per_macro_mean");
  if (j.contains("area")) {
    const json& a = j.at("area");
    check_keys(a, "generator.area", {"width", "height"});
    g.area.width = as_double(require(a, "generator.area", "width"), "generator.area.width");
    g.area.height = as_double(require(a, "generator.area", "height"), "generator.area.height");
  }
  if (j.contains("min_separation_km"))
    g.min_separation_km = as_double(j.at("min_separation_km"), "generator.min_separation_km");
  if (j.contains("split71_fraction"))
    g.split71_fraction = as_double(j.at("split71_fraction"), "generator.split71_fraction");
  if (j.contains("m")) g.m = as_int(j.at("m"), "generator.m");
  if (j.contains("gamma")) g.gamma = as_double(j.at("gamma"), "generator.gamma");
  if (j.contains("nu")) g.nu = as_double(j.at("nu"), "generator.nu");
  if (j.contains("detour")) g.detour = as_double(j.at("detour"), "generator.detour");
  return g;
}

std::vector<std::pair<int, int>> parse_grid(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError("config: " + path + " must be an array of [n71, n72]");
  std::vector<std::pair<int, int>> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& cell = j.at(i);
    std::string p = path + "[" + std::to_string(i) + "]";
    if (!cell.is_array() || cell.size() != 2)
      throw ConfigError("config: " + p + " must be a pair [n71, n72]");
    out.push_back({as_int(cell.at(0), p + "[0]"), as_int(cell.at(1), p + "[1]")});
  }
  return out;
}

}  // namespace

LatencyOptions Scenario::latency_options() const {
  LatencyOptions opts;
  opts.segment_bytes = segment_bytes;
  opts.sigma_a2_s2 = sigma_a2_s2;
  opts.framing = framing;
  return opts;
}

Scenario scenario_from_json(const json& j, const std::string& base_dir) {
  check_keys(j, "scenario",
             {"layout", "layout_file", "generator", "channel", "ladders", "segment_bytes",
              "threshold_us", "loads", "w", "max_iterations", "seeds", "costs", "sigma_a2_s2",
              "framing", "sim", "feasibility", "validate", "benchmark", "ru_defaults"});

  Scenario sc;
  int layout_sources = static_cast<int>(j.contains("layout")) +
                       static_cast<int>(j.contains("layout_file")) +
                       static_cast<int>(j.contains("generator"));
  if (layout_sources != 1)
    throw ConfigError("config: exactly one of layout, layout_file, generator is required");
  if (j.contains("layout")) {
    sc.layout = layout_from_json(j.at("layout"));
  } else if (j.contains("layout_file")) {
    std::filesystem::path p = as_string(j.at("layout_file"), "scenario.layout_file");
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    sc.layout = load_layout(p.string());
  } else {
    sc.generator = parse_generator(j.at("generator"));
    try {
      sc.layout = generate_layout(*sc.generator);
    } catch (const ParameterError& e) {
      throw ConfigError(std::string("config: generator: ") + e.what());
    }
  }

  if (j.contains("channel")) sc.channel = parse_channel(j.at("channel"));
  if (j.contains("ladders")) {
    const json& lj = j.at("ladders");
    check_keys(lj, "ladders", {"7.1", "7.2"});
    if (lj.contains("7.1")) sc.ladders.s71 = parse_ladder(lj.at("7.1"), "ladders.7.1");
    if (lj.contains("7.2")) sc.ladders.s72 = parse_ladder(lj.at("7.2"), "ladders.7.2");
  }
  if (j.contains("segment_bytes"))
    sc.segment_bytes = as_int(j.at("segment_bytes"), "scenario.segment_bytes");
  if (j.contains("threshold_us"))
    sc.threshold_us = as_double(j.at("threshold_us"), "scenario.threshold_us");
  if (j.contains("loads")) {
    const json& lj = j.at("loads");
    if (!lj.is_array()) throw ConfigError("config: loads must be an array");
    sc.loads.clear();
    for (std::size_t i = 0; i < lj.size(); ++i) {
      double v = as_double(lj.at(i), "loads[" + std::to_string(i) + "]");
      if (!(v >= 0.0) || !(v <= 1.0))
        throw ConfigError("config: loads[" + std::to_string(i) + "] must lie in [0, 1]");
      sc.loads.push_back(v);
    }
    if (sc.loads.empty()) throw ConfigError("config: loads must not be empty");
  }
  if (j.contains("w")) sc.w = as_int(j.at("w"), "scenario.w");
  if (j.contains("max_iterations"))
    sc.max_iterations = as_int(j.at("max_iterations"), "scenario.max_iterations");
  if (j.contains("seeds")) {
    const json& sj = j.at("seeds");
    if (!sj.is_array()) throw ConfigError("config: seeds must be an array");
    sc.seeds.clear();
    for (std::size_t i = 0; i < sj.size(); ++i)
      sc.seeds.push_back(
          static_cast<std::uint64_t>(as_int64(sj.at(i), "seeds[" + std::to_string(i) + "]")));
    if (sc.seeds.empty()) throw ConfigError("config: seeds must not be empty");
  }
  if (j.contains("costs")) {
    const json& cj = j.at("costs");
    check_keys(cj, "costs", {"c_cap", "c_olt"});
    if (cj.contains("c_cap")) sc.costs.c_cap = as_double(cj.at("c_cap"), "costs.c_cap");
    if (cj.contains("c_olt")) sc.costs.c_olt = as_double(cj.at("c_olt"), "costs.c_olt");
  }
  if (j.contains("sigma_a2_s2"))
    sc.sigma_a2_s2 = as_double(j.at("sigma_a2_s2"), "scenario.sigma_a2_s2");
  if (j.contains("framing")) sc.framing = as_bool(j.at("framing"), "scenario.framing");

  if (j.contains("sim")) {
    const json& sj = j.at("sim");
    check_keys(sj, "sim", {"cycles", "warmup_frac", "mode", "overload_queue_limit"});
    if (sj.contains("cycles")) sc.sim.cycles = as_int64(sj.at("cycles"), "sim.cycles");
    if (sj.contains("warmup_frac"))
      sc.sim.warmup_frac = as_double(sj.at("warmup_frac"), "sim.warmup_frac");
    if (sj.contains("mode")) {
      std::string mode = as_string(sj.at("mode"), "sim.mode");
      if (mode == "batch")
        sc.sim.mode = ArrivalMode::PerCycleBatch;
      else if (mode == "poisson")
        sc.sim.mode = ArrivalMode::Poisson;
      else
        throw ConfigError("config: sim.mode must be batch or poisson");
    }
    if (sj.contains("overload_queue_limit"))
      sc.sim.overload_queue_limit =
          as_int64(sj.at("overload_queue_limit"), "sim.overload_queue_limit");
  }
  if (j.contains("feasibility")) {
    const json& fj = j.at("feasibility");
    check_keys(fj, "feasibility", {"max71", "max72", "distance_km"});
    if (fj.contains("max71")) sc.feasibility.max71 = as_int(fj.at("max71"), "feasibility.max71");
    if (fj.contains("max72")) sc.feasibility.max72 = as_int(fj.at("max72"), "feasibility.max72");
    if (fj.contains("distance_km"))
      sc.feasibility.distance_km = as_double(fj.at("distance_km"), "feasibility.distance_km");
  }
  if (j.contains("validate")) {
    const json& vj = j.at("validate");
    check_keys(vj, "validate", {"grid", "distance_km"});
    if (vj.contains("grid")) sc.validate.grid = parse_grid(vj.at("grid"), "validate.grid");
    if (vj.contains("distance_km"))
      sc.validate.distance_km = as_double(vj.at("distance_km"), "validate.distance_km");
  }
  if (sc.validate.grid.empty())
    sc.validate.grid = {{1, 0}, {0, 1}, {1, 1}, {2, 2}, {4, 4}};
  if (j.contains("benchmark")) {
    const json& bj = j.at("benchmark");
    check_keys(bj, "benchmark", {"iteration_grid", "sim_cycles"});
    if (bj.contains("iteration_grid")) {
      const json& ij = bj.at("iteration_grid");
      if (!ij.is_array()) throw ConfigError("config: benchmark.iteration_grid must be an array");
      sc.benchmark.iteration_grid.clear();
      for (std::size_t i = 0; i < ij.size(); ++i)
        sc.benchmark.iteration_grid.push_back(
            as_int(ij.at(i), "benchmark.iteration_grid[" + std::to_string(i) + "]"));
      if (sc.benchmark.iteration_grid.empty())
        throw ConfigError("config: benchmark.iteration_grid must not be empty");
    }
    if (bj.contains("sim_cycles"))
      sc.benchmark.sim_cycles = as_int64(bj.at("sim_cycles"), "benchmark.sim_cycles");
  }
  if (j.contains("ru_defaults")) {
    const json& rj = j.at("ru_defaults");
    check_keys(rj, "ru_defaults", {"m", "gamma", "nu"});
    if (rj.contains("m")) sc.ru_defaults.m = as_int(rj.at("m"), "ru_defaults.m");
    if (rj.contains("gamma")) sc.ru_defaults.gamma = as_double(rj.at("gamma"), "ru_defaults.gamma");
    if (rj.contains("nu")) sc.ru_defaults.nu = as_double(rj.at("nu"), "ru_defaults.nu");
  }

  if (sc.segment_bytes <= 0) throw ConfigError("config: segment_bytes must be > 0");
  if (!(sc.threshold_us > 0.0)) throw ConfigError("config: threshold_us must be > 0");
  if (sc.max_iterations < 1) throw ConfigError("config: max_iterations must be >= 1");
  if (sc.w < 0) throw ConfigError("config: w must be >= 1 (or omitted)");
  if (sc.sim.cycles < 1) throw ConfigError("config: sim.cycles must be >= 1");
  if (!(sc.sim.warmup_frac >= 0.0) || !(sc.sim.warmup_frac < 1.0))
    throw ConfigError("config: sim.warmup_frac must lie in [0, 1)");
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("scenario file " + path + ": " + e.what());
  }
  std::string base = std::filesystem::path(path).parent_path().string();
  if (base.empty()) base = ".";
  return scenario_from_json(j, base);
}

}  // namespace vpon
