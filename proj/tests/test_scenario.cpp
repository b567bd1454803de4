#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "vpon/errors.hpp"
#include "vpon/layout_json.hpp"
#include "vpon/scenario.hpp"

using namespace vpon;
using nlohmann::json;

namespace {

json generator_block() {
  return json{{"seed", 5},
              {"n_macro", 3},
              {"smalls_per_macro_mean", 3.0},
              {"area", {{"width", 4.0}, {"height", 4.0}}}};
}

std::string write_temp(const std::string& name, const std::string& body) {
  std::string path = "/tmp/" + name;
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("a full scenario document parses into every section") {
  json doc = {
      {"generator", generator_block()},
      {"channel",
       {{"line_rate_bps", 25e9}, {"gc_s", 250e-6}, {"wavelengths", 2},
        {"fiber_delay_us_per_km", 4.9}}},
      {"ladders",
       {{"7.2", {{"thresholds", {16, 32}}, {"rates_bps", {3e8, 2.9e9}}}}}},
      {"segment_bytes", 1000},
      {"threshold_us", 150.0},
      {"loads", {0.2, 0.4}},
      {"w", 3},
      {"max_iterations", 25},
      {"seeds", {7, 8}},
      {"costs", {{"c_cap", 2.0}, {"c_olt", 0.5}}},
      {"sigma_a2_s2", 1e-12},
      {"framing", false},
      {"sim",
       {{"cycles", 5000}, {"warmup_frac", 0.2}, {"mode", "poisson"},
        {"overload_queue_limit", 777}}},
      {"feasibility", {{"max71", 3}, {"max72", 5}, {"distance_km", 1.5}}},
      {"validate", {{"grid", {{1, 0}, {2, 2}}}, {"distance_km", 0.5}}},
      {"benchmark", {{"iteration_grid", {5, 15}}, {"sim_cycles", 4000}}},
      {"ru_defaults", {{"m", 16}, {"gamma", 16.0}, {"nu", 2.0}}},
  };
  Scenario sc = scenario_from_json(doc, "/tmp");
  CHECK(sc.layout.n_trees() == 3);
  CHECK(sc.layout.n_rus() == 9);
  REQUIRE(sc.generator.has_value());
  CHECK(sc.generator->seed == 5);
  CHECK(sc.channel.line_rate_bps == 25e9);
  CHECK(sc.channel.gc_s == 250e-6);
  CHECK(sc.channel.wavelengths == 2);
  REQUIRE(sc.ladders.s72.has_value());
  CHECK_FALSE(sc.ladders.s71.has_value());
  CHECK(sc.ladders.s72->thresholds == std::vector<int>{16, 32});
  CHECK(sc.segment_bytes == 1000);
  CHECK(sc.threshold_us == 150.0);
  CHECK(sc.loads == std::vector<double>{0.2, 0.4});
  CHECK(sc.w == 3);
  CHECK(sc.effective_w() == 3);
  CHECK(sc.max_iterations == 25);
  CHECK(sc.seeds == std::vector<std::uint64_t>{7, 8});
  CHECK(sc.costs.c_cap == 2.0);
  CHECK(sc.costs.c_olt == 0.5);
  CHECK(sc.sigma_a2_s2 == 1e-12);
  CHECK_FALSE(sc.framing);
  CHECK(sc.latency_options().framing == false);
  CHECK(sc.latency_options().segment_bytes == 1000);
  CHECK(sc.sim.cycles == 5000);
  CHECK(sc.sim.warmup_frac == 0.2);
  CHECK(sc.sim.mode == ArrivalMode::Poisson);
  CHECK(sc.sim.overload_queue_limit == 777);
  CHECK(sc.feasibility.max71 == 3);
  CHECK(sc.feasibility.max72 == 5);
  CHECK(sc.feasibility.distance_km == 1.5);
  REQUIRE(sc.validate.grid.size() == 2u);
  CHECK(sc.validate.grid[1] == std::pair<int, int>{2, 2});
  CHECK(sc.validate.distance_km == 0.5);
  CHECK(sc.benchmark.iteration_grid == std::vector<int>{5, 15});
  CHECK(sc.benchmark.sim_cycles == 4000);
  CHECK(sc.ru_defaults.m == 16);
  CHECK(sc.ru_defaults.nu == 2.0);
}

TEST_CASE("defaults cover everything but the layout") {
  json doc = {{"generator", generator_block()}};
  Scenario sc = scenario_from_json(doc, "/tmp");
  CHECK(sc.threshold_us == 100.0);
  CHECK(sc.loads == std::vector<double>{0.1, 0.3, 0.6});
  CHECK(sc.w == 0);
  CHECK(sc.effective_w() == 4);  // channel default wavelengths
  CHECK(sc.max_iterations == 10);
  CHECK(sc.seeds == std::vector<std::uint64_t>{1});
  CHECK(sc.segment_bytes == 1500);
  CHECK(sc.framing);
  CHECK(sc.sim.cycles == 100000);
  CHECK(sc.sim.mode == ArrivalMode::PerCycleBatch);
  CHECK(sc.feasibility.max71 == 8);
  CHECK(sc.benchmark.iteration_grid == std::vector<int>{10, 40, 70});
  // Default validation mixes: the four axes plus the square corners.
  REQUIRE(sc.validate.grid.size() == 5u);
  CHECK(sc.validate.grid[0] == std::pair<int, int>{1, 0});
  CHECK(sc.validate.grid[4] == std::pair<int, int>{4, 4});
}

TEST_CASE("unknown keys are rejected with their full path") {
  json doc = {{"generator", generator_block()}, {"thresold_us", 90.0}};
  CHECK_THROWS_WITH_AS(scenario_from_json(doc, "/tmp"),
                       doctest::Contains("thresold_us"), ConfigError);

  json nested = {{"generator", generator_block()},
                 {"sim", {{"cycles", 100}, {"warmup", 0.1}}}};
  CHECK_THROWS_WITH_AS(scenario_from_json(nested, "/tmp"),
                       doctest::Contains("sim.warmup"), ConfigError);

  json deep = {{"generator", generator_block()},
               {"channel", {{"gc", 125e-6}}}};
  CHECK_THROWS_WITH_AS(scenario_from_json(deep, "/tmp"),
                       doctest::Contains("channel.gc"), ConfigError);
}

TEST_CASE("exactly one layout source is required") {
  json none = {{"threshold_us", 90.0}};
  CHECK_THROWS_AS(scenario_from_json(none, "/tmp"), ConfigError);

  json both = {{"generator", generator_block()},
               {"layout_file", "whatever.json"}};
  CHECK_THROWS_AS(scenario_from_json(both, "/tmp"), ConfigError);
}

TEST_CASE("layout files resolve relative to the scenario directory") {
  GeneratorParams params;
  params.seed = 19;
  params.n_macro = 2;
  params.smalls_per_macro_mean = 2.0;
  Layout layout = generate_layout(params);
  save_layout(layout, "/tmp/vpon_sc_layout.json");

  json doc = {{"layout_file", "vpon_sc_layout.json"}};
  Scenario sc = scenario_from_json(doc, "/tmp");
  CHECK(sc.layout.n_rus() == layout.n_rus());
  CHECK_FALSE(sc.generator.has_value());

  std::string path = write_temp("vpon_sc_doc.json", doc.dump());
  Scenario from_file = load_scenario(path);
  CHECK(from_file.layout.n_trees() == layout.n_trees());
  std::remove(path.c_str());
  std::remove("/tmp/vpon_sc_layout.json");
}

TEST_CASE("inline layouts parse through the same schema as layout files") {
  GeneratorParams params;
  params.seed = 23;
  params.n_macro = 2;
  Layout layout = generate_layout(params);
  json doc = {{"layout", layout_to_json(layout)}};
  Scenario sc = scenario_from_json(doc, "/tmp");
  CHECK(sc.layout.n_rus() == layout.n_rus());
  CHECK(sc.layout.detour == layout.detour);
}

TEST_CASE("value errors carry the offending key") {
  json bad_mode = {{"generator", generator_block()},
                   {"sim", {{"mode", "bursty"}}}};
  CHECK_THROWS_WITH_AS(scenario_from_json(bad_mode, "/tmp"),
                       doctest::Contains("sim.mode"), ConfigError);

  json bad_load = {{"generator", generator_block()}, {"loads", {0.1, 1.7}}};
  CHECK_THROWS_AS(scenario_from_json(bad_load, "/tmp"), ConfigError);

  json empty_load = {{"generator", generator_block()}, {"loads", json::array()}};
  CHECK_THROWS_AS(scenario_from_json(empty_load, "/tmp"), ConfigError);

  json bad_type = {{"generator", generator_block()}, {"threshold_us", "fast"}};
  CHECK_THROWS_WITH_AS(scenario_from_json(bad_type, "/tmp"),
                       doctest::Contains("threshold_us"), ConfigError);

  json bad_grid = {{"generator", generator_block()},
                   {"validate", {{"grid", {{1, 2, 3}}}}}};
  CHECK_THROWS_AS(scenario_from_json(bad_grid, "/tmp"), ConfigError);
}

TEST_CASE("missing scenario files fail cleanly") {
  CHECK_THROWS_AS(load_scenario("/tmp/does_not_exist_vpon.json"), ConfigError);
  std::string path = write_temp("vpon_sc_bad.json", "{ not json");
  CHECK_THROWS_AS(load_scenario(path), ConfigError);
  std::remove(path.c_str());
}

TEST_CASE("explicit ladders are validated against the RU population") {
  // Ladder top threshold must match each member's m at use time.
  json doc = {{"generator", generator_block()},
              {"ladders",
               {{"7.1", {{"thresholds", {8, 20}}, {"rates_bps", {1e9, 7e9}}}}}}};
  Scenario sc = scenario_from_json(doc, "/tmp");
  REQUIRE(sc.ladders.s71.has_value());
  // Generator default m is 32; a 20-user top step cannot serve it.
  CHECK_THROWS_AS(sc.ladders.ladder_for(Split::S71, 32), ParameterError);
  CHECK(sc.ladders.ladder_for(Split::S72, 32).thresholds.back() == 32);
}
