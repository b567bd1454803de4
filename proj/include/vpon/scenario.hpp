#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "vpon/layout.hpp"
#include "vpon/optimizer.hpp"
#include "vpon/pon_sim.hpp"
#include "vpon/traffic_model.hpp"
#include "vpon/types.hpp"

namespace vpon {

struct SimSection {
  long long cycles = 100000;
  double warmup_frac = 0.1;
  ArrivalMode mode = ArrivalMode::PerCycleBatch;
  long long overload_queue_limit = 1000000;
};

struct FeasSection {
  int max71 = 8;
  int max72 = 8;
  double distance_km = 0.0;
};

struct ValidateSection {
  std::vector<std::pair<int, int>> grid;  // (n71, n72) mixes
  double distance_km = 0.0;
};

struct BenchSection {
  std::vector<int> iteration_grid{10, 40, 70};
  long long sim_cycles = 20000;
};

/// Everything a run needs, resolved: either an explicit layout or generator
/// parameters that were already expanded into one.
struct Scenario {
  Layout layout;
  std::optional<GeneratorParams> generator;  // set when layout was generated
  ChannelConfig channel{};
  LadderSet ladders{};
  int segment_bytes = 1500;
  double threshold_us = 100.0;
  std::vector<double> loads{0.1, 0.3, 0.6};
  int w = 0;  // 0: use channel.wavelengths
  int max_iterations = 10;
  std::vector<std::uint64_t> seeds{1};
  Costs costs{};
  double sigma_a2_s2 = 0.0;
  bool framing = true;
  SimSection sim{};
  FeasSection feasibility{};
  ValidateSection validate{};
  BenchSection benchmark{};
  SyntheticSliceParams ru_defaults{};

  int effective_w() const { return w > 0 ? w : channel.wavelengths; }
  LatencyOptions latency_options() const;
};

/// Parses a scenario JSON file. Unknown keys are rejected with the offending
/// path in the message. Relative layout paths resolve against the file's
/// directory.
Scenario load_scenario(const std::string& path);
Scenario scenario_from_json(const nlohmann::json& j, const std::string& base_dir);

}  // namespace vpon
