#pragma once

#include <cstdint>
#include <vector>

#include "vpon/latency_model.hpp"
#include "vpon/traffic_model.hpp"
#include "vpon/types.hpp"

namespace vpon {

struct Layout;

enum class ArrivalMode {
  PerCycleBatch,  // demand drawn i.i.d. per grant cycle, matches the model
  Poisson,        // per-RU occupancy evolves as a birth-death chain
};

struct SimConfig {
  long long duration_cycles = 100000;
  long long warmup_cycles = -1;  // <0: 10% of duration
  std::uint64_t seed = 1;
  ChannelConfig channel{};
  ArrivalMode arrival_mode = ArrivalMode::PerCycleBatch;
  int segment_bytes = 1500;
  long long overload_queue_limit = 1000000;  // backlog segments before bailing

  long long resolved_warmup() const;
  void validate() const;
};

struct SimStats {
  double mean_wait_us = 0.0;  // arrival to upstream transmit finish
  double p95_wait_us = 0.0;
  double p99_wait_us = 0.0;
  double mean_total_us = 0.0;  // + propagation, weighted by per-member traffic
  double utilization = 0.0;
  long long samples = 0;
  bool overloaded = false;
  double mean_queue_len = 0.0;          // segments, sampled uniformly in time
  double mean_segment_sojourn_us = 0.0; // queue-length cross-check (Little)
  long long served_segments = 0;
  long long offered_segments = 0;
};

/// Event-driven slice simulation: per-cycle batched arrivals into one
/// work-conserving upstream channel at the line rate.
SimStats simulate_slice(const std::vector<int>& slice, const Layout& layout, int mec_tree,
                        double load, const SimConfig& cfg, const LadderSet& ladders);

/// Same, for a synthetic slice at a fixed fiber distance.
SimStats simulate_synthetic(int n71, int n72, double load, const SimConfig& cfg,
                            const LadderSet& ladders, const SyntheticSliceParams& ru = {},
                            double distance_km = 0.0);

struct ValidationRow {
  int n71 = 0;
  int n72 = 0;
  double load = 0.0;
  double sim_mean_us = 0.0;
  double analytic_us = 0.0;
  double rel_err = 0.0;
  bool feasible_sim = false;
  bool feasible_analytic = false;
};

/// Simulates every (n71, n72) mix at every load and compares with the
/// analytic model. Cells run in parallel; row order is deterministic.
std::vector<ValidationRow> validate_grid(const std::vector<std::pair<int, int>>& mixes,
                                         const std::vector<double>& loads, const SimConfig& cfg,
                                         const LadderSet& ladders,
                                         const SyntheticSliceParams& ru_params,
                                         double threshold_us, double distance_km = 0.0,
                                         const LatencyOptions& lat_opts = {});

}  // namespace vpon
