#pragma once

#include <vector>

#include "vpon/pmf.hpp"
#include "vpon/traffic_model.hpp"
#include "vpon/types.hpp"

namespace vpon {

struct Layout;

struct ServiceMoments {
  double mean_s = 0.0;
  double var_s2 = 0.0;
  double utilization = 0.0;  // mean / grant cycle
};

struct LatencyOptions {
  int segment_bytes = 1500;
  double sigma_a2_s2 = 0.0;  // arrival-interval variance; 0 = paced grants
  bool framing = true;       // add half a grant cycle for frame alignment
};

struct SliceLatencyReport {
  double wait_us = 0.0;  // queueing incl. service
  double service_mean_us = 0.0;
  double service_var_us2 = 0.0;
  double utilization = 0.0;
  double propagation_us = 0.0;
  double framing_us = 0.0;
  double total_us = 0.0;
};

/// Distribution of the sum of two independent segment counts.
SizePmf convolve(const SizePmf& a, const SizePmf& b);

/// Per-cycle aggregate demand of a slice: fold of the member pmfs.
SizePmf slice_aggregate_pmf(const std::vector<SizePmf>& members);

/// Transmission-time moments of the aggregate at the channel line rate.
ServiceMoments service_moments(const SizePmf& aggregate, const ChannelConfig& cfg);

/// G/G/1 mean sojourn (wait + service) via the Kingman approximation.
/// Throws OverloadError when utilization reaches 1.
double kingman_wait(double lambda_hz, double sigma_a2_s2, double service_mean_s,
                    double service_var_s2);

/// Full analytic latency for one slice on a shared channel: queueing at the
/// grant pace, worst member propagation, optional framing term.
SliceLatencyReport slice_latency(const std::vector<int>& slice_rus, const Layout& layout,
                                 int mec_tree, double load, const ChannelConfig& cfg,
                                 const LadderSet& ladders, const LatencyOptions& opts = {});

SliceLatencyReport slice_latency_from_pmfs(const std::vector<SizePmf>& pmfs, double distance_km,
                                           const ChannelConfig& cfg,
                                           const LatencyOptions& opts = {});

struct SyntheticSliceParams {
  int m = 32;
  double gamma = 32.0;
  double nu = 1.0;
};

/// Latency of a slice built from n71 + n72 identical synthetic cells.
SliceLatencyReport synthetic_slice_latency(int n71, int n72, double load,
                                           const ChannelConfig& cfg, const LadderSet& ladders,
                                           const SyntheticSliceParams& ru = {},
                                           double distance_km = 0.0,
                                           const LatencyOptions& opts = {});

struct FeasibilityCell {
  int n71 = 0;
  int n72 = 0;
  double latency_us = 0.0;  // +inf when overloaded
  bool feasible = false;
};

/// Latency over the (n71, n72) grid, excluding (0, 0). Powers of the two cell
/// pmfs are cached, so the grid costs one convolution per cell.
std::vector<FeasibilityCell> feasibility_grid(int max71, int max72, double load,
                                              double threshold_us, const ChannelConfig& cfg,
                                              const LadderSet& ladders,
                                              const SyntheticSliceParams& ru = {},
                                              double distance_km = 0.0,
                                              const LatencyOptions& opts = {});

/// The feasible cells only.
std::vector<FeasibilityCell> feasible_set(int max71, int max72, double load, double threshold_us,
                                          const ChannelConfig& cfg, const LadderSet& ladders,
                                          const SyntheticSliceParams& ru = {},
                                          double distance_km = 0.0,
                                          const LatencyOptions& opts = {});

}  // namespace vpon
