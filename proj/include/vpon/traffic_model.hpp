#pragma once

#include <optional>
#include <vector>

#include "vpon/pmf.hpp"
#include "vpon/types.hpp"

namespace vpon {

// Fronthaul rate endpoints (bits/s) for a 100 MHz, 4-antenna / 4-layer cell.
inline constexpr double kSplit71MinRateBps = 1.378e9;
inline constexpr double kSplit71MaxRateBps = 7.384e9;
inline constexpr double kSplit72MinRateBps = 273.98e6;
inline constexpr double kSplit72MaxRateBps = 2.92e9;

/// Active-user thresholds F_1 < ... < F_n (with F_n = m) and the fronthaul rate
/// in force at each step. Rate i applies while the user count stays at or below
/// F_i (and above F_{i-1}); zero users sit on the first step.
struct RateLadder {
  std::vector<int> thresholds;
  std::vector<double> rates_bps;

  int levels() const { return static_cast<int>(thresholds.size()); }
  int level_for_users(int users) const;
  void validate(int m) const;

  /// Four equally spaced user thresholds, rates linearly interpolated between
  /// the split's endpoints. Fewer levels when m < 4.
  static RateLadder defaults_for(Split split, int m);
};

struct RatePmf {
  std::vector<double> rates_bps;
  std::vector<double> prob;
  double mass() const;
};

/// Optional explicit ladders per split; defaults derived from the endpoints.
struct LadderSet {
  std::optional<RateLadder> s71;
  std::optional<RateLadder> s72;
  RateLadder ladder_for(Split split, int m) const;
};

/// Steady-state user-count distribution of the M/M/m/m loss system, over {0..m}.
std::vector<double> erlang_occupancy(double gamma, double nu, int m);

/// Collapse an occupancy pmf onto the ladder's rate steps.
RatePmf rate_probabilities(const std::vector<double>& occupancy, const RateLadder& ladder);

/// Segments needed to carry one grant cycle's worth of traffic at `rate_bps`.
int segments_for_rate(double rate_bps, double gc_s, int segment_bytes);

/// Per-RU distribution of segments per grant cycle at the given load.
SizePmf ru_size_pmf(const RuProfile& profile, const RateLadder& ladder, double load_scale,
                    double gc_s, int segment_bytes);
SizePmf ru_size_pmf(const RuProfile& profile, const LadderSet& ladders, double load_scale,
                    double gc_s, int segment_bytes);

}  // namespace vpon
