#pragma once

#include <cmath>
#include <string>

#include "vpon/errors.hpp"

namespace vpon {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline double euclid(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Low-layer functional split of an RU. Determines the eCPRI rate range.
enum class Split { S71, S72 };

std::string split_name(Split s);
Split split_from_name(const std::string& name);

/// One radio unit and its call-level traffic parameters.
/// `gamma` is the call arrival rate at 100% load; the load knob scales it down.
struct RuProfile {
  int id = -1;
  Split split = Split::S72;
  int m = 1;           // max simultaneous users
  double gamma = 0.0;  // call arrival rate (calls/s)
  double nu = 1.0;     // call departure rate (calls/s)
  Point2 position{};   // km
  int tree_id = -1;    // owning level-1 PON tree

  void validate() const;
};

/// Upstream channel parameters shared by the latency model and the simulator.
struct ChannelConfig {
  double line_rate_bps = 50e9;       // per wavelength
  double gc_s = 125e-6;              // grant-cycle duration
  int wavelengths = 4;               // east-west channels
  double fiber_delay_us_per_km = 5.0;

  void validate() const;
};

}  // namespace vpon
