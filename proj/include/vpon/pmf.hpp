#pragma once

#include <vector>

#include "vpon/errors.hpp"

namespace vpon {

/// Distribution of eCPRI segment counts arriving per grant cycle.
/// Index into `p` is the segment count; `segment_bytes` is the segment size d_s.
struct SizePmf {
  std::vector<double> p;
  int segment_bytes = 1500;

  double mass() const;
  double mean() const;
  double second_moment() const;
  double variance() const;
  int max_support() const { return p.empty() ? -1 : static_cast<int>(p.size()) - 1; }

  /// Throws ParameterError unless entries are non-negative and sum to 1 within tol.
  void check_valid(double tol = 1e-9) const;
};

/// Point mass at k segments.
SizePmf delta_pmf(int k, int segment_bytes);

}  // namespace vpon
