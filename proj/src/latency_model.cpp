#include "vpon/latency_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vpon/errors.hpp"
#include "vpon/layout.hpp"

namespace vpon {

SizePmf convolve(const SizePmf& a, const SizePmf& b) {
  a.check_valid();
  b.check_valid();
  if (a.segment_bytes != b.segment_bytes)
    throw ParameterError("convolve: segment size mismatch");
  SizePmf out;
  out.segment_bytes = a.segment_bytes;
  out.p.assign(a.p.size() + b.p.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.p.size(); ++i) {
    if (a.p[i] == 0.0) continue;
    for (std::size_t j = 0; j < b.p.size(); ++j) out.p[i + j] += a.p[i] * b.p[j];
  }
  return out;
}

SizePmf slice_aggregate_pmf(const std::vector<SizePmf>& members) {
  if (members.empty()) throw ParameterError("slice aggregate: no members");
  SizePmf acc = members.front();
  acc.check_valid();
  for (std::size_t i = 1; i < members.size(); ++i) acc = convolve(acc, members[i]);
  return acc;
}

ServiceMoments service_moments(const SizePmf& aggregate, const ChannelConfig& cfg) {
  cfg.validate();
  aggregate.check_valid();
  double tau = 8.0 * aggregate.segment_bytes / cfg.line_rate_bps;  // per-segment transmit time
  ServiceMoments out;
  out.mean_s = aggregate.mean() * tau;
  out.var_s2 = aggregate.variance() * tau * tau;
  out.utilization = out.mean_s / cfg.gc_s;
  return out;
}

double kingman_wait(double lambda_hz, double sigma_a2_s2, double service_mean_s,
                    double service_var_s2) {
  if (!(lambda_hz > 0.0)) throw ParameterError("kingman: lambda must be > 0");
  if (!(sigma_a2_s2 >= 0.0) || !(service_var_s2 >= 0.0))
    throw ParameterError("kingman: variances must be >= 0");
  if (!(service_mean_s >= 0.0)) throw ParameterError("kingman: service mean must be >= 0");
  double rho = lambda_hz * service_mean_s;
  if (rho >= 1.0)
    throw OverloadError(rho, "kingman: utilization " + std::to_string(rho) + " >= 1");
  return service_mean_s + lambda_hz * (sigma_a2_s2 + service_var_s2) / (2.0 * (1.0 - rho));
}

SliceLatencyReport slice_latency_from_pmfs(const std::vector<SizePmf>& pmfs, double distance_km,
                                           const ChannelConfig& cfg, const LatencyOptions& opts) {
  if (!(distance_km >= 0.0)) throw ParameterError("slice latency: negative distance");
  SizePmf agg = slice_aggregate_pmf(pmfs);
  ServiceMoments sm = service_moments(agg, cfg);
  double lambda = 1.0 / cfg.gc_s;
  SliceLatencyReport rep;
  rep.service_mean_us = sm.mean_s * 1e6;
  rep.service_var_us2 = sm.var_s2 * 1e12;
  rep.utilization = sm.utilization;
  rep.wait_us = kingman_wait(lambda, opts.sigma_a2_s2, sm.mean_s, sm.var_s2) * 1e6;
  rep.propagation_us = distance_km * cfg.fiber_delay_us_per_km;
  rep.framing_us = opts.framing ? cfg.gc_s * 0.5e6 : 0.0;
  rep.total_us = rep.wait_us + rep.propagation_us + rep.framing_us;
  return rep;
}

SliceLatencyReport slice_latency(const std::vector<int>& slice_rus, const Layout& layout,
                                 int mec_tree, double load, const ChannelConfig& cfg,
                                 const LadderSet& ladders, const LatencyOptions& opts) {
  if (slice_rus.empty()) throw ParameterError("slice latency: empty slice");
  std::vector<SizePmf> pmfs;
  pmfs.reserve(slice_rus.size());
  double worst_km = 0.0;
  for (int id : slice_rus) {
    const RuProfile& ru = layout.ru(id);
    pmfs.push_back(ru_size_pmf(ru, ladders, load, cfg.gc_s, opts.segment_bytes));
    worst_km = std::max(worst_km, layout.ru_tree_distance_km(id, mec_tree));
  }
  return slice_latency_from_pmfs(pmfs, worst_km, cfg, opts);
}

SliceLatencyReport synthetic_slice_latency(int n71, int n72, double load,
                                           const ChannelConfig& cfg, const LadderSet& ladders,
                                           const SyntheticSliceParams& ru, double distance_km,
                                           const LatencyOptions& opts) {
  if (n71 < 0 || n72 < 0) throw ParameterError("synthetic slice: negative cell count");
  if (n71 + n72 == 0) throw ParameterError("synthetic slice: empty slice");
  RuProfile proto;
  proto.m = ru.m;
  proto.gamma = ru.gamma;
  proto.nu = ru.nu;
  std::vector<SizePmf> pmfs;
  pmfs.reserve(static_cast<std::size_t>(n71 + n72));
  if (n71 > 0) {
    proto.split = Split::S71;
    SizePmf p71 = ru_size_pmf(proto, ladders, load, cfg.gc_s, opts.segment_bytes);
    for (int i = 0; i < n71; ++i) pmfs.push_back(p71);
  }
  if (n72 > 0) {
    proto.split = Split::S72;
    SizePmf p72 = ru_size_pmf(proto, ladders, load, cfg.gc_s, opts.segment_bytes);
    for (int i = 0; i < n72; ++i) pmfs.push_back(p72);
  }
  return slice_latency_from_pmfs(pmfs, distance_km, cfg, opts);
}

std::vector<FeasibilityCell> feasibility_grid(int max71, int max72, double load,
                                              double threshold_us, const ChannelConfig& cfg,
                                              const LadderSet& ladders,
                                              const SyntheticSliceParams& ru, double distance_km,
                                              const LatencyOptions& opts) {
  if (max71 < 0 || max72 < 0) throw ParameterError("feasibility grid: negative extent");
  if (!(threshold_us > 0.0)) throw ParameterError("feasibility grid: threshold must be > 0");
  RuProfile proto;
  proto.m = ru.m;
  proto.gamma = ru.gamma;
  proto.nu = ru.nu;
  proto.split = Split::S71;
  SizePmf p71 = ru_size_pmf(proto, ladders, load, cfg.gc_s, opts.segment_bytes);
  proto.split = Split::S72;
  SizePmf p72 = ru_size_pmf(proto, ladders, load, cfg.gc_s, opts.segment_bytes);

  // powers71[i] = i-fold convolution of p71 (index 0 unused).
  std::vector<SizePmf> powers71(static_cast<std::size_t>(max71) + 1);
  for (int i = 1; i <= max71; ++i)
    powers71[static_cast<std::size_t>(i)] =
        i == 1 ? p71 : convolve(powers71[static_cast<std::size_t>(i - 1)], p71);

  std::vector<FeasibilityCell> out;
  out.reserve(static_cast<std::size_t>((max71 + 1) * (max72 + 1)));
  for (int a = 0; a <= max71; ++a) {
    SizePmf row;  // a-fold 7.1 part, grown by one 7.2 cell per column
    if (a > 0) row = powers71[static_cast<std::size_t>(a)];
    for (int b = 0; b <= max72; ++b) {
      if (a == 0 && b == 0) continue;
      if (b > 0) row = (a == 0 && b == 1) ? p72 : convolve(row, p72);
      FeasibilityCell cell;
      cell.n71 = a;
      cell.n72 = b;
      ServiceMoments sm = service_moments(row, cfg);
      if (sm.utilization >= 1.0) {
        cell.latency_us = std::numeric_limits<double>::infinity();
        cell.feasible = false;
      } else {
        SliceLatencyReport rep = slice_latency_from_pmfs({row}, distance_km, cfg, opts);
        cell.latency_us = rep.total_us;
        cell.feasible = rep.total_us <= threshold_us;
      }
      out.push_back(cell);
    }
  }
  return out;
}

std::vector<FeasibilityCell> feasible_set(int max71, int max72, double load, double threshold_us,
                                          const ChannelConfig& cfg, const LadderSet& ladders,
                                          const SyntheticSliceParams& ru, double distance_km,
                                          const LatencyOptions& opts) {
  auto grid = feasibility_grid(max71, max72, load, threshold_us, cfg, ladders, ru, distance_km,
                               opts);
  std::vector<FeasibilityCell> out;
  for (const auto& c : grid)
    if (c.feasible) out.push_back(c);
  return out;
}

}  // namespace vpon
