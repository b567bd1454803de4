#include "vpon/traffic_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vpon {

std::string split_name(Split s) { return s == Split::S71 ? "7.1" : "7.2"; }

Split split_from_name(const std::string& name) {
  if (name == "7.1" || name == "71" || name == "s71") return Split::S71;
  if (name == "7.2" || name == "72" || name == "s72") return Split::S72;
  throw ParameterError("unknown split name: " + name);
}

void RuProfile::validate() const {
  if (m < 1) throw ParameterError("ru profile: m must be >= 1");
  if (!(gamma >= 0.0)) throw ParameterError("ru profile: gamma must be >= 0");
  if (!(nu > 0.0)) throw ParameterError("ru profile: nu must be > 0");
}

void ChannelConfig::validate() const {
  if (!(line_rate_bps > 0.0)) throw ParameterError("channel: line_rate_bps must be > 0");
  if (!(gc_s > 0.0)) throw ParameterError("channel: gc_s must be > 0");
  if (wavelengths < 1) throw ParameterError("channel: wavelengths must be >= 1");
  if (!(fiber_delay_us_per_km >= 0.0))
    throw ParameterError("channel: fiber_delay_us_per_km must be >= 0");
}

int RateLadder::level_for_users(int users) const {
  if (users < 0) throw ParameterError("rate ladder: negative user count");
  for (int i = 0; i < levels(); ++i) {
    if (users <= thresholds[static_cast<std::size_t>(i)]) return i;
  }
  throw ParameterError("rate ladder: user count " + std::to_string(users) +
                       " above top threshold " + std::to_string(thresholds.back()));
}

void RateLadder::validate(int m) const {
  if (thresholds.empty()) throw ParameterError("rate ladder: no levels");
  if (thresholds.size() != rates_bps.size())
    throw ParameterError("rate ladder: threshold/rate count mismatch");
  int prev = 0;
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (thresholds[i] < 1 || (i > 0 && thresholds[i] <= prev))
      throw ParameterError("rate ladder: thresholds must be strictly increasing and >= 1");
    prev = thresholds[i];
    if (!(rates_bps[i] > 0.0)) throw ParameterError("rate ladder: rates must be > 0");
    if (i > 0 && rates_bps[i] <= rates_bps[i - 1])
      throw ParameterError("rate ladder: rates must be strictly increasing");
  }
  if (thresholds.back() != m)
    throw ParameterError("rate ladder: top threshold " + std::to_string(thresholds.back()) +
                         " must equal m = " + std::to_string(m));
}

RateLadder RateLadder::defaults_for(Split split, int m) {
  if (m < 1) throw ParameterError("rate ladder: m must be >= 1");
  double lo = split == Split::S71 ? kSplit71MinRateBps : kSplit72MinRateBps;
  double hi = split == Split::S71 ? kSplit71MaxRateBps : kSplit72MaxRateBps;
  int n = std::min(4, m);
  RateLadder out;
  out.thresholds.reserve(static_cast<std::size_t>(n));
  out.rates_bps.reserve(static_cast<std::size_t>(n));
  int prev = 0;
  for (int i = 1; i <= n; ++i) {
    int t = static_cast<int>(std::lround(static_cast<double>(i) * m / n));
    if (t <= prev) t = prev + 1;  // keep strictly increasing for tiny m
    out.thresholds.push_back(t);
    prev = t;
  }
  out.thresholds.back() = m;
  for (int i = 0; i < n; ++i) {
    double f = n == 1 ? 1.0 : static_cast<double>(i) / (n - 1);
    out.rates_bps.push_back(lo + f * (hi - lo));
  }
  out.validate(m);
  return out;
}

double RatePmf::mass() const {
  double s = 0.0;
  for (double v : prob) s += v;
  return s;
}

RateLadder LadderSet::ladder_for(Split split, int m) const {
  const auto& opt = split == Split::S71 ? s71 : s72;
  if (opt) {
    opt->validate(m);
    return *opt;
  }
  return RateLadder::defaults_for(split, m);
}

std::vector<double> erlang_occupancy(double gamma, double nu, int m) {
  if (m < 0) throw ParameterError("erlang occupancy: m must be >= 0");
  if (!(gamma >= 0.0)) throw ParameterError("erlang occupancy: gamma must be >= 0");
  if (!(nu > 0.0)) throw ParameterError("erlang occupancy: nu must be > 0");
  std::vector<double> p(static_cast<std::size_t>(m) + 1, 0.0);
  double a = gamma / nu;
  // Ratio recursion p_k = p_{k-1} * a / k from an unnormalized p_0 = 1, with a
  // periodic rescale so intermediate terms never overflow for large m.
  p[0] = 1.0;
  double scale_correction = 0.0;  // log of total shrink applied (only relative values matter)
  for (int k = 1; k <= m; ++k) {
    p[static_cast<std::size_t>(k)] = p[static_cast<std::size_t>(k - 1)] * a / k;
    if (p[static_cast<std::size_t>(k)] > 1e200) {
      for (int j = 0; j <= k; ++j) p[static_cast<std::size_t>(j)] *= 1e-200;
      scale_correction += 200.0;
    }
  }
  (void)scale_correction;
  double total = 0.0;
  for (double v : p) total += v;
  for (double& v : p) v /= total;
  return p;
}

RatePmf rate_probabilities(const std::vector<double>& occupancy, const RateLadder& ladder) {
  if (occupancy.empty()) throw ParameterError("rate probabilities: empty occupancy");
  int m = static_cast<int>(occupancy.size()) - 1;
  ladder.validate(m);
  RatePmf out;
  out.rates_bps = ladder.rates_bps;
  out.prob.assign(out.rates_bps.size(), 0.0);
  for (int k = 0; k <= m; ++k)
    out.prob[static_cast<std::size_t>(ladder.level_for_users(k))] +=
        occupancy[static_cast<std::size_t>(k)];
  return out;
}

int segments_for_rate(double rate_bps, double gc_s, int segment_bytes) {
  if (!(rate_bps >= 0.0)) throw ParameterError("segments_for_rate: rate must be >= 0");
  if (!(gc_s > 0.0)) throw ParameterError("segments_for_rate: gc_s must be > 0");
  if (segment_bytes <= 0) throw ParameterError("segments_for_rate: segment_bytes must be > 0");
  if (rate_bps == 0.0) return 0;
  double q = rate_bps * gc_s / (8.0 * segment_bytes);
  int x = static_cast<int>(std::ceil(q - 1e-9));  // absorb representation noise at integers
  return x < 1 ? 1 : x;
}

SizePmf ru_size_pmf(const RuProfile& profile, const RateLadder& ladder, double load_scale,
                    double gc_s, int segment_bytes) {
  profile.validate();
  if (!(load_scale >= 0.0) || !(load_scale <= 1.0))
    throw ParameterError("ru_size_pmf: load_scale must lie in [0, 1]");
  auto occ = erlang_occupancy(profile.gamma * load_scale, profile.nu, profile.m);
  RatePmf rates = rate_probabilities(occ, ladder);
  SizePmf out;
  out.segment_bytes = segment_bytes;
  int max_x = 0;
  std::vector<int> xs(rates.rates_bps.size());
  for (std::size_t i = 0; i < rates.rates_bps.size(); ++i) {
    xs[i] = segments_for_rate(rates.rates_bps[i], gc_s, segment_bytes);
    max_x = std::max(max_x, xs[i]);
  }
  out.p.assign(static_cast<std::size_t>(max_x) + 1, 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i)
    out.p[static_cast<std::size_t>(xs[i])] += rates.prob[i];  // equal sizes merge
  return out;
}

SizePmf ru_size_pmf(const RuProfile& profile, const LadderSet& ladders, double load_scale,
                    double gc_s, int segment_bytes) {
  return ru_size_pmf(profile, ladders.ladder_for(profile.split, profile.m), load_scale, gc_s,
                     segment_bytes);
}

}  // namespace vpon
