#include "vpon/pon_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vpon/errors.hpp"
#include "vpon/layout.hpp"
#include "vpon/parallel.hpp"
#include "vpon/rng.hpp"

namespace vpon {

long long SimConfig::resolved_warmup() const {
  if (warmup_cycles >= 0) return std::min(warmup_cycles, duration_cycles - 1);
  return duration_cycles / 10;
}

void SimConfig::validate() const {
  if (duration_cycles < 1) throw ParameterError("sim: duration must be >= 1 cycle");
  if (resolved_warmup() >= duration_cycles) throw ParameterError("sim: warmup must leave samples");
  if (segment_bytes <= 0) throw ParameterError("sim: segment_bytes must be > 0");
  if (overload_queue_limit < 1) throw ParameterError("sim: overload_queue_limit must be >= 1");
  channel.validate();
}

namespace {

struct RuState {
  // i.i.d. per-cycle draw: cumulative pmf over segment counts.
  std::vector<double> count_cdf;
  std::vector<int> count_value;
  double prop_us = 0.0;
  // Birth-death mode.
  int m = 0;
  double birth_rate = 0.0;  // gamma * load, zero when blocked at m
  double nu = 1.0;
  int users = 0;
  std::vector<int> segments_at_level;
  RateLadder ladder;
  std::vector<double> occupancy_cdf;  // stationary draw for the initial state
};

int draw_from_cdf(const std::vector<double>& cdf, std::mt19937_64& rng) {
  double u = uniform01(rng);
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  return static_cast<int>(it - cdf.begin());
}

/// Advance one M/M/m/m occupancy chain by dt seconds.
void advance_chain(RuState& ru, double dt, std::mt19937_64& rng) {
  double t = 0.0;
  for (;;) {
    double birth = ru.users < ru.m ? ru.birth_rate : 0.0;
    double death = ru.users * ru.nu;
    double total = birth + death;
    if (total <= 0.0) return;
    t += exp_draw(rng, total);
    if (t >= dt) return;
    if (uniform01(rng) * total < birth)
      ++ru.users;
    else
      --ru.users;
  }
}

SimStats simulate_core(std::vector<RuState> rus, const SimConfig& cfg) {
  cfg.validate();
  if (rus.empty()) throw ParameterError("sim: empty slice");

  std::mt19937_64 rng(cfg.seed);
  const double gc = cfg.channel.gc_s;
  const double tau = 8.0 * cfg.segment_bytes / cfg.channel.line_rate_bps;
  const long long warmup = cfg.resolved_warmup();
  const long long duration = cfg.duration_cycles;

  if (cfg.arrival_mode == ArrivalMode::Poisson)
    for (auto& ru : rus) ru.users = draw_from_cdf(ru.occupancy_cdf, rng);

  SimStats stats;
  std::vector<double> wait_samples;
  wait_samples.reserve(static_cast<std::size_t>(duration - warmup));

  double finish = 0.0;            // completion time of all released work
  long long released_total = 0;   // segments handed to the scheduler, all cycles
  long long queue_samples = 0;
  double queue_accum = 0.0;
  double sojourn_accum_s = 0.0;   // per-segment system time, post-warmup
  long long sojourn_count = 0;
  double prop_accum_us = 0.0;     // per-segment propagation, post-warmup
  long long offered_post = 0;
  long long cycles_run = 0;

  for (long long c = 0; c < duration; ++c) {
    cycles_run = c + 1;
    const double cycle_start = static_cast<double>(c) * gc;
    const bool counted = c >= warmup;

    // Queue probe instant for this cycle (independent of the arrivals below).
    const double t_s = cycle_start + uniform01(rng) * gc;
    // Segments released in earlier cycles and still unfinished at t_s.
    double backlog_work = finish - t_s;
    long long in_system =
        backlog_work > 0.0 ? static_cast<long long>(std::ceil(backlog_work / tau - 1e-12)) : 0;

    // This cycle's arrivals, uniform within the cycle; granted at the next boundary.
    long long burst = 0;
    double arrival_sum = 0.0;
    for (auto& ru : rus) {
      int x = 0;
      if (cfg.arrival_mode == ArrivalMode::PerCycleBatch) {
        x = ru.count_value[static_cast<std::size_t>(draw_from_cdf(ru.count_cdf, rng))];
      } else {
        advance_chain(ru, gc, rng);
        x = ru.segments_at_level[static_cast<std::size_t>(ru.ladder.level_for_users(ru.users))];
      }
      for (int i = 0; i < x; ++i) {
        double a = cycle_start + uniform01(rng) * gc;
        arrival_sum += a;
        if (a <= t_s) ++in_system;
      }
      burst += x;
      if (counted) prop_accum_us += static_cast<double>(x) * ru.prop_us;
    }

    if (counted) {
      queue_accum += static_cast<double>(in_system);
      ++queue_samples;
      offered_post += burst;
    }

    // Grant at the next boundary: the burst joins the work-conserving server.
    const double grant = cycle_start + gc;
    double start = std::max(grant, finish);
    finish = start + static_cast<double>(burst) * tau;
    released_total += burst;

    if (burst > 0 && counted) {
      double mean_arrival = arrival_sum / static_cast<double>(burst);
      wait_samples.push_back((finish - mean_arrival) * 1e6);
      // Segment i of the burst completes at start + i*tau.
      sojourn_accum_s += static_cast<double>(burst) * start +
                         tau * static_cast<double>(burst) * (static_cast<double>(burst) + 1.0) /
                             2.0 -
                         arrival_sum;
      sojourn_count += burst;
    }

    double backlog_after = finish - grant;
    if (backlog_after > 0.0 &&
        backlog_after / tau > static_cast<double>(cfg.overload_queue_limit)) {
      stats.overloaded = true;
      break;
    }
  }

  // Whole-run throughput; an overload bail shortens the horizon accordingly.
  const double horizon = static_cast<double>(cycles_run) * gc;
  long long unserved_at_end =
      finish > horizon ? static_cast<long long>(std::ceil((finish - horizon) / tau - 1e-12)) : 0;
  stats.served_segments = released_total - unserved_at_end;
  stats.offered_segments = released_total;

  if (!wait_samples.empty()) {
    double sum = 0.0;
    for (double w : wait_samples) sum += w;
    stats.mean_wait_us = sum / static_cast<double>(wait_samples.size());
    std::sort(wait_samples.begin(), wait_samples.end());
    auto pct = [&](double q) {
      std::size_t idx = static_cast<std::size_t>(
          std::ceil(q * static_cast<double>(wait_samples.size())) - 1.0);
      if (idx >= wait_samples.size()) idx = wait_samples.size() - 1;
      return wait_samples[idx];
    };
    stats.p95_wait_us = pct(0.95);
    stats.p99_wait_us = pct(0.99);
  }
  stats.samples = static_cast<long long>(wait_samples.size());
  if (offered_post > 0)
    stats.mean_total_us = stats.mean_wait_us + prop_accum_us / static_cast<double>(offered_post);
  else
    stats.mean_total_us = stats.mean_wait_us;
  if (queue_samples > 0) stats.mean_queue_len = queue_accum / static_cast<double>(queue_samples);
  if (sojourn_count > 0)
    stats.mean_segment_sojourn_us = sojourn_accum_s / static_cast<double>(sojourn_count) * 1e6;
  if (queue_samples > 0) {
    double observed_s = static_cast<double>(queue_samples) * gc;
    stats.utilization = static_cast<double>(offered_post) * tau / observed_s;
  }
  return stats;
}

RuState make_ru_state(const RuProfile& profile, const LadderSet& ladders, double load,
                      const SimConfig& cfg, double prop_us) {
  RuState st;
  st.prop_us = prop_us;
  st.m = profile.m;
  st.birth_rate = profile.gamma * load;
  st.nu = profile.nu;
  st.ladder = ladders.ladder_for(profile.split, profile.m);

  SizePmf pmf = ru_size_pmf(profile, st.ladder, load, cfg.channel.gc_s, cfg.segment_bytes);
  double acc = 0.0;
  for (int k = 0; k <= pmf.max_support(); ++k) {
    double pk = pmf.p[static_cast<std::size_t>(k)];
    if (pk <= 0.0) continue;
    acc += pk;
    st.count_cdf.push_back(acc);
    st.count_value.push_back(k);
  }
  st.count_cdf.back() = 1.0;  // close rounding gap so draws never fall off the end

  st.segments_at_level.reserve(st.ladder.rates_bps.size());
  for (double rate : st.ladder.rates_bps)
    st.segments_at_level.push_back(segments_for_rate(rate, cfg.channel.gc_s, cfg.segment_bytes));
  auto occ = erlang_occupancy(profile.gamma * load, profile.nu, profile.m);
  double occ_acc = 0.0;
  st.occupancy_cdf.reserve(occ.size());
  for (double pk : occ) {
    occ_acc += pk;
    st.occupancy_cdf.push_back(occ_acc);
  }
  st.occupancy_cdf.back() = 1.0;
  return st;
}

}  // namespace

SimStats simulate_slice(const std::vector<int>& slice, const Layout& layout, int mec_tree,
                        double load, const SimConfig& cfg, const LadderSet& ladders) {
  if (slice.empty()) throw ParameterError("sim: empty slice");
  std::vector<RuState> rus;
  rus.reserve(slice.size());
  for (int id : slice) {
    const RuProfile& profile = layout.ru(id);
    double prop_us =
        layout.ru_tree_distance_km(id, mec_tree) * cfg.channel.fiber_delay_us_per_km;
    rus.push_back(make_ru_state(profile, ladders, load, cfg, prop_us));
  }
  return simulate_core(std::move(rus), cfg);
}

SimStats simulate_synthetic(int n71, int n72, double load, const SimConfig& cfg,
                            const LadderSet& ladders, const SyntheticSliceParams& ru,
                            double distance_km) {
  if (n71 < 0 || n72 < 0) throw ParameterError("sim: negative cell count");
  if (n71 + n72 == 0) throw ParameterError("sim: empty slice");
  double prop_us = distance_km * cfg.channel.fiber_delay_us_per_km;
  RuProfile proto;
  proto.m = ru.m;
  proto.gamma = ru.gamma;
  proto.nu = ru.nu;
  std::vector<RuState> rus;
  rus.reserve(static_cast<std::size_t>(n71 + n72));
  proto.split = Split::S71;
  for (int i = 0; i < n71; ++i) rus.push_back(make_ru_state(proto, ladders, load, cfg, prop_us));
  proto.split = Split::S72;
  for (int i = 0; i < n72; ++i) rus.push_back(make_ru_state(proto, ladders, load, cfg, prop_us));
  return simulate_core(std::move(rus), cfg);
}

std::vector<ValidationRow> validate_grid(const std::vector<std::pair<int, int>>& mixes,
                                         const std::vector<double>& loads, const SimConfig& cfg,
                                         const LadderSet& ladders,
                                         const SyntheticSliceParams& ru_params,
                                         double threshold_us, double distance_km,
                                         const LatencyOptions& lat_opts) {
  if (mixes.empty() || loads.empty()) throw ParameterError("validate: empty grid");
  struct Cell {
    int n71;
    int n72;
    double load;
  };
  std::vector<Cell> cells;
  for (auto [a, b] : mixes)
    for (double load : loads) cells.push_back({a, b, load});

  std::vector<ValidationRow> rows(cells.size());
  parallel_for(static_cast<int>(cells.size()), [&](int i) {
    const Cell& cell = cells[static_cast<std::size_t>(i)];
    ValidationRow row;
    row.n71 = cell.n71;
    row.n72 = cell.n72;
    row.load = cell.load;

    SimConfig cell_cfg = cfg;
    cell_cfg.seed = cfg.seed + static_cast<std::uint64_t>(i);  // independent streams per cell
    SimStats sim = simulate_synthetic(cell.n71, cell.n72, cell.load, cell_cfg, ladders, ru_params,
                                      distance_km);
    row.sim_mean_us = sim.mean_total_us;
    row.feasible_sim = !sim.overloaded && sim.mean_total_us <= threshold_us;

    ChannelConfig ch = cfg.channel;
    LatencyOptions opts = lat_opts;
    opts.segment_bytes = cfg.segment_bytes;
    try {
      SliceLatencyReport rep = synthetic_slice_latency(cell.n71, cell.n72, cell.load, ch, ladders,
                                                       ru_params, distance_km, opts);
      row.analytic_us = rep.total_us;
      row.feasible_analytic = rep.total_us <= threshold_us;
      row.rel_err = sim.overloaded
                        ? std::numeric_limits<double>::quiet_NaN()
                        : std::abs(row.sim_mean_us - row.analytic_us) / row.analytic_us;
    } catch (const OverloadError&) {
      row.analytic_us = std::numeric_limits<double>::infinity();
      row.feasible_analytic = false;
      row.rel_err = std::numeric_limits<double>::quiet_NaN();
    }
    rows[static_cast<std::size_t>(i)] = row;
  });
  return rows;
}

}  // namespace vpon
