#include "vpon/layout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "vpon/errors.hpp"
#include "vpon/rng.hpp"

namespace vpon {

namespace {

int nearest_macro(const std::vector<MacroSite>& macros, Point2 p) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& mc : macros) {
    double d = euclid(mc.pos, p);
    if (d < best_d || (d == best_d && best >= 0 && mc.id < best)) {
      best_d = d;
      best = mc.id;
    }
  }
  return best;
}

Layout finish_layout(Rect area, double detour, std::vector<MacroSite> macros,
                     std::vector<RuProfile> smalls) {
  if (!(area.width > 0.0) || !(area.height > 0.0))
    throw ParameterError("layout: area must be positive");
  if (!(detour >= 1.0)) throw ParameterError("layout: detour factor must be >= 1");
  if (macros.empty()) throw ParameterError("layout: need at least one macro");

  std::sort(macros.begin(), macros.end(),
            [](const MacroSite& a, const MacroSite& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < macros.size(); ++i)
    if (macros[i].id != static_cast<int>(i))
      throw ParameterError("layout: macro ids must be 0..n-1 without gaps");

  std::sort(smalls.begin(), smalls.end(),
            [](const RuProfile& a, const RuProfile& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < smalls.size(); ++i) {
    if (smalls[i].id != static_cast<int>(i))
      throw ParameterError("layout: RU ids must be 0..n-1 without gaps");
    smalls[i].validate();
  }

  int n_trees = static_cast<int>(macros.size());
  for (auto& ru : smalls) {
    if (ru.tree_id == -1) ru.tree_id = nearest_macro(macros, ru.position);
    if (ru.tree_id < 0 || ru.tree_id >= n_trees)
      throw TopologyError("layout: RU " + std::to_string(ru.id) + " references unknown tree " +
                          std::to_string(ru.tree_id));
  }

  Layout out;
  out.area = area;
  out.detour = detour;
  out.macros = std::move(macros);
  out.smalls = std::move(smalls);
  out.tree_members.assign(static_cast<std::size_t>(n_trees), {});
  for (const auto& ru : out.smalls)
    out.tree_members[static_cast<std::size_t>(ru.tree_id)].push_back(ru.id);

  out.ru_tree_km.assign(out.smalls.size(), std::vector<double>(static_cast<std::size_t>(n_trees)));
  for (std::size_t r = 0; r < out.smalls.size(); ++r)
    for (int t = 0; t < n_trees; ++t)
      out.ru_tree_km[r][static_cast<std::size_t>(t)] =
          fiber_distance(out.smalls[r].position, out.macros[static_cast<std::size_t>(t)].pos,
                         detour);

  out.tree_tree_km.assign(static_cast<std::size_t>(n_trees),
                          std::vector<double>(static_cast<std::size_t>(n_trees), 0.0));
  for (int a = 0; a < n_trees; ++a)
    for (int b = a + 1; b < n_trees; ++b) {
      double d = fiber_distance(out.macros[static_cast<std::size_t>(a)].pos,
                                out.macros[static_cast<std::size_t>(b)].pos, detour);
      out.tree_tree_km[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = d;
      out.tree_tree_km[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = d;
    }
  return out;
}

}  // namespace

const RuProfile& Layout::ru(int id) const {
  if (id < 0 || id >= n_rus()) throw TopologyError("layout: unknown RU id " + std::to_string(id));
  return smalls[static_cast<std::size_t>(id)];
}

double Layout::ru_tree_distance_km(int ru, int tree) const {
  if (ru < 0 || ru >= n_rus()) throw TopologyError("layout: unknown RU id " + std::to_string(ru));
  if (tree < 0 || tree >= n_trees())
    throw TopologyError("layout: unknown tree id " + std::to_string(tree));
  return ru_tree_km[static_cast<std::size_t>(ru)][static_cast<std::size_t>(tree)];
}

double Layout::tree_distance_km(int a, int b) const {
  if (a < 0 || a >= n_trees() || b < 0 || b >= n_trees())
    throw TopologyError("layout: unknown tree id");
  return tree_tree_km[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
}

double fiber_distance(Point2 a, Point2 b, double detour) {
  if (!(detour >= 1.0)) throw ParameterError("fiber_distance: detour factor must be >= 1");
  return euclid(a, b) * detour;
}

Layout make_layout(Rect area, std::vector<MacroSite> macros, std::vector<RuProfile> smalls,
                   double detour) {
  return finish_layout(area, detour, std::move(macros), std::move(smalls));
}

Layout generate_layout(const GeneratorParams& params) {
  if (params.n_macro < 1) throw ParameterError("generate_layout: n_macro must be >= 1");
  if (!(params.area.width > 0.0) || !(params.area.height > 0.0))
    throw ParameterError("generate_layout: area must be positive");
  if (!(params.smalls_per_macro_mean >= 0.0))
    throw ParameterError("generate_layout: smalls_per_macro_mean must be >= 0");
  if (!(params.split71_fraction >= 0.0) || !(params.split71_fraction <= 1.0))
    throw ParameterError("generate_layout: split71_fraction must lie in [0, 1]");

  std::mt19937_64 rng(params.seed);
  double min_sep = params.min_separation_km;
  if (min_sep <= 0.0)
    min_sep = 0.35 * std::sqrt(params.area.width * params.area.height / params.n_macro);

  std::vector<MacroSite> macros;
  macros.reserve(static_cast<std::size_t>(params.n_macro));
  constexpr int kMaxTries = 1000;
  for (int i = 0; i < params.n_macro; ++i) {
    bool placed = false;
    for (int t = 0; t < kMaxTries && !placed; ++t) {
      Point2 p{uniform01(rng) * params.area.width, uniform01(rng) * params.area.height};
      bool ok = true;
      for (const auto& mc : macros)
        if (euclid(mc.pos, p) < min_sep) {
          ok = false;
          break;
        }
      if (ok) {
        macros.push_back({i, p});
        placed = true;
      }
    }
    if (!placed)
      throw GenerationError("generate_layout: could not place macro " + std::to_string(i) +
                            " with separation " + std::to_string(min_sep) + " km after " +
                            std::to_string(kMaxTries) + " tries");
  }

  int n_smalls =
      static_cast<int>(std::lround(params.smalls_per_macro_mean * params.n_macro));
  std::vector<RuProfile> smalls;
  smalls.reserve(static_cast<std::size_t>(n_smalls));
  for (int j = 0; j < n_smalls; ++j) {
    RuProfile ru;
    ru.id = j;
    ru.position = {uniform01(rng) * params.area.width, uniform01(rng) * params.area.height};
    ru.split = uniform01(rng) < params.split71_fraction ? Split::S71 : Split::S72;
    ru.m = params.m;
    ru.gamma = params.gamma;
    ru.nu = params.nu;
    ru.tree_id = -1;  // resolved to the nearest macro below
    smalls.push_back(ru);
  }

  return finish_layout(params.area, params.detour, std::move(macros), std::move(smalls));
}

std::vector<int> k_nearest_trees(const Layout& layout, int tree, int w) {
  if (w < 1) throw ParameterError("k_nearest_trees: w must be >= 1");
  if (tree < 0 || tree >= layout.n_trees())
    throw TopologyError("k_nearest_trees: unknown tree id " + std::to_string(tree));
  std::vector<int> others;
  others.reserve(static_cast<std::size_t>(layout.n_trees()) - 1);
  for (int v = 0; v < layout.n_trees(); ++v)
    if (v != tree) others.push_back(v);
  std::sort(others.begin(), others.end(), [&](int a, int b) {
    double da = layout.tree_distance_km(tree, a);
    double db = layout.tree_distance_km(tree, b);
    if (da != db) return da < db;
    return a < b;
  });
  std::vector<int> out{tree};
  for (int v : others) {
    if (static_cast<int>(out.size()) >= w) break;
    out.push_back(v);
  }
  return out;
}

NeighborSets neighbor_sets(const Layout& layout, int w) {
  NeighborSets out;
  out.sets.reserve(static_cast<std::size_t>(layout.n_trees()));
  for (int t = 0; t < layout.n_trees(); ++t) out.sets.push_back(k_nearest_trees(layout, t, w));
  return out;
}

double cyclic_tour_length(const std::vector<Point2>& pts, const std::vector<int>& order) {
  if (order.size() != pts.size()) throw ParameterError("tour length: order/point count mismatch");
  if (pts.empty()) throw ParameterError("tour length: no points");
  double total = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    Point2 a = pts[static_cast<std::size_t>(order[i])];
    Point2 b = pts[static_cast<std::size_t>(order[(i + 1) % order.size()])];
    total += euclid(a, b);
  }
  return total;
}

RingOrder ring_order_exact(const std::vector<Point2>& pts) {
  int n = static_cast<int>(pts.size());
  if (n < 1) throw ParameterError("ring_order: need at least one point");
  if (n > 16) throw ParameterError("ring_order_exact: too many points for the exact DP");
  RingOrder out;
  if (n == 1) {
    out.order = {0};
    return out;
  }
  std::vector<std::vector<double>> d(static_cast<std::size_t>(n),
                                     std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) d[i][j] = euclid(pts[i], pts[j]);

  // Held-Karp with node 0 fixed as the tour anchor. dp[mask][j]: cheapest path
  // 0 -> j visiting exactly the nodes of mask (mask always contains 0 and j).
  int full = (1 << n) - 1;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> dp(static_cast<std::size_t>(full) + 1,
                                      std::vector<double>(static_cast<std::size_t>(n), inf));
  std::vector<std::vector<int>> parent(static_cast<std::size_t>(full) + 1,
                                       std::vector<int>(static_cast<std::size_t>(n), -1));
  dp[1][0] = 0.0;
  for (int mask = 1; mask <= full; ++mask) {
    if (!(mask & 1)) continue;
    for (int j = 0; j < n; ++j) {
      if (!(mask & (1 << j)) || dp[mask][j] == inf) continue;
      for (int k = 1; k < n; ++k) {
        if (mask & (1 << k)) continue;
        int next = mask | (1 << k);
        double cand = dp[mask][j] + d[j][k];
        if (cand < dp[next][k]) {
          dp[next][k] = cand;
          parent[next][k] = j;
        }
      }
    }
  }
  double best = inf;
  int best_end = -1;
  for (int j = 1; j < n; ++j) {
    double cand = dp[full][j] + d[j][0];
    if (cand < best) {
      best = cand;
      best_end = j;
    }
  }
  out.order.assign(static_cast<std::size_t>(n), 0);
  int mask = full;
  int at = best_end;
  for (int i = n - 1; i >= 1; --i) {
    out.order[static_cast<std::size_t>(i)] = at;
    int prev = parent[mask][at];
    mask ^= 1 << at;
    at = prev;
  }
  out.order[0] = 0;
  out.tour_length = cyclic_tour_length(pts, out.order);
  return out;
}

RingOrder ring_order_heuristic(const std::vector<Point2>& pts) {
  int n = static_cast<int>(pts.size());
  if (n < 1) throw ParameterError("ring_order: need at least one point");
  RingOrder out;
  if (n == 1) {
    out.order = {0};
    return out;
  }

  // Nearest-neighbor construction followed by 2-opt descent: reverse
  // order[i..j] while any swap shortens the tour.
  auto tour_from = [&](int start) {
    std::vector<int> order;
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    order.reserve(static_cast<std::size_t>(n));
    order.push_back(start);
    used[static_cast<std::size_t>(start)] = true;
    for (int step = 1; step < n; ++step) {
      int at = order.back();
      int best = -1;
      double best_d = std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        double dj = euclid(pts[static_cast<std::size_t>(at)], pts[static_cast<std::size_t>(j)]);
        if (dj < best_d) {
          best_d = dj;
          best = j;
        }
      }
      order.push_back(best);
      used[static_cast<std::size_t>(best)] = true;
    }
    auto at = [&](int i) { return pts[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]; };
    auto two_opt_pass = [&] {
      bool improved = false;
      for (int i = 0; i < n - 1; ++i) {
        for (int j = i + 1; j < n; ++j) {
          if (i == 0 && j == n - 1) continue;  // same edge pair
          double before = euclid(at((i - 1 + n) % n), at(i)) + euclid(at(j), at((j + 1) % n));
          double after = euclid(at((i - 1 + n) % n), at(j)) + euclid(at(i), at((j + 1) % n));
          if (after + 1e-12 < before) {
            std::reverse(order.begin() + i, order.begin() + j + 1);
            improved = true;
          }
        }
      }
      return improved;
    };
    // Or-opt escape: relocate a run of up to three nodes, optionally
    // reversed, wherever that shortens the tour. 2-opt alone cannot move a
    // point between two non-adjacent edges. First improvement wins; the
    // caller loops until neither pass finds one.
    auto or_opt_pass = [&] {
      double len = cyclic_tour_length(pts, order);
      for (int seg = 1; seg <= 3 && seg < n; ++seg) {
        for (int s = 0; s + seg <= n; ++s) {
          std::vector<int> rest(order.begin(), order.begin() + s);
          rest.insert(rest.end(), order.begin() + s + seg, order.end());
          std::vector<int> run(order.begin() + s, order.begin() + s + seg);
          for (int flip = 0; flip < 2; ++flip) {
            if (flip) std::reverse(run.begin(), run.end());
            for (std::size_t gap = 0; gap <= rest.size(); ++gap) {
              std::vector<int> trial(rest.begin(), rest.begin() + static_cast<long>(gap));
              trial.insert(trial.end(), run.begin(), run.end());
              trial.insert(trial.end(), rest.begin() + static_cast<long>(gap), rest.end());
              if (cyclic_tour_length(pts, trial) + 1e-12 < len) {
                order = std::move(trial);
                return true;
              }
            }
          }
        }
      }
      return false;
    };
    while (two_opt_pass() || or_opt_pass()) {
    }
    return order;
  };

  // The descent only reaches a local optimum, so restart it from every node
  // and keep the shortest result. Each candidate is 2-opt optimal, hence so
  // is the winner.
  double best_len = std::numeric_limits<double>::infinity();
  for (int start = 0; start < n; ++start) {
    std::vector<int> order = tour_from(start);
    double len = cyclic_tour_length(pts, order);
    if (len + 1e-12 < best_len) {
      best_len = len;
      out.order = std::move(order);
    }
  }
  // Canonical rotation: the cycle is direction- and origin-free.
  auto zero = std::find(out.order.begin(), out.order.end(), 0);
  std::rotate(out.order.begin(), zero, out.order.end());
  out.tour_length = cyclic_tour_length(pts, out.order);
  return out;
}

RingOrder ring_order(const std::vector<Point2>& pts) {
  if (pts.empty()) throw ParameterError("ring_order: need at least one point");
  return pts.size() <= 12 ? ring_order_exact(pts) : ring_order_heuristic(pts);
}

}  // namespace vpon
