#pragma once

#include <cstdint>
#include <vector>

#include "vpon/types.hpp"

namespace vpon {

struct MacroSite {
  int id = -1;
  Point2 pos{};
};

struct Rect {
  double width = 0.0;
  double height = 0.0;
};

/// Macro/small-cell geometry with level-1 PON tree membership and fiber
/// distance tables. Immutable after construction.
struct Layout {
  Rect area{};
  double detour = 1.4;  // Euclidean -> fiber routing factor
  std::vector<MacroSite> macros;
  std::vector<RuProfile> smalls;
  std::vector<std::vector<int>> tree_members;   // per tree id
  std::vector<std::vector<double>> ru_tree_km;  // fiber, per RU x tree
  std::vector<std::vector<double>> tree_tree_km;

  int n_trees() const { return static_cast<int>(macros.size()); }
  int n_rus() const { return static_cast<int>(smalls.size()); }
  const RuProfile& ru(int id) const;
  double ru_tree_distance_km(int ru, int tree) const;
  double tree_distance_km(int a, int b) const;
};

struct GeneratorParams {
  std::uint64_t seed = 1;
  int n_macro = 4;
  double smalls_per_macro_mean = 4.0;
  Rect area{10.0, 10.0};
  double min_separation_km = -1.0;  // <=0: derived from area / n_macro
  double split71_fraction = 0.5;
  int m = 32;
  double gamma = 32.0;
  double nu = 1.0;
  double detour = 1.4;
};

/// Seeded synthetic layout: macros with a minimum-separation rule, small cells
/// scattered uniformly and attached to their nearest macro.
Layout generate_layout(const GeneratorParams& params);

/// Explicit-coordinate layout. Small cells with tree_id == -1 are attached to
/// their nearest macro.
Layout make_layout(Rect area, std::vector<MacroSite> macros, std::vector<RuProfile> smalls,
                   double detour = 1.4);

/// Euclidean distance scaled by the routing-detour factor.
double fiber_distance(Point2 a, Point2 b, double detour);

/// Trees ordered by macro-to-macro fiber distance from `tree`, self first,
/// ties broken by lower id, truncated to w entries.
std::vector<int> k_nearest_trees(const Layout& layout, int tree, int w);

struct NeighborSets {
  std::vector<std::vector<int>> sets;  // per tree id, self-first
};

NeighborSets neighbor_sets(const Layout& layout, int w);

struct RingOrder {
  std::vector<int> order;
  double tour_length = 0.0;
};

double cyclic_tour_length(const std::vector<Point2>& pts, const std::vector<int>& order);

/// Minimum-length closed tour. Exact dynamic program up to 12 points,
/// nearest-neighbor + 2-opt beyond.
RingOrder ring_order(const std::vector<Point2>& pts);
RingOrder ring_order_exact(const std::vector<Point2>& pts);
RingOrder ring_order_heuristic(const std::vector<Point2>& pts);

}  // namespace vpon
