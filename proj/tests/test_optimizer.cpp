#include <doctest.h>

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vpon/errors.hpp"
#include "vpon/latency_model.hpp"
#include "vpon/layout.hpp"
#include "vpon/optimizer.hpp"

using namespace vpon;

namespace {

Layout tight_two_tree_layout() {
  std::vector<MacroSite> macros = {{0, {1.0, 1.0}}, {1, {1.5, 1.0}}};
  std::vector<RuProfile> smalls;
  for (int i = 0; i < 6; ++i) {
    RuProfile ru;
    ru.id = i;
    ru.split = i % 2 == 0 ? Split::S71 : Split::S72;
    ru.m = 32;
    ru.gamma = 32.0;
    ru.nu = 1.0;
    ru.position = {0.8 + 0.15 * i, 1.1};
    smalls.push_back(ru);
  }
  return make_layout({4.0, 4.0}, macros, smalls);
}

// Enumerates every per-RU candidate choice; alpha completion is implied
// because all activation vars share one cost.
struct ExhaustiveBest {
  bool feasible = false;
  double objective = 0.0;
};

ExhaustiveBest enumerate_assignments(const BinaryLinearProgram& model, double alpha_cost) {
  ExhaustiveBest best;
  std::vector<std::size_t> choice(static_cast<std::size_t>(model.n_rus), 0);
  while (true) {
    std::set<int> used;
    std::vector<std::vector<int>> slices(static_cast<std::size_t>(model.n_trees));
    for (int r = 0; r < model.n_rus; ++r) {
      int tree = model.x_tree_of_ru[static_cast<std::size_t>(r)]
                                   [choice[static_cast<std::size_t>(r)]];
      used.insert(tree);
      slices[static_cast<std::size_t>(tree)].push_back(r);
    }
    bool ok = true;
    for (const auto& cut : model.cuts) {
      const auto& slice = slices[static_cast<std::size_t>(cut.tree)];
      bool contains_all = std::includes(slice.begin(), slice.end(), cut.members.begin(),
                                        cut.members.end());
      if (contains_all) {
        ok = false;
        break;
      }
    }
    if (ok) {
      double cost = alpha_cost * std::max(static_cast<int>(used.size()), model.lower_bound);
      if (!best.feasible || cost < best.objective) {
        best.feasible = true;
        best.objective = cost;
      }
    }
    // Odometer increment over the per-RU candidate lists.
    int r = 0;
    for (; r < model.n_rus; ++r) {
      auto& c = choice[static_cast<std::size_t>(r)];
      if (++c < model.x_tree_of_ru[static_cast<std::size_t>(r)].size()) break;
      c = 0;
    }
    if (r == model.n_rus) break;
  }
  return best;
}

}  // namespace

TEST_CASE("model structure for a single tree") {
  std::vector<MacroSite> macros = {{0, {1.0, 1.0}}};
  std::vector<RuProfile> smalls;
  for (int i = 0; i < 3; ++i) {
    RuProfile ru;
    ru.id = i;
    ru.m = 32;
    ru.gamma = 32.0;
    ru.position = {0.5 + 0.5 * i, 0.5};
    smalls.push_back(ru);
  }
  Layout layout = make_layout({2.0, 2.0}, macros, smalls);
  BinaryLinearProgram model = build_model(layout, neighbor_sets(layout, 1), Costs{}, 1, 4);
  CHECK(model.n_vars() == 4);            // 1 alpha + 3 X
  CHECK(model.rows.size() == 6u);        // 3 assignment + 1 linking + 1 completeness + bound
  CHECK(model.bound_row >= 0);
  BnbResult res = solve_bnb(model);
  REQUIRE(res.feasible);
  CHECK(res.objective == doctest::Approx(1.0));
  CHECK(res.assignment[static_cast<std::size_t>(model.alpha_of_tree[0])] == 1);
  CHECK(res.slices[0] == std::vector<int>{0, 1, 2});
}

TEST_CASE("model structure for four trees and twelve RUs") {
  GeneratorParams params;
  params.seed = 21;
  params.n_macro = 4;
  params.smalls_per_macro_mean = 3.0;
  params.area = {4.0, 4.0};
  Layout layout = generate_layout(params);
  REQUIRE(layout.n_rus() == 12);
  BinaryLinearProgram model = build_model(layout, neighbor_sets(layout, 2), Costs{}, 1, 4);
  CHECK(model.n_vars() == 4 + 12 * 2);
  CHECK(model.rows.size() == 12u + 4u + 1u + 1u);
  for (int r = 0; r < 12; ++r) {
    REQUIRE(model.x_tree_of_ru[static_cast<std::size_t>(r)].size() == 2u);
    // Self-first candidate order.
    CHECK(model.x_tree_of_ru[static_cast<std::size_t>(r)][0] == layout.ru(r).tree_id);
  }
}

TEST_CASE("activation cost folds the OLT share per wavelength") {
  Layout layout = tight_two_tree_layout();
  Costs costs;
  costs.c_cap = 2.0;
  costs.c_olt = 0.25;
  int wavelengths = 4;
  BinaryLinearProgram model = build_model(layout, neighbor_sets(layout, 2), costs, 1, wavelengths);
  for (int t = 0; t < model.n_trees; ++t)
    CHECK(model.objective[static_cast<std::size_t>(model.alpha_of_tree[static_cast<std::size_t>(t)])] ==
          doctest::Approx(2.0 + wavelengths * 0.25));
  for (int r = 0; r < model.n_rus; ++r)
    for (int var : model.x_vars_of_ru[static_cast<std::size_t>(r)])
      CHECK(model.objective[static_cast<std::size_t>(var)] == 0.0);
}

TEST_CASE("branch and bound matches exhaustive enumeration") {
  GeneratorParams params;
  params.seed = 33;
  params.n_macro = 3;
  params.smalls_per_macro_mean = 3.0;
  params.area = {4.0, 4.0};
  Layout layout = generate_layout(params);
  REQUIRE(layout.n_rus() == 9);

  for (int w : {2, 3}) {
    for (int lb : {1, 2, 3}) {
      BinaryLinearProgram model = build_model(layout, neighbor_sets(layout, w), Costs{}, lb, 4);
      // A few cuts on reachable trees to exercise the constraint handling.
      add_nogood_cut(model, layout.ru(0).tree_id, {0});
      for (int t = 0; t < layout.n_trees(); ++t) {
        if (layout.tree_members[static_cast<std::size_t>(t)].size() < 2) continue;
        std::vector<int> pair(layout.tree_members[static_cast<std::size_t>(t)].begin(),
                              layout.tree_members[static_cast<std::size_t>(t)].begin() + 2);
        add_nogood_cut(model, t, pair);
        break;
      }
      BnbResult got = solve_bnb(model);
      ExhaustiveBest want = enumerate_assignments(model, 1.0);
      REQUIRE(got.feasible == want.feasible);
      if (got.feasible) {
        CHECK(got.objective == doctest::Approx(want.objective));
        std::string why;
        CHECK(check_assignment(model, got.assignment, &why));
        INFO(why);
      }
    }
  }
}

TEST_CASE("branch and bound is deterministic") {
  GeneratorParams params;
  params.seed = 33;
  params.n_macro = 3;
  params.smalls_per_macro_mean = 3.0;
  Layout layout = generate_layout(params);
  BinaryLinearProgram model = build_model(layout, neighbor_sets(layout, 2), Costs{}, 1, 4);
  BnbResult a = solve_bnb(model);
  BnbResult b = solve_bnb(model);
  CHECK(a.assignment == b.assignment);
  CHECK(a.nodes == b.nodes);
  CHECK(a.slices == b.slices);
}

TEST_CASE("infeasible bound and contradictory cuts") {
  Layout layout = tight_two_tree_layout();
  BinaryLinearProgram model = build_model(layout, neighbor_sets(layout, 2), Costs{}, 3, 4);
  CHECK_FALSE(solve_bnb(model).feasible);  // only two trees exist

  BinaryLinearProgram pinned = build_model(layout, neighbor_sets(layout, 1), Costs{}, 1, 4);
  // w = 1 pins RU 0 to its home tree; a singleton cut there bars it from any
  // slice, so no placement remains.
  add_nogood_cut(pinned, layout.ru(0).tree_id, {0});
  CHECK_FALSE(solve_bnb(pinned).feasible);
}

TEST_CASE("a no-good cut removes exactly the forbidden configuration") {
  Layout layout = tight_two_tree_layout();
  BinaryLinearProgram model = build_model(layout, neighbor_sets(layout, 2), Costs{}, 1, 4);
  BnbResult before = solve_bnb(model);
  REQUIRE(before.feasible);
  CHECK(before.objective == doctest::Approx(1.0));

  // Forbid the winning slice; the next solution must avoid that exact subset.
  int tree = -1;
  for (int t = 0; t < 2; ++t)
    if (!before.slices[static_cast<std::size_t>(t)].empty()) tree = t;
  REQUIRE(tree >= 0);
  add_nogood_cut(model, tree, before.slices[static_cast<std::size_t>(tree)]);
  BnbResult after = solve_bnb(model);
  REQUIRE(after.feasible);
  const auto& slice = after.slices[static_cast<std::size_t>(tree)];
  CHECK_FALSE(std::includes(slice.begin(), slice.end(),
                            before.slices[static_cast<std::size_t>(tree)].begin(),
                            before.slices[static_cast<std::size_t>(tree)].end()));
  CHECK(check_assignment(model, after.assignment));
}

TEST_CASE("check_assignment flags violated rows") {
  Layout layout = tight_two_tree_layout();
  BinaryLinearProgram model = build_model(layout, neighbor_sets(layout, 2), Costs{}, 1, 4);
  BnbResult res = solve_bnb(model);
  REQUIRE(res.feasible);
  CHECK(check_assignment(model, res.assignment));

  std::vector<int> broken = res.assignment;
  // Drop one RU's assignment entirely.
  for (int var : model.x_vars_of_ru[0]) broken[static_cast<std::size_t>(var)] = 0;
  std::string why;
  CHECK_FALSE(check_assignment(model, broken, &why));
  CHECK_FALSE(why.empty());

  // Assign to a closed tree.
  std::vector<int> closed = res.assignment;
  for (int t = 0; t < model.n_trees; ++t)
    closed[static_cast<std::size_t>(model.alpha_of_tree[static_cast<std::size_t>(t)])] = 0;
  CHECK_FALSE(check_assignment(model, closed));
}

TEST_CASE("low load consolidates onto one MEC") {
  Layout layout = tight_two_tree_layout();
  ChannelConfig cfg;
  LadderSet ladders;
  OptimizeOptions opts;
  opts.w = 2;
  SliceSolution sol = optimize_slices(layout, 0.05, 100.0, 50, cfg, ladders, opts);
  REQUIRE(sol.feasible);
  CHECK(sol.active_trees.size() == 1u);
  CHECK(sol.objective == doctest::Approx(1.0));
  REQUIRE(sol.slices.size() == 1u);
  CHECK(sol.slices.begin()->second.size() == 6u);
  CHECK(sol.latency_us.begin()->second <= 100.0);
}

TEST_CASE("an unreachable threshold is reported infeasible") {
  Layout layout = tight_two_tree_layout();
  ChannelConfig cfg;
  LadderSet ladders;
  OptimizeOptions opts;
  opts.w = 2;
  SliceSolution sol = optimize_slices(layout, 0.3, 1.0, 10, cfg, ladders, opts);
  CHECK_FALSE(sol.feasible);
  CHECK(sol.active_trees.empty());
  CHECK_FALSE(sol.iterations.empty());
}

TEST_CASE("optimize_slices matches a brute-force partition search") {
  GeneratorParams params;
  params.seed = 51;
  params.n_macro = 4;
  params.smalls_per_macro_mean = 4.0;
  params.area = {4.0, 4.0};
  Layout layout = generate_layout(params);
  REQUIRE(layout.n_rus() == 16);

  ChannelConfig cfg;
  LadderSet ladders;
  const double threshold = 100.0;
  const int w = 2;
  NeighborSets nbr = neighbor_sets(layout, w);

  for (double load : {0.3, 0.6}) {
    // Oracle: try every per-RU candidate choice, price each distinct slice once.
    std::map<std::pair<int, std::vector<int>>, bool> ok_cache;
    auto slice_ok = [&](int tree, const std::vector<int>& members) {
      auto key = std::make_pair(tree, members);
      auto it = ok_cache.find(key);
      if (it != ok_cache.end()) return it->second;
      bool ok;
      try {
        ok = slice_latency(members, layout, tree, load, cfg, ladders).total_us <= threshold;
      } catch (const OverloadError&) {
        ok = false;
      }
      ok_cache.emplace(key, ok);
      return ok;
    };

    int best = -1;
    const int n = layout.n_rus();
    for (int mask = 0; mask < (1 << n); ++mask) {
      std::vector<std::vector<int>> slices(static_cast<std::size_t>(layout.n_trees()));
      for (int r = 0; r < n; ++r) {
        const auto& cands = nbr.sets[static_cast<std::size_t>(layout.ru(r).tree_id)];
        int tree = cands[static_cast<std::size_t>((mask >> r) & 1)];
        slices[static_cast<std::size_t>(tree)].push_back(r);
      }
      int active = 0;
      bool ok = true;
      for (int t = 0; t < layout.n_trees() && ok; ++t) {
        if (slices[static_cast<std::size_t>(t)].empty()) continue;
        ++active;
        ok = slice_ok(t, slices[static_cast<std::size_t>(t)]);
      }
      if (ok && (best < 0 || active < best)) best = active;
    }

    OptimizeOptions opts;
    opts.w = w;
    SliceSolution sol = optimize_slices(layout, load, threshold, 500, cfg, ladders, opts);
    REQUIRE(sol.feasible == (best > 0));
    if (sol.feasible) CHECK(static_cast<int>(sol.active_trees.size()) == best);
  }
}

TEST_CASE("solution invariants hold on a mid-size instance") {
  GeneratorParams params;
  params.seed = 77;
  params.n_macro = 5;
  params.smalls_per_macro_mean = 4.0;
  params.area = {4.0, 4.0};
  params.split71_fraction = 0.3;
  Layout layout = generate_layout(params);
  ChannelConfig cfg;
  LadderSet ladders;
  OptimizeOptions opts;
  opts.w = 3;
  NeighborSets nbr = neighbor_sets(layout, opts.w);
  const double load = 0.25;
  SliceSolution sol = optimize_slices(layout, load, 100.0, 60, cfg, ladders, opts);
  REQUIRE(sol.feasible);

  std::vector<int> seen(static_cast<std::size_t>(layout.n_rus()), 0);
  for (const auto& [tree, members] : sol.slices) {
    CHECK_FALSE(members.empty());
    CHECK(std::find(sol.active_trees.begin(), sol.active_trees.end(), tree) !=
          sol.active_trees.end());
    for (int r : members) {
      seen[static_cast<std::size_t>(r)] += 1;
      const auto& cands = nbr.sets[static_cast<std::size_t>(layout.ru(r).tree_id)];
      CHECK(std::find(cands.begin(), cands.end(), tree) != cands.end());
    }
    REQUIRE(sol.latency_us.count(tree) == 1);
    CHECK(sol.latency_us.at(tree) <= 100.0);
    CHECK(sol.latency_us.at(tree) ==
          doctest::Approx(slice_latency(members, layout, tree, load, cfg, ladders).total_us));
  }
  for (int c : seen) CHECK(c == 1);
  CHECK(sol.objective == doctest::Approx(static_cast<double>(sol.active_trees.size())));
  CHECK(sol.total_cuts >= 0);
  CHECK(sol.wall_ms >= 0.0);

  int prev_iter = 0;
  int prev_lb = 0;
  int prev_cuts = 0;
  for (const auto& rec : sol.iterations) {
    CHECK(rec.iteration >= prev_iter);
    CHECK(rec.lb >= prev_lb);
    CHECK(rec.cuts >= prev_cuts);
    prev_iter = rec.iteration;
    prev_lb = rec.lb;
    prev_cuts = rec.cuts;
  }
  CHECK(sol.iterations.back().violations == 0);
}

TEST_CASE("latency override steers the search") {
  Layout layout = tight_two_tree_layout();
  ChannelConfig cfg;
  LadderSet ladders;

  OptimizeOptions capped;
  capped.w = 2;
  capped.latency_override = [](int, const std::vector<int>& members) {
    return members.size() <= 3 ? std::optional<double>(10.0) : std::nullopt;
  };
  SliceSolution sol = optimize_slices(layout, 0.3, 100.0, 50, cfg, ladders, capped);
  REQUIRE(sol.feasible);
  CHECK(sol.active_trees.size() == 2u);  // six RUs, three per slice at most
  for (const auto& [tree, members] : sol.slices) {
    CHECK(members.size() <= 3u);
    CHECK(sol.latency_us.at(tree) == doctest::Approx(10.0));
  }

  OptimizeOptions hopeless;
  hopeless.w = 2;
  hopeless.latency_override = [](int, const std::vector<int>&) {
    return std::optional<double>();
  };
  SliceSolution bad = optimize_slices(layout, 0.3, 100.0, 8, cfg, ladders, hopeless);
  CHECK_FALSE(bad.feasible);
}

TEST_CASE("a larger iteration budget never hurts") {
  GeneratorParams params;
  params.seed = 91;
  params.n_macro = 4;
  params.smalls_per_macro_mean = 4.0;
  params.area = {4.0, 4.0};
  params.split71_fraction = 0.3;
  Layout layout = generate_layout(params);
  ChannelConfig cfg;
  LadderSet ladders;
  OptimizeOptions opts;
  opts.w = 2;
  SliceSolution tight = optimize_slices(layout, 0.35, 100.0, 10, cfg, ladders, opts);
  SliceSolution roomy = optimize_slices(layout, 0.35, 100.0, 70, cfg, ladders, opts);
  REQUIRE(roomy.feasible);
  if (tight.feasible) CHECK(roomy.active_trees.size() <= tight.active_trees.size());
}
