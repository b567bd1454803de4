#include "vpon/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "vpon/errors.hpp"

namespace vpon {

std::vector<LinearRow> BinaryLinearProgram::all_rows() const {
  std::vector<LinearRow> out = rows;
  for (const auto& cut : cuts) {
    LinearRow row;
    for (int r : cut.members) {
      const auto& trees = x_tree_of_ru[static_cast<std::size_t>(r)];
      for (std::size_t i = 0; i < trees.size(); ++i) {
        if (trees[i] == cut.tree) {
          row.vars.push_back(x_vars_of_ru[static_cast<std::size_t>(r)][i]);
          row.coeffs.push_back(1.0);
        }
      }
    }
    row.vars.push_back(alpha_of_tree[static_cast<std::size_t>(cut.tree)]);
    row.coeffs.push_back(-(static_cast<double>(cut.members.size()) - 1.0));
    row.rhs = 0.0;
    row.sense = RowSense::LessEqual;
    out.push_back(row);
  }
  return out;
}

BinaryLinearProgram build_model(const Layout& layout, const NeighborSets& neighbors,
                                const Costs& costs, int lower_bound, int wavelengths) {
  if (layout.n_rus() == 0) throw ParameterError("build_model: layout has no RUs");
  if (lower_bound < 1) throw ParameterError("build_model: lower_bound must be >= 1");
  if (wavelengths < 1) throw ParameterError("build_model: wavelengths must be >= 1");
  if (costs.c_cap < 0.0 || costs.c_olt < 0.0)
    throw ParameterError("build_model: costs must be non-negative");
  if (static_cast<int>(neighbors.sets.size()) != layout.n_trees())
    throw ParameterError("build_model: neighbor sets do not cover every tree");

  BinaryLinearProgram m;
  m.n_trees = layout.n_trees();
  m.n_rus = layout.n_rus();
  m.lower_bound = lower_bound;

  double alpha_cost = costs.c_cap + wavelengths * costs.c_olt;
  m.alpha_of_tree.resize(static_cast<std::size_t>(m.n_trees));
  for (int t = 0; t < m.n_trees; ++t) {
    m.alpha_of_tree[static_cast<std::size_t>(t)] = static_cast<int>(m.objective.size());
    m.objective.push_back(alpha_cost);
  }

  m.x_vars_of_ru.resize(static_cast<std::size_t>(m.n_rus));
  m.x_tree_of_ru.resize(static_cast<std::size_t>(m.n_rus));
  for (int r = 0; r < m.n_rus; ++r) {
    int home = layout.ru(r).tree_id;
    const auto& cand = neighbors.sets[static_cast<std::size_t>(home)];
    if (cand.empty()) throw ParameterError("build_model: RU has an empty candidate set");
    for (int v : cand) {
      m.x_vars_of_ru[static_cast<std::size_t>(r)].push_back(static_cast<int>(m.objective.size()));
      m.x_tree_of_ru[static_cast<std::size_t>(r)].push_back(v);
      m.objective.push_back(0.0);
    }
  }

  // Assignment: each RU joins exactly one candidate slice.
  for (int r = 0; r < m.n_rus; ++r) {
    LinearRow row;
    row.vars = m.x_vars_of_ru[static_cast<std::size_t>(r)];
    row.coeffs.assign(row.vars.size(), 1.0);
    row.rhs = 1.0;
    row.sense = RowSense::Equal;
    m.rows.push_back(row);
  }
  // Linking: members only on activated trees.
  for (int t = 0; t < m.n_trees; ++t) {
    LinearRow row;
    for (int r = 0; r < m.n_rus; ++r) {
      const auto& trees = m.x_tree_of_ru[static_cast<std::size_t>(r)];
      for (std::size_t i = 0; i < trees.size(); ++i) {
        if (trees[i] == t) {
          row.vars.push_back(m.x_vars_of_ru[static_cast<std::size_t>(r)][i]);
          row.coeffs.push_back(1.0);
        }
      }
    }
    row.vars.push_back(m.alpha_of_tree[static_cast<std::size_t>(t)]);
    row.coeffs.push_back(-static_cast<double>(m.n_rus));
    row.rhs = 0.0;
    row.sense = RowSense::LessEqual;
    m.rows.push_back(row);
  }
  // Completeness: all RUs placed.
  {
    LinearRow row;
    for (int r = 0; r < m.n_rus; ++r)
      for (int v : m.x_vars_of_ru[static_cast<std::size_t>(r)]) {
        row.vars.push_back(v);
        row.coeffs.push_back(1.0);
      }
    row.rhs = static_cast<double>(m.n_rus);
    row.sense = RowSense::Equal;
    m.rows.push_back(row);
  }
  // Activated-tree floor, raised by the iterative loop.
  {
    LinearRow row;
    row.vars = m.alpha_of_tree;
    row.coeffs.assign(row.vars.size(), 1.0);
    row.rhs = static_cast<double>(lower_bound);
    row.sense = RowSense::GreaterEqual;
    m.bound_row = static_cast<int>(m.rows.size());
    m.rows.push_back(row);
  }
  return m;
}

void set_lower_bound(BinaryLinearProgram& model, int lower_bound) {
  if (lower_bound < 1) throw ParameterError("set_lower_bound: lower_bound must be >= 1");
  if (model.bound_row < 0) throw ParameterError("set_lower_bound: model has no bound row");
  model.lower_bound = lower_bound;
  model.rows[static_cast<std::size_t>(model.bound_row)].rhs = static_cast<double>(lower_bound);
}

void add_nogood_cut(BinaryLinearProgram& model, int tree, std::vector<int> members) {
  if (members.empty()) throw ParameterError("add_nogood_cut: empty member set");
  if (tree < 0 || tree >= model.n_trees) throw ParameterError("add_nogood_cut: unknown tree");
  std::sort(members.begin(), members.end());
  for (int r : members) {
    if (r < 0 || r >= model.n_rus) throw ParameterError("add_nogood_cut: unknown RU");
    const auto& trees = model.x_tree_of_ru[static_cast<std::size_t>(r)];
    if (std::find(trees.begin(), trees.end(), tree) == trees.end())
      throw ParameterError("add_nogood_cut: RU cannot reach the cut tree");
  }
  model.cuts.push_back({tree, std::move(members)});
}

bool check_assignment(const BinaryLinearProgram& model, const std::vector<int>& assignment,
                      std::string* why) {
  if (static_cast<int>(assignment.size()) != model.n_vars()) {
    if (why) *why = "assignment length mismatch";
    return false;
  }
  for (int v : assignment)
    if (v != 0 && v != 1) {
      if (why) *why = "non-binary value";
      return false;
    }
  auto rows = model.all_rows();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    double lhs = 0.0;
    for (std::size_t k = 0; k < row.vars.size(); ++k)
      lhs += row.coeffs[k] * assignment[static_cast<std::size_t>(row.vars[k])];
    bool ok = row.sense == RowSense::LessEqual      ? lhs <= row.rhs + 1e-9
              : row.sense == RowSense::GreaterEqual ? lhs >= row.rhs - 1e-9
                                                    : std::abs(lhs - row.rhs) <= 1e-9;
    if (!ok) {
      if (why) {
        std::ostringstream os;
        os << "row " << i << " violated: lhs=" << lhs << " rhs=" << row.rhs;
        *why = os.str();
      }
      return false;
    }
  }
  return true;
}

namespace {

/// Search state for the exact solve. Alpha values are branched explicitly;
/// X values are completed by backtracking over RUs (the objective has no X
/// terms, so any completion of a given alpha pattern costs the same). The
/// completion runs forward checking over the cut pool: once a cut has all but
/// one member on its tree, that tree is struck from the last member's
/// candidates, and an RU with no candidates left fails the branch outright.
struct BnbSearch {
  const BinaryLinearProgram& m;
  std::vector<int> alpha_order;     // branch order, descending tree size
  std::vector<int> alpha_val;       // -1 unset / 0 / 1 per tree
  std::vector<int> ru_order;        // completion order, most cut-bound first
  std::vector<int> ru_choice;       // chosen candidate index per RU, -1 unset
  std::vector<int> cut_count;       // members currently on the cut tree, per cut
  std::vector<std::vector<std::pair<int, int>>> ru_cuts;  // per RU: (cut, needed tree)
  std::vector<std::vector<std::pair<int, int>>> cut_slots;  // per cut: (member, cand index)
  std::vector<std::vector<int>> forbid;  // per RU x cand index: saturated-cut count
  std::vector<int> avail;                // open, unforbidden candidates per RU
  double best_obj = std::numeric_limits<double>::infinity();
  bool found = false;
  std::vector<int> best_alpha;
  std::vector<int> best_choice;
  long long nodes = 0;

  explicit BnbSearch(const BinaryLinearProgram& model) : m(model) {
    alpha_val.assign(static_cast<std::size_t>(m.n_trees), -1);
    ru_choice.assign(static_cast<std::size_t>(m.n_rus), -1);
    cut_count.assign(m.cuts.size(), 0);
    ru_cuts.resize(static_cast<std::size_t>(m.n_rus));
    cut_slots.resize(m.cuts.size());
    for (std::size_t c = 0; c < m.cuts.size(); ++c) {
      for (int r : m.cuts[c].members) {
        ru_cuts[static_cast<std::size_t>(r)].push_back({static_cast<int>(c), m.cuts[c].tree});
        const auto& cand = m.x_tree_of_ru[static_cast<std::size_t>(r)];
        for (std::size_t i = 0; i < cand.size(); ++i)
          if (cand[i] == m.cuts[c].tree) {
            cut_slots[c].push_back({r, static_cast<int>(i)});
            break;
          }
      }
    }
    forbid.resize(static_cast<std::size_t>(m.n_rus));
    for (int r = 0; r < m.n_rus; ++r)
      forbid[static_cast<std::size_t>(r)]
          .assign(m.x_tree_of_ru[static_cast<std::size_t>(r)].size(), 0);
    avail.assign(static_cast<std::size_t>(m.n_rus), 0);

    // Tree size = number of RUs that list the tree as a candidate.
    std::vector<int> coverage(static_cast<std::size_t>(m.n_trees), 0);
    for (int r = 0; r < m.n_rus; ++r)
      for (int t : m.x_tree_of_ru[static_cast<std::size_t>(r)])
        ++coverage[static_cast<std::size_t>(t)];
    alpha_order.resize(static_cast<std::size_t>(m.n_trees));
    std::iota(alpha_order.begin(), alpha_order.end(), 0);
    std::sort(alpha_order.begin(), alpha_order.end(), [&](int a, int b) {
      if (coverage[static_cast<std::size_t>(a)] != coverage[static_cast<std::size_t>(b)])
        return coverage[static_cast<std::size_t>(a)] > coverage[static_cast<std::size_t>(b)];
      return a < b;
    });

    ru_order.resize(static_cast<std::size_t>(m.n_rus));
    std::iota(ru_order.begin(), ru_order.end(), 0);
    std::sort(ru_order.begin(), ru_order.end(), [&](int a, int b) {
      std::size_t ca = ru_cuts[static_cast<std::size_t>(a)].size();
      std::size_t cb = ru_cuts[static_cast<std::size_t>(b)].size();
      if (ca != cb) return ca > cb;
      return a < b;
    });
  }

  double alpha_cost(int t) const {
    return m.objective[static_cast<std::size_t>(
        m.alpha_of_tree[static_cast<std::size_t>(t)])];
  }

  /// Open cost so far plus the cheapest completion that can still reach the
  /// activation floor. Infinity when the floor is already unreachable.
  double bound() const {
    double cost = 0.0;
    int open = 0;
    std::vector<double> unset_costs;
    for (int t = 0; t < m.n_trees; ++t) {
      if (alpha_val[static_cast<std::size_t>(t)] == 1) {
        cost += alpha_cost(t);
        ++open;
      } else if (alpha_val[static_cast<std::size_t>(t)] == -1) {
        unset_costs.push_back(alpha_cost(t));
      }
    }
    int need = m.lower_bound - open;
    if (need > 0) {
      if (need > static_cast<int>(unset_costs.size()))
        return std::numeric_limits<double>::infinity();
      std::sort(unset_costs.begin(), unset_costs.end());
      for (int i = 0; i < need; ++i) cost += unset_costs[static_cast<std::size_t>(i)];
    }
    return cost;
  }

  /// Every RU must keep at least one candidate that is open or undecided.
  bool coverage_ok() const {
    for (int r = 0; r < m.n_rus; ++r) {
      bool any = false;
      for (int t : m.x_tree_of_ru[static_cast<std::size_t>(r)]) {
        if (alpha_val[static_cast<std::size_t>(t)] != 0) {
          any = true;
          break;
        }
      }
      if (!any) return false;
    }
    return true;
  }

  bool candidate_open(int r, int i) const {
    int v = m.x_tree_of_ru[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)];
    return alpha_val[static_cast<std::size_t>(v)] == 1 &&
           forbid[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)] == 0;
  }

  /// Strikes the cut's tree from every member's candidates. Returns false on
  /// a wipeout (some unassigned member has no candidate left).
  bool saturate(std::size_t c) {
    bool ok = true;
    for (auto [s, slot] : cut_slots[c]) {
      int v = m.cuts[c].tree;
      if (forbid[static_cast<std::size_t>(s)][static_cast<std::size_t>(slot)]++ == 0 &&
          alpha_val[static_cast<std::size_t>(v)] == 1) {
        if (--avail[static_cast<std::size_t>(s)] == 0 &&
            ru_choice[static_cast<std::size_t>(s)] == -1)
          ok = false;
      }
    }
    return ok;
  }

  void unsaturate(std::size_t c) {
    for (auto [s, slot] : cut_slots[c]) {
      int v = m.cuts[c].tree;
      if (--forbid[static_cast<std::size_t>(s)][static_cast<std::size_t>(slot)] == 0 &&
          alpha_val[static_cast<std::size_t>(v)] == 1)
        ++avail[static_cast<std::size_t>(s)];
    }
  }

  /// Adds (dir = +1) or removes (dir = -1) RU r's presence on tree v in the
  /// cut counters, propagating saturation both ways. Never wipes out on
  /// removal. Returns false on a wipeout while adding.
  bool shift_cuts(int r, int v, int dir) {
    bool ok = true;
    for (auto [c, tree] : ru_cuts[static_cast<std::size_t>(r)]) {
      if (tree != v) continue;
      auto uc = static_cast<std::size_t>(c);
      int threshold = static_cast<int>(m.cuts[uc].members.size()) - 1;
      if (dir > 0) {
        if (++cut_count[uc] == threshold && !saturate(uc)) ok = false;
      } else {
        if (cut_count[uc]-- == threshold) unsaturate(uc);
      }
    }
    return ok;
  }

  bool assign_rus(int depth) {
    ++nodes;
    if (depth == m.n_rus) return true;
    int r = ru_order[static_cast<std::size_t>(depth)];
    const auto& trees = m.x_tree_of_ru[static_cast<std::size_t>(r)];
    for (std::size_t i = 0; i < trees.size(); ++i) {
      if (!candidate_open(r, static_cast<int>(i))) continue;
      int v = trees[i];
      ru_choice[static_cast<std::size_t>(r)] = static_cast<int>(i);
      bool ok = shift_cuts(r, v, +1);
      if (ok && assign_rus(depth + 1)) return true;
      shift_cuts(r, v, -1);
      ru_choice[static_cast<std::size_t>(r)] = -1;
    }
    return false;
  }

  /// Leaf completion: reset the propagation state for this alpha pattern,
  /// apply singleton cuts, then backtrack over the RUs.
  bool complete() {
    std::fill(ru_choice.begin(), ru_choice.end(), -1);
    std::fill(cut_count.begin(), cut_count.end(), 0);
    for (auto& f : forbid) std::fill(f.begin(), f.end(), 0);
    for (int r = 0; r < m.n_rus; ++r) {
      int open = 0;
      const auto& cand = m.x_tree_of_ru[static_cast<std::size_t>(r)];
      for (int t : cand)
        if (alpha_val[static_cast<std::size_t>(t)] == 1) ++open;
      if (open == 0) return false;
      avail[static_cast<std::size_t>(r)] = open;
    }
    // A one-member cut is saturated from the start.
    for (std::size_t c = 0; c < m.cuts.size(); ++c)
      if (m.cuts[c].members.size() == 1 && !saturate(c)) return false;
    return assign_rus(0);
  }

  void branch_alpha(int depth) {
    ++nodes;
    double b = bound();
    if (!(b < best_obj - 1e-9)) return;
    if (!coverage_ok()) return;
    if (depth == m.n_trees) {
      int open = 0;
      for (int v : alpha_val) open += v;
      if (open < m.lower_bound) return;  // bound() already filters; belt and braces
      if (!complete()) return;
      double cost = 0.0;
      for (int t = 0; t < m.n_trees; ++t)
        if (alpha_val[static_cast<std::size_t>(t)] == 1) cost += alpha_cost(t);
      if (cost < best_obj - 1e-9) {
        best_obj = cost;
        found = true;
        best_alpha = alpha_val;
        best_choice = ru_choice;
      }
      return;
    }
    int t = alpha_order[static_cast<std::size_t>(depth)];
    for (int val : {0, 1}) {
      alpha_val[static_cast<std::size_t>(t)] = val;
      branch_alpha(depth + 1);
      alpha_val[static_cast<std::size_t>(t)] = -1;
    }
  }
};

}  // namespace

BnbResult solve_bnb(const BinaryLinearProgram& model) {
  for (int r = 0; r < model.n_rus; ++r)
    for (int xv : model.x_vars_of_ru[static_cast<std::size_t>(r)])
      if (model.objective[static_cast<std::size_t>(xv)] != 0.0)
        throw ParameterError("solve_bnb: bounding assumes an alpha-only objective");

  BnbSearch search(model);
  search.branch_alpha(0);

  BnbResult out;
  out.nodes = search.nodes;
  if (!search.found) return out;
  out.feasible = true;
  out.objective = search.best_obj;
  out.assignment.assign(static_cast<std::size_t>(model.n_vars()), 0);
  for (int t = 0; t < model.n_trees; ++t)
    out.assignment[static_cast<std::size_t>(model.alpha_of_tree[static_cast<std::size_t>(t)])] =
        search.best_alpha[static_cast<std::size_t>(t)];
  out.slices.assign(static_cast<std::size_t>(model.n_trees), {});
  for (int r = 0; r < model.n_rus; ++r) {
    int i = search.best_choice[static_cast<std::size_t>(r)];
    int v = model.x_tree_of_ru[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)];
    out.assignment[static_cast<std::size_t>(
        model.x_vars_of_ru[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)])] = 1;
    out.slices[static_cast<std::size_t>(v)].push_back(r);
  }
  return out;
}

SliceSolution optimize_slices(const Layout& layout, double load, double threshold_us,
                              int max_iterations, const ChannelConfig& cfg,
                              const LadderSet& ladders, const OptimizeOptions& opts) {
  if (max_iterations < 1) throw ParameterError("optimize_slices: max_iterations must be >= 1");
  if (!(threshold_us > 0.0)) throw ParameterError("optimize_slices: threshold must be > 0");
  cfg.validate();
  auto t0 = std::chrono::steady_clock::now();

  SliceLatencyFn latency = opts.latency_override;
  if (!latency) {
    latency = [&layout, load, &cfg, &ladders, &opts](
                  int tree, const std::vector<int>& members) -> std::optional<double> {
      try {
        return slice_latency(members, layout, tree, load, cfg, ladders, opts.latency).total_us;
      } catch (const OverloadError&) {
        return std::nullopt;
      }
    };
  }

  NeighborSets neighbors = neighbor_sets(layout, opts.w);
  BinaryLinearProgram model = build_model(layout, neighbors, opts.costs, 1, cfg.wavelengths);

  SliceSolution sol;
  auto finish = [&](bool ok) {
    sol.feasible = ok;
    sol.total_cuts = static_cast<int>(model.cuts.size());
    sol.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                      .count();
    return sol;
  };

  BnbResult bnb = solve_bnb(model);
  if (!bnb.feasible) return finish(false);

  auto non_empty = [](const BnbResult& res) {
    int n = 0;
    for (const auto& s : res.slices)
      if (!s.empty()) ++n;
    return n;
  };
  int lb = std::max(1, non_empty(bnb));
  set_lower_bound(model, lb);

  // Latency of a membership depends only on (tree, members); identical slices
  // reappear across iterations, so evaluations are memoized.
  std::map<std::pair<int, std::vector<int>>, std::optional<double>> latency_cache;
  auto eval = [&](int tree, const std::vector<int>& members) {
    auto key = std::make_pair(tree, members);
    auto it = latency_cache.find(key);
    if (it == latency_cache.end())
      it = latency_cache.emplace(key, latency(tree, members)).first;
    return it->second;
  };

  int iteration_id = 0;
  int total_iterations = 0;
  for (;;) {
    std::vector<std::pair<int, std::vector<int>>> violating;
    std::map<int, double> latencies;
    for (int t = 0; t < layout.n_trees(); ++t) {
      const auto& members = bnb.slices[static_cast<std::size_t>(t)];
      if (members.empty()) continue;
      auto val = eval(t, members);
      if (val && *val <= threshold_us)
        latencies[t] = *val;
      else
        violating.push_back({t, members});
    }

    IterationRecord rec;
    rec.iteration = total_iterations;
    rec.lb = lb;
    rec.violations = static_cast<int>(violating.size());
    rec.cuts = static_cast<int>(model.cuts.size());
    rec.incumbent = bnb.objective;
    sol.iterations.push_back(rec);

    if (violating.empty()) {
      // Drop activated-but-empty trees from the report; they only exist to
      // satisfy an escalated floor.
      for (int t = 0; t < layout.n_trees(); ++t) {
        const auto& members = bnb.slices[static_cast<std::size_t>(t)];
        if (members.empty()) continue;
        sol.active_trees.push_back(t);
        sol.slices[t] = members;
        sol.latency_us[t] = latencies[t];
      }
      double alpha_cost = opts.costs.c_cap + cfg.wavelengths * opts.costs.c_olt;
      sol.objective = alpha_cost * static_cast<double>(sol.active_trees.size());
      return finish(true);
    }

    if (iteration_id >= max_iterations) {
      lb += 1;
      if (lb > layout.n_trees()) return finish(false);
      set_lower_bound(model, lb);
      iteration_id = 0;
    } else {
      ++iteration_id;
    }
    for (auto& [tree, members] : violating) add_nogood_cut(model, tree, members);
    ++total_iterations;

    bnb = solve_bnb(model);
    if (!bnb.feasible) return finish(false);
  }
}

}  // namespace vpon
