#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vpon/latency_model.hpp"
#include "vpon/layout.hpp"
#include "vpon/traffic_model.hpp"
#include "vpon/types.hpp"

namespace vpon {

struct Costs {
  double c_cap = 1.0;  // per activated tree
  double c_olt = 0.0;  // per activated tree, OLT port share
};

enum class RowSense { LessEqual, Equal, GreaterEqual };

struct LinearRow {
  std::vector<int> vars;
  std::vector<double> coeffs;
  double rhs = 0.0;
  RowSense sense = RowSense::LessEqual;
};

/// Forbids one exact (tree, member set) slice configuration:
/// sum of the members' assignment vars <= (|members| - 1) * alpha_tree.
struct NoGoodCut {
  int tree = -1;
  std::vector<int> members;  // sorted RU ids
};

/// 0/1 program over tree-activation vars alpha_v and assignment vars X_{r,v}
/// for v in the w nearest trees of r's home tree.
struct BinaryLinearProgram {
  int n_trees = 0;
  int n_rus = 0;
  std::vector<int> alpha_of_tree;                  // var index per tree
  std::vector<std::vector<int>> x_vars_of_ru;      // var indices per RU
  std::vector<std::vector<int>> x_tree_of_ru;      // candidate tree per X var
  std::vector<double> objective;                   // per var
  std::vector<LinearRow> rows;                     // base constraints incl. bound row
  int bound_row = -1;                              // index of the sum-alpha >= lb row
  std::vector<NoGoodCut> cuts;
  int lower_bound = 0;  // min count of activated trees

  int n_vars() const { return static_cast<int>(objective.size()); }
  std::vector<LinearRow> all_rows() const;  // base rows + cut rows
};

BinaryLinearProgram build_model(const Layout& layout, const NeighborSets& neighbors,
                                const Costs& costs, int lower_bound, int wavelengths);

void set_lower_bound(BinaryLinearProgram& model, int lower_bound);
void add_nogood_cut(BinaryLinearProgram& model, int tree, std::vector<int> members);

struct BnbResult {
  bool feasible = false;
  double objective = 0.0;
  std::vector<int> assignment;          // values per var
  std::vector<std::vector<int>> slices;  // per tree, sorted RU ids
  long long nodes = 0;
};

/// Deterministic exact branch and bound. Branches on alpha vars (largest tree
/// first), assignment vars are completed by backtracking per RU.
BnbResult solve_bnb(const BinaryLinearProgram& model);

/// True when the assignment satisfies every row of the model.
bool check_assignment(const BinaryLinearProgram& model, const std::vector<int>& assignment,
                      std::string* why = nullptr);

struct IterationRecord {
  int iteration = 0;
  int lb = 0;
  int violations = 0;
  int cuts = 0;
  double incumbent = 0.0;  // objective of this round's solution
};

struct SliceSolution {
  bool feasible = false;
  double objective = 0.0;
  std::vector<int> active_trees;
  std::map<int, std::vector<int>> slices;      // tree -> sorted RU ids
  std::map<int, double> latency_us;            // per active tree
  std::vector<IterationRecord> iterations;
  int total_cuts = 0;
  double wall_ms = 0.0;
};

/// Latency of a candidate slice; nullopt means overloaded (treated as a
/// threshold violation).
using SliceLatencyFn =
    std::function<std::optional<double>(int tree, const std::vector<int>& members)>;

struct OptimizeOptions {
  int w = 4;  // candidate trees per RU
  Costs costs{};
  LatencyOptions latency{};
  SliceLatencyFn latency_override;  // tests / sim-in-loop
};

/// Cutting-plane loop: solve the placement program, price each non-empty
/// slice with the latency model, forbid violating slices, repeat. The tree
/// lower bound starts at the count of non-empty slices and is raised when an
/// iteration budget is exhausted.
SliceSolution optimize_slices(const Layout& layout, double load, double threshold_us,
                              int max_iterations, const ChannelConfig& cfg,
                              const LadderSet& ladders, const OptimizeOptions& opts = {});

}  // namespace vpon
