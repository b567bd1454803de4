#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vpon/errors.hpp"
#include "vpon/latency_model.hpp"
#include "vpon/layout_json.hpp"
#include "vpon/optimizer.hpp"
#include "vpon/pon_sim.hpp"
#include "vpon/scenario.hpp"

namespace {

using vpon::Scenario;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitInternal = 3;

std::string csv_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

std::ofstream open_out(const std::filesystem::path& dir, const std::string& name) {
  std::ofstream out(dir / name);
  if (!out) throw vpon::ConfigError("cannot open for writing: " + (dir / name).string());
  return out;
}

std::string load_tag(double load) {
  return std::to_string(static_cast<int>(std::lround(load * 100.0)));
}

vpon::SimConfig sim_config(const Scenario& sc, std::uint64_t seed, long long cycles) {
  vpon::SimConfig cfg;
  cfg.duration_cycles = cycles;
  cfg.warmup_cycles = static_cast<long long>(sc.sim.warmup_frac * static_cast<double>(cycles));
  cfg.seed = seed;
  cfg.channel = sc.channel;
  cfg.arrival_mode = sc.sim.mode;
  cfg.segment_bytes = sc.segment_bytes;
  cfg.overload_queue_limit = sc.sim.overload_queue_limit;
  return cfg;
}

int cmd_feasibility(const Scenario& sc, const std::filesystem::path& out_dir) {
  auto out = open_out(out_dir, "feasibility.csv");
  out << "load,n71,n72,latency_us,feasible\n";
  for (double load : sc.loads) {
    auto grid = vpon::feasibility_grid(sc.feasibility.max71, sc.feasibility.max72, load,
                                       sc.threshold_us, sc.channel, sc.ladders, sc.ru_defaults,
                                       sc.feasibility.distance_km, sc.latency_options());
    int feasible = 0;
    for (const auto& cell : grid) {
      out << csv_num(load) << ',' << cell.n71 << ',' << cell.n72 << ','
          << csv_num(cell.latency_us) << ',' << (cell.feasible ? 1 : 0) << '\n';
      feasible += cell.feasible ? 1 : 0;
    }
    std::cout << "load " << load << ": " << feasible << "/" << grid.size()
              << " feasible slice mixes\n";
  }
  return kExitOk;
}

nlohmann::json solution_json(const vpon::SliceSolution& sol, const vpon::Layout& layout) {
  nlohmann::json j;
  j["feasible"] = sol.feasible;
  j["objective"] = sol.objective;
  j["active_trees"] = sol.active_trees;
  j["slices"] = nlohmann::json::object();
  for (const auto& [tree, members] : sol.slices) j["slices"][std::to_string(tree)] = members;
  j["latency_us"] = nlohmann::json::object();
  for (const auto& [tree, us] : sol.latency_us) j["latency_us"][std::to_string(tree)] = us;
  j["iterations"] = sol.iterations.size();
  j["cuts"] = sol.total_cuts;
  j["wall_ms"] = sol.wall_ms;
  if (sol.feasible && !sol.active_trees.empty()) {
    std::vector<vpon::Point2> pts;
    for (int t : sol.active_trees) pts.push_back(layout.macros[static_cast<std::size_t>(t)].pos);
    vpon::RingOrder ring = vpon::ring_order(pts);
    std::vector<int> order_trees;
    for (int idx : ring.order)
      order_trees.push_back(sol.active_trees[static_cast<std::size_t>(idx)]);
    j["ring"] = {{"order", order_trees},
                 {"tour_length_km", ring.tour_length * layout.detour}};
  }
  return j;
}

int cmd_optimize(const Scenario& sc, const std::filesystem::path& out_dir) {
  vpon::OptimizeOptions opts;
  opts.w = sc.effective_w();
  opts.costs = sc.costs;
  opts.latency = sc.latency_options();

  bool all_feasible = true;
  for (double load : sc.loads) {
    vpon::SliceSolution sol = vpon::optimize_slices(sc.layout, load, sc.threshold_us,
                                                    sc.max_iterations, sc.channel, sc.ladders,
                                                    opts);
    std::string tag = load_tag(load);
    {
      auto out = open_out(out_dir, "solution_load" + tag + ".json");
      out << solution_json(sol, sc.layout).dump(2) << '\n';
    }
    {
      auto out = open_out(out_dir, "diagnostics_load" + tag + ".csv");
      out << "iteration,lb,violations,cuts,incumbent\n";
      for (const auto& rec : sol.iterations)
        out << rec.iteration << ',' << rec.lb << ',' << rec.violations << ',' << rec.cuts << ','
            << csv_num(rec.incumbent) << '\n';
    }
    if (!sol.feasible) {
      all_feasible = false;
      std::cout << "load " << load << ": infeasible after " << sol.iterations.size()
                << " iterations (" << sol.total_cuts << " cuts)\n";
      continue;
    }
    {
      auto out = open_out(out_dir, "slices_load" + tag + ".csv");
      out << "slice_id,n71,n72,load,wait_us,prop_us,total_us,rho\n";
      for (int tree : sol.active_trees) {
        const auto& members = sol.slices.at(tree);
        int n71 = 0;
        int n72 = 0;
        for (int r : members)
          (sc.layout.ru(r).split == vpon::Split::S71 ? n71 : n72) += 1;
        vpon::SliceLatencyReport rep = vpon::slice_latency(members, sc.layout, tree, load,
                                                           sc.channel, sc.ladders, opts.latency);
        out << tree << ',' << n71 << ',' << n72 << ',' << csv_num(load) << ','
            << csv_num(rep.wait_us) << ',' << csv_num(rep.propagation_us) << ','
            << csv_num(rep.total_us) << ',' << csv_num(rep.utilization) << '\n';
      }
    }
    {
      auto out = open_out(out_dir, "edges_load" + tag + ".csv");
      out << "ru_id,ru_x,ru_y,mec_tree,mec_x,mec_y\n";
      for (const auto& [tree, members] : sol.slices) {
        vpon::Point2 mp = sc.layout.macros[static_cast<std::size_t>(tree)].pos;
        for (int r : members) {
          vpon::Point2 rp = sc.layout.ru(r).position;
          out << r << ',' << csv_num(rp.x) << ',' << csv_num(rp.y) << ',' << tree << ','
              << csv_num(mp.x) << ',' << csv_num(mp.y) << '\n';
        }
      }
    }
    std::cout << "load " << load << ": " << sol.active_trees.size() << " MEC nodes, objective "
              << sol.objective << ", " << sol.iterations.size() << " iterations, "
              << sol.total_cuts << " cuts, " << sol.wall_ms << " ms\n";
  }
  return all_feasible ? kExitOk : kExitInfeasible;
}

int cmd_validate(const Scenario& sc, const std::filesystem::path& out_dir) {
  vpon::SimConfig cfg = sim_config(sc, sc.seeds.front(), sc.sim.cycles);
  auto rows = vpon::validate_grid(sc.validate.grid, sc.loads, cfg, sc.ladders, sc.ru_defaults,
                                  sc.threshold_us, sc.validate.distance_km,
                                  sc.latency_options());
  auto out = open_out(out_dir, "validation.csv");
  out << "n71,n72,load,sim_mean_us,analytic_us,rel_err,feasible_sim,feasible_analytic\n";
  double max_err = 0.0;
  for (const auto& row : rows) {
    out << row.n71 << ',' << row.n72 << ',' << csv_num(row.load) << ','
        << csv_num(row.sim_mean_us) << ',' << csv_num(row.analytic_us) << ','
        << csv_num(row.rel_err) << ',' << (row.feasible_sim ? 1 : 0) << ','
        << (row.feasible_analytic ? 1 : 0) << '\n';
    if (!std::isnan(row.rel_err)) max_err = std::max(max_err, row.rel_err);
  }
  std::cout << "validated " << rows.size() << " cells, max relative error " << max_err << "\n";
  return kExitOk;
}

int cmd_benchmark(const Scenario& sc, const std::filesystem::path& out_dir, bool sim_in_loop) {
  vpon::OptimizeOptions opts;
  opts.w = sc.effective_w();
  opts.costs = sc.costs;
  opts.latency = sc.latency_options();

  auto run_table = [&](std::ofstream& out, bool use_sim) {
    out << "load,max_iterations,wall_ms,mec_count\n";
    for (double load : sc.loads) {
      for (int iters : sc.benchmark.iteration_grid) {
        vpon::OptimizeOptions run_opts = opts;
        if (use_sim) {
          vpon::SimConfig cfg = sim_config(sc, sc.seeds.front(), sc.benchmark.sim_cycles);
          const vpon::Layout& layout = sc.layout;
          const vpon::LadderSet& ladders = sc.ladders;
          run_opts.latency_override =
              [&layout, &ladders, load, cfg](
                  int tree, const std::vector<int>& members) -> std::optional<double> {
            vpon::SimStats stats = vpon::simulate_slice(members, layout, tree, load, cfg,
                                                        ladders);
            if (stats.overloaded) return std::nullopt;
            return stats.mean_total_us;
          };
        }
        vpon::SliceSolution sol = vpon::optimize_slices(sc.layout, load, sc.threshold_us, iters,
                                                        sc.channel, sc.ladders, run_opts);
        int mec = sol.feasible ? static_cast<int>(sol.active_trees.size()) : -1;
        out << csv_num(load) << ',' << iters << ',' << csv_num(sol.wall_ms) << ',' << mec << '\n';
        std::cout << (use_sim ? "sim-in-loop" : "analytic") << " load " << load << " iters "
                  << iters << ": " << sol.wall_ms << " ms, mec " << mec << "\n";
      }
    }
  };

  {
    auto out = open_out(out_dir, "benchmark.csv");
    run_table(out, false);
  }
  if (sim_in_loop) {
    auto out = open_out(out_dir, "benchmark_sim.csv");
    run_table(out, true);
  }
  return kExitOk;
}

int cmd_gen_layout(const Scenario& sc, const std::filesystem::path& out_dir) {
  vpon::save_layout(sc.layout, (out_dir / "layout.json").string());
  std::cout << "layout: " << sc.layout.n_trees() << " trees, " << sc.layout.n_rus()
            << " small cells -> " << (out_dir / "layout.json").string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vPON slice planning: feasibility regions, MEC placement, validation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::int64_t seed_override = -1;
  bool sim_in_loop = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "scenario JSON file")->required();
    cmd->add_option("--out", out_dir, "output directory (created if missing)");
    cmd->add_option("--seed", seed_override, "override generator and simulation seeds");
  };
  add_common(app.add_subcommand("feasibility", "slice-mix feasibility region per load"));
  add_common(app.add_subcommand("optimize", "MEC placement and slice assignment per load"));
  add_common(app.add_subcommand("validate", "simulator vs analytic latency on a slice grid"));
  CLI::App* bench = app.add_subcommand("benchmark", "solver timing across loads and iterations");
  add_common(bench);
  bench->add_flag("--sim-in-loop", sim_in_loop,
                  "also time the solver with simulated latency checks");
  add_common(app.add_subcommand("gen-layout", "expand the scenario layout to JSON"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    Scenario sc = vpon::load_scenario(config_path);
    if (seed_override >= 0) {
      if (sc.generator) {
        sc.generator->seed = static_cast<std::uint64_t>(seed_override);
        sc.layout = vpon::generate_layout(*sc.generator);
      }
      sc.seeds = {static_cast<std::uint64_t>(seed_override)};
    }
    std::filesystem::path out(out_dir);
    std::filesystem::create_directories(out);

    if (app.got_subcommand("feasibility")) return cmd_feasibility(sc, out);
    if (app.got_subcommand("optimize")) return cmd_optimize(sc, out);
    if (app.got_subcommand("validate")) return cmd_validate(sc, out);
    if (app.got_subcommand("benchmark")) return cmd_benchmark(sc, out, sim_in_loop);
    if (app.got_subcommand("gen-layout")) return cmd_gen_layout(sc, out);
    std::cerr << "no subcommand\n";
    return kExitConfig;
  } catch (const vpon::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const vpon::ParameterError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
