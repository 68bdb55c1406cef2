#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "swarm/io.hpp"
#include "swarm/ocp.hpp"
#include "swarm/sim.hpp"
#include "swarm/svg.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolations = 1;
constexpr int kExitParse = 2;
constexpr int kExitInfeasible = 3;

bool debug_enabled() {
  const char* v = std::getenv("SWARM_MPC_DEBUG");
  return v != nullptr && std::string(v) == "1";
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir, int steps_override,
            long long seed_override, int snapshot_every, bool serial) {
  swarm::sim::Scenario scenario;
  try {
    scenario = swarm::io::load_scenario(scenario_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }
  if (steps_override >= 0) scenario.steps = steps_override;
  if (seed_override >= 0) scenario.seed = static_cast<std::uint64_t>(seed_override);
  scenario.parallel_clusters = !serial;
  if (debug_enabled()) scenario.solver_opts.trace = &std::cerr;

  swarm::sim::SimLog log;
  try {
    log = swarm::sim::run(scenario);
  } catch (const swarm::sim::InitialInfeasible& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }

  fs::create_directories(out_dir);
  swarm::io::write_file((fs::path(out_dir) / "log.csv").string(),
                        swarm::io::log_to_csv(log, scenario));
  swarm::io::write_file((fs::path(out_dir) / "log.json").string(),
                        swarm::io::log_to_json(log, scenario));
  for (const auto& step : log.steps) {
    if (snapshot_every <= 0 || step.k % snapshot_every != 0) continue;
    std::ostringstream name;
    name << "graph_" << step.k << ".json";
    swarm::io::write_file((fs::path(out_dir) / name.str()).string(),
                          swarm::network::to_json(step.topology));
  }
  std::cout << "wrote " << out_dir << "/log.csv (" << log.steps.size() << " steps, "
            << scenario.agents.size() << " agents)\n";
  return kExitOk;
}

int cmd_check(const std::string& log_path, const std::string& scenario_path) {
  swarm::sim::Scenario scenario;
  swarm::sim::SimLog log;
  try {
    scenario = swarm::io::load_scenario(scenario_path);
    log = swarm::io::log_from_json(swarm::io::read_file(log_path), scenario);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }
  swarm::sim::ViolationReport rep;
  try {
    rep = swarm::sim::verify_log(log, scenario);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }
  std::ostringstream out;
  out << "{\"violations\":[";
  for (size_t i = 0; i < rep.items.size(); ++i) {
    const auto& v = rep.items[i];
    out << (i ? "," : "") << "{\"k\":" << v.k << ",\"agent\":" << v.agent << ",\"kind\":\""
        << v.kind << "\",\"detail\":\"" << v.detail << "\"}";
  }
  out << "]}";
  std::cout << out.str() << "\n";
  return rep.ok() ? kExitOk : kExitViolations;
}

int cmd_plot(const std::string& log_path, const std::string& out_file, int snapshot_every) {
  swarm::svg::PlotData data;
  try {
    data = swarm::svg::plot_data_from_log_json(swarm::io::read_file(log_path), snapshot_every);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }
  swarm::io::write_file(out_file, swarm::svg::trajectories_svg(data));
  fs::path strip = fs::path(out_file);
  strip.replace_extension();
  strip += "_graph.svg";
  swarm::io::write_file(strip.string(), swarm::svg::graph_strip_svg(data));
  std::cout << "wrote " << out_file << " and " << strip.string() << "\n";
  return kExitOk;
}

int cmd_betasweep(const std::string& scenario_path, const std::vector<double>& betas,
                  const std::string& out_file) {
  swarm::sim::Scenario scenario;
  try {
    scenario = swarm::io::load_scenario(scenario_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }

  // Initial-configuration clusters; neighbors enter the reachability problem
  // parked at their time-zero positions.
  std::vector<Eigen::Vector2d> positions;
  std::vector<swarm::geometry::Disc> comm;
  for (const auto& a : scenario.agents) {
    positions.push_back(a.x0.head<2>());
    comm.push_back({{0, 0}, a.comm_radius});
  }
  const auto topo = swarm::network::connected_components(swarm::network::build_graph(positions, comm));

  std::ostringstream csv;
  csv << "beta,offset_gap\n";
  for (double beta : betas) {
    swarm::ocp::OcpConfig cfg = scenario.ocp;
    cfg.beta = beta;
    double gap = 0.0;
    for (const auto& cluster : topo.clusters) {
      swarm::ocp::FhocpProblem prob;
      for (int i : cluster) {
        const auto& a = scenario.agents[static_cast<size_t>(i)];
        swarm::ocp::AgentProblem ap;
        ap.id = a.id;
        ap.model = a.model;
        ap.x0 = a.x0;
        ap.ref = {a.x_ref, a.u_ref};
        ap.sigma = a.sigma;
        ap.safe_set = swarm::geometry::build_safe_set(
            swarm::geometry::Disc{{0, 0}, a.comm_radius}, a.sigma + 0.5 * cfg.d_min, cfg.n_facets);
        prob.agents.push_back(std::move(ap));
      }
      for (int ia = 0; ia < static_cast<int>(cluster.size()); ++ia)
        for (int jb = ia + 1; jb < static_cast<int>(cluster.size()); ++jb)
          if (topo.graph.has_edge(cluster[static_cast<size_t>(ia)], cluster[static_cast<size_t>(jb)]))
            prob.coupling_pairs.emplace_back(ia, jb);

      swarm::solver::SolveOptions opts;
      opts.tol_feas = 1e-8;
      opts.tol_opt = 1e-6;
      opts.max_iter = 400;
      const auto sol = swarm::ocp::solve_fhocp(prob, cfg, nullptr, opts);
      for (size_t local = 0; local < prob.agents.size(); ++local) {
        const auto& ap = prob.agents[local];
        std::vector<std::vector<Eigen::Vector2d>> nb;
        for (size_t other = 0; other < prob.agents.size(); ++other)
          if (other != local)
            nb.emplace_back(static_cast<size_t>(cfg.N + 1),
                            prob.agents[other].x0.head<2>().eval());
        const auto opt = swarm::ocp::optimal_reachable_steady_state(ap, nb, cfg, opts);
        gap += swarm::ocp::offset_cost(sol.agents[local].xbar_s, ap.ref, cfg) -
               swarm::ocp::offset_cost(opt.x, ap.ref, cfg);
      }
    }
    csv << beta << ',' << gap << '\n';
  }
  if (out_file.empty())
    std::cout << csv.str();
  else
    swarm::io::write_file(out_file, csv.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plug-and-play multi-trajectory MPC swarm simulator"};
  app.require_subcommand(1);

  std::string scenario_path, log_path, out_dir = "out", out_file;
  int steps_override = -1, snapshot_every = 10;
  long long seed_override = -1;
  bool serial = false;

  auto* run = app.add_subcommand("run", "Simulate a scenario and write logs");
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--steps", steps_override, "Override the scenario step count");
  run->add_option("--seed", seed_override, "Override the scenario seed");
  run->add_option("--out", out_dir, "Output directory (default: out)");
  run->add_option("--snapshot-every", snapshot_every, "Graph snapshot interval (default 10)");
  run->add_flag("--serial", serial, "Solve clusters serially instead of with OpenMP");

  auto* check = app.add_subcommand("check", "Re-verify a log against its scenario");
  check->add_option("log", log_path, "log.json produced by run")->required();
  check->add_option("scenario", scenario_path, "Scenario JSON file")->required();

  std::string plot_out = "plot.svg";
  auto* plot = app.add_subcommand("plot", "Emit trajectory and graph SVGs from a log");
  plot->add_option("log", log_path, "log.json produced by run")->required();
  plot->add_option("--out", plot_out, "Output SVG path (default plot.svg)");
  plot->add_option("--snapshot-every", snapshot_every, "Graph panel interval (default 10)");

  std::vector<double> betas;
  auto* sweep = app.add_subcommand("betasweep", "Offset-gap sweep over beta values");
  sweep->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  sweep->add_option("--betas", betas, "Comma-separated beta values")
      ->required()
      ->delimiter(',');
  sweep->add_option("--out", out_file, "Write CSV here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed())
    return cmd_run(scenario_path, out_dir, steps_override, seed_override, snapshot_every, serial);
  if (check->parsed()) return cmd_check(log_path, scenario_path);
  if (plot->parsed()) return cmd_plot(log_path, plot_out, snapshot_every);
  if (sweep->parsed()) return cmd_betasweep(scenario_path, betas, out_file);
  return kExitParse;
}
