#include <chrono>
#include <iostream>
#include <random>

#include "swarm/io.hpp"
#include "swarm/network.hpp"
#include "swarm/sim.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Pairwise graph construction over a large random swarm: OpenMP row scan
// against the serial reference, outputs must match exactly.
void bench_graph_build() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-60.0, 60.0);
  const int n = 3000;
  std::vector<Eigen::Vector2d> pos;
  std::vector<swarm::geometry::Disc> comm(n, {{0, 0}, 3.0});
  for (int i = 0; i < n; ++i) pos.push_back({u(rng), u(rng)});

  auto t0 = Clock::now();
  const auto serial = swarm::network::build_graph(pos, comm);
  const double t_serial = seconds_since(t0);

  t0 = Clock::now();
  const auto parallel = swarm::network::build_graph_parallel(pos, comm);
  const double t_parallel = seconds_since(t0);

  const bool same = serial.edges == parallel.edges;
  std::cout << "graph_build n=" << n << ": serial " << t_serial << " s, omp " << t_parallel
            << " s, speedup " << t_serial / t_parallel << "x, identical="
            << (same ? "yes" : "NO") << " (" << serial.edges.size() << " edges)\n";
  if (!same) std::exit(1);
}

// Closed-loop run with per-cluster solves serial vs OpenMP; the logs must be
// byte-identical.
void bench_cluster_solves(const std::string& scenario_path, int steps) {
  swarm::sim::Scenario scenario = swarm::io::load_scenario(scenario_path);
  if (steps > 0) scenario.steps = steps;

  scenario.parallel_clusters = false;
  auto t0 = Clock::now();
  const auto log_serial = swarm::sim::run(scenario);
  const double t_serial = seconds_since(t0);

  scenario.parallel_clusters = true;
  t0 = Clock::now();
  const auto log_parallel = swarm::sim::run(scenario);
  const double t_parallel = seconds_since(t0);

  const std::string csv_serial = swarm::io::log_to_csv(log_serial, scenario);
  const std::string csv_parallel = swarm::io::log_to_csv(log_parallel, scenario);
  const bool same = csv_serial == csv_parallel;
  std::cout << "cluster_solves steps=" << scenario.steps << " agents="
            << scenario.agents.size() << ": serial " << t_serial << " s, omp " << t_parallel
            << " s, speedup " << t_serial / t_parallel << "x, identical="
            << (same ? "yes" : "NO") << "\n";
  if (!same) std::exit(1);
}

}  // namespace

int main(int argc, char** argv) {
  bench_graph_build();
  if (argc > 1) {
    const int steps = argc > 2 ? std::atoi(argv[2]) : -1;
    bench_cluster_solves(argv[1], steps);
  } else {
    std::cout << "pass a scenario path to benchmark the closed-loop cluster solves\n";
  }
  return 0;
}
