#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarm/network.hpp"
#include "swarm/ocp.hpp"

namespace swarm::sim {

struct AgentSpec {
  int id = 0;
  std::string model_kind;  // "bicycle" | "double_integrator"
  std::shared_ptr<const dynamics::AgentModel> model;
  Eigen::VectorXd x0;
  Eigen::VectorXd x_ref, u_ref;  // r_i as an admissible equilibrium
  double comm_radius = 3.0;
  double sigma = 1.0;
};

struct Scenario {
  std::vector<AgentSpec> agents;
  ocp::OcpConfig ocp;
  int steps = 100;
  std::uint64_t seed = 0;

  // Runtime knobs, not part of the scenario file.
  bool parallel_clusters = true;   // OpenMP over per-cluster solves
  bool record_predictions = false; // keep predicted safe positions in the log
  solver::SolveOptions solver_opts = default_solver_options();

  static solver::SolveOptions default_solver_options() {
    solver::SolveOptions o;
    o.tol_feas = 1e-8;
    o.tol_opt = 1e-4;
    o.max_iter = 120;
    return o;
  }

  void validate() const;
};

struct InitialInfeasible : std::runtime_error {
  explicit InitialInfeasible(const std::string& what) : std::runtime_error(what) {}
};

struct StepAgentRecord {
  Eigen::VectorXd x;  // state at step k
  Eigen::VectorXd u;  // applied input (shared first input of both trajectories)
  int cluster = -1;
  double j_track = 0.0;
  double j_safe = 0.0;
  double j_safe_bound = std::numeric_limits<double>::infinity();  // bound used at k
  solver::SolveStatus status = solver::SolveStatus::Optimal;
  bool fallback = false;  // candidate input applied instead of a solved one
};

struct SimStep {
  int k = 0;
  std::vector<StepAgentRecord> agents;
  network::ClusterTopology topology;
  std::vector<network::PlugEvent> plug_events;  // relative to the previous step
  std::vector<std::vector<Eigen::Vector2d>> safe_predictions;  // optional
  std::vector<std::string> warnings;
};

struct SimLog {
  std::vector<SimStep> steps;                 // k = 0 .. steps-1
  std::vector<Eigen::VectorXd> final_states;  // states at k = steps
};

/// Closed loop: sense -> cluster -> solve each cluster's FHOCP (warm started
/// from the shifted safe tail) -> apply the shared first input -> log. Solver
/// failures fall back to the candidate input. Throws InitialInfeasible when
/// the k = 0 problem cannot be solved to feasibility.
SimLog run(const Scenario& scenario);

struct Violation {
  int k = 0;
  int agent = -1;  // -1: pairwise or global finding
  std::string kind;
  std::string detail;
};

struct ViolationReport {
  std::vector<Violation> items;
  bool ok() const { return items.empty(); }
};

/// Re-checks a log against its scenario: dynamics consistency (1e-9), state
/// and input boxes (1e-9), pairwise clearance (sigma_i + sigma_j + d_min to
/// 1e-6), and the safe-cost chain (1e-6).
ViolationReport verify_log(const SimLog& log, const Scenario& scenario);

}  // namespace swarm::sim
