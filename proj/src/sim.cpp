#include "swarm/sim.hpp"

#include <cmath>
#include <sstream>

#include "swarm/collision.hpp"

namespace swarm::sim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void Scenario::validate() const {
  if (agents.empty()) throw std::invalid_argument("Scenario: no agents");
  if (steps < 0) throw std::invalid_argument("Scenario: steps >= 0");
  const std::string& kind = agents.front().model_kind;
  for (const auto& a : agents) {
    if (!a.model) throw std::invalid_argument("Scenario: missing model");
    if (a.model_kind != kind)
      throw std::invalid_argument("Scenario: all agents must share one model kind");
    ocp.validate(a.model->n, a.model->m);
    if (a.x0.size() != a.model->n || a.x_ref.size() != a.model->n ||
        a.u_ref.size() != a.model->m)
      throw std::invalid_argument("Scenario: state/reference dimension mismatch");
    if ((a.model->f(a.x_ref, a.u_ref) - a.x_ref).lpNorm<Eigen::Infinity>() > 1e-9)
      throw std::invalid_argument("Scenario: reference is not an admissible equilibrium");
    if (((a.x0 - a.model->x_ub).array() > 1e-9).any() ||
        ((a.model->x_lb - a.x0).array() > 1e-9).any())
      throw std::invalid_argument("Scenario: initial state outside its box");
    if (a.comm_radius <= a.sigma + 0.5 * ocp.d_min)
      throw std::invalid_argument("Scenario: communication radius too small for the footprint");
  }
  for (size_t i = 0; i < agents.size(); ++i) {
    for (size_t j = i + 1; j < agents.size(); ++j) {
      const double d = (agents[i].x0.head<2>() - agents[j].x0.head<2>()).norm();
      if (d <= agents[i].sigma + agents[j].sigma + ocp.d_min)
        throw std::invalid_argument("Scenario: initial configuration is not collision-free");
    }
  }
}

namespace {

struct ClusterOutcome {
  std::vector<ocp::AgentSolution> used;  // solution in force per member
  solver::SolveStatus status = solver::SolveStatus::Optimal;
  bool fallback = false;
};

}  // namespace

SimLog run(const Scenario& scenario) {
  scenario.validate();
  const int n_agents = static_cast<int>(scenario.agents.size());

  std::vector<Eigen::VectorXd> x;
  std::vector<geometry::Disc> comm;
  std::vector<ocp::AgentRef> refs;
  std::vector<geometry::HPolytope> safe_sets;
  for (const auto& a : scenario.agents) {
    x.push_back(a.x0);
    comm.push_back(geometry::Disc{{0, 0}, a.comm_radius});
    refs.push_back(ocp::AgentRef{a.x_ref, a.u_ref});
    // The footprint is widened by d_min/2 per agent so that plugged-in pairs
    // of safe trajectories keep the full margin between them.
    safe_sets.push_back(geometry::build_safe_set(geometry::Disc{{0, 0}, a.comm_radius},
                                                 a.sigma + 0.5 * scenario.ocp.d_min,
                                                 scenario.ocp.n_facets));
  }

  SimLog log;
  std::vector<std::optional<ocp::AgentSolution>> prev(static_cast<size_t>(n_agents));
  std::vector<int> consecutive_fallbacks(static_cast<size_t>(n_agents), 0);
  network::ClusterTopology prev_topo;

  for (int k = 0; k < scenario.steps; ++k) {
    std::vector<Eigen::Vector2d> positions;
    for (const auto& xi : x) positions.push_back(xi.head<2>());
    const network::CommGraph graph = network::build_graph(positions, comm, k);
    const network::ClusterTopology topo = network::connected_components(graph);

    SimStep step;
    step.k = k;
    step.topology = topo;
    if (k > 0) step.plug_events = network::diff_topology(prev_topo, topo);
    step.agents.resize(static_cast<size_t>(n_agents));
    if (scenario.record_predictions)
      step.safe_predictions.resize(static_cast<size_t>(n_agents));

    const int nc = topo.num_clusters();
    std::vector<ClusterOutcome> outcomes(static_cast<size_t>(nc));
    std::vector<ocp::FhocpProblem> problems(static_cast<size_t>(nc));
    std::vector<std::vector<int>> members(static_cast<size_t>(nc));

    for (int c = 0; c < nc; ++c) {
      members[static_cast<size_t>(c)] = topo.clusters[static_cast<size_t>(c)];
      ocp::FhocpProblem& prob = problems[static_cast<size_t>(c)];
      const auto& ids = members[static_cast<size_t>(c)];
      for (int local = 0; local < static_cast<int>(ids.size()); ++local) {
        const int i = ids[static_cast<size_t>(local)];
        ocp::AgentProblem ap;
        ap.id = scenario.agents[static_cast<size_t>(i)].id;
        ap.model = scenario.agents[static_cast<size_t>(i)].model;
        ap.x0 = x[static_cast<size_t>(i)];
        ap.ref = refs[static_cast<size_t>(i)];
        ap.safe_set = safe_sets[static_cast<size_t>(i)];
        ap.sigma = scenario.agents[static_cast<size_t>(i)].sigma;
        ap.j_s_bound = ocp::update_safe_bound(prev[static_cast<size_t>(i)],
                                              refs[static_cast<size_t>(i)], scenario.ocp);
        prob.agents.push_back(std::move(ap));
      }
      for (int a = 0; a < static_cast<int>(ids.size()); ++a)
        for (int b = a + 1; b < static_cast<int>(ids.size()); ++b)
          if (graph.has_edge(ids[static_cast<size_t>(a)], ids[static_cast<size_t>(b)]))
            prob.coupling_pairs.emplace_back(a, b);
    }

    // Per-cluster solves are independent; the loop may fan out over threads
    // while the serial path stays available as the reference.
    auto solve_cluster = [&](int c) {
      const auto& ids = members[static_cast<size_t>(c)];
      const ocp::FhocpProblem& prob = problems[static_cast<size_t>(c)];
      ClusterOutcome& out = outcomes[static_cast<size_t>(c)];

      bool have_candidates = true;
      for (int i : ids)
        if (!prev[static_cast<size_t>(i)]) have_candidates = false;

      std::vector<ocp::AgentSolution> candidates;
      ocp::FhocpNlp builder(prob, scenario.ocp);
      Eigen::VectorXd init;
      if (have_candidates) {
        ocp::FhocpSolution cand_block;
        for (int local = 0; local < static_cast<int>(ids.size()); ++local) {
          const int i = ids[static_cast<size_t>(local)];
          candidates.push_back(ocp::candidate_agent(*prev[static_cast<size_t>(i)],
                                                    refs[static_cast<size_t>(i)], scenario.ocp));
        }
        cand_block.agents = candidates;
        init = builder.encode(cand_block);
      } else {
        init = builder.cold_start();
      }

      auto [z, report] = solver::solve(builder.nlp(), init, scenario.solver_opts);
      out.status = report.status;
      if (report.violation <= scenario.solver_opts.tol_feas) {
        ocp::FhocpSolution sol = builder.decode(z);
        out.used = std::move(sol.agents);
      } else if (have_candidates) {
        out.fallback = true;  // Proposition-1 candidate stays feasible
        out.used = std::move(candidates);
      } else {
        out.used.clear();  // k = 0 failure, reported below
      }
    };

    if (scenario.parallel_clusters) {
#pragma omp parallel for schedule(dynamic)
      for (int c = 0; c < nc; ++c) solve_cluster(c);
    } else {
      for (int c = 0; c < nc; ++c) solve_cluster(c);
    }

    for (int c = 0; c < nc; ++c) {
      const auto& out = outcomes[static_cast<size_t>(c)];
      if (out.used.empty()) {
        std::ostringstream msg;
        msg << "FHOCP infeasible at k=" << k << " for cluster " << c
            << " and no candidate exists";
        throw InitialInfeasible(msg.str());
      }
    }

    // Apply the shared first inputs and log.
    for (int c = 0; c < nc; ++c) {
      const auto& ids = members[static_cast<size_t>(c)];
      const auto& out = outcomes[static_cast<size_t>(c)];
      for (int local = 0; local < static_cast<int>(ids.size()); ++local) {
        const int i = ids[static_cast<size_t>(local)];
        const ocp::AgentSolution& used = out.used[static_cast<size_t>(local)];
        StepAgentRecord& rec = step.agents[static_cast<size_t>(i)];
        rec.x = x[static_cast<size_t>(i)];
        rec.u = used.u_t[0];
        rec.cluster = c;
        rec.j_track = used.j_track;
        rec.j_safe = used.j_safe;
        rec.j_safe_bound = problems[static_cast<size_t>(c)].agents[static_cast<size_t>(local)].j_s_bound;
        rec.status = out.status;
        rec.fallback = out.fallback;
        if (out.fallback) {
          if (++consecutive_fallbacks[static_cast<size_t>(i)] >= 2) {
            std::ostringstream w;
            w << "agent " << scenario.agents[static_cast<size_t>(i)].id << ": "
              << consecutive_fallbacks[static_cast<size_t>(i)]
              << " consecutive solver failures, applying candidate inputs";
            step.warnings.push_back(w.str());
          }
        } else {
          consecutive_fallbacks[static_cast<size_t>(i)] = 0;
        }
        if (scenario.record_predictions) {
          auto& pred = step.safe_predictions[static_cast<size_t>(i)];
          for (const auto& xs : used.x_s) pred.push_back(xs.head<2>());
        }
        prev[static_cast<size_t>(i)] = used;
      }
    }

    for (int i = 0; i < n_agents; ++i)
      x[static_cast<size_t>(i)] = scenario.agents[static_cast<size_t>(i)].model->f(
          x[static_cast<size_t>(i)], step.agents[static_cast<size_t>(i)].u);

    log.steps.push_back(std::move(step));
    prev_topo = topo;
  }

  log.final_states = x;
  return log;
}

ViolationReport verify_log(const SimLog& log, const Scenario& scenario) {
  ViolationReport rep;
  const int n_agents = static_cast<int>(scenario.agents.size());
  auto flag = [&rep](int k, int agent, const char* kind, const std::string& detail) {
    rep.items.push_back({k, agent, kind, detail});
  };

  for (size_t s = 0; s < log.steps.size(); ++s)
    if (static_cast<int>(log.steps[s].agents.size()) != n_agents)
      throw std::invalid_argument("verify_log: log does not match the scenario agent count");
  if (static_cast<int>(log.final_states.size()) != n_agents)
    throw std::invalid_argument("verify_log: missing final states");

  auto state_at = [&](int k, int i) -> const Eigen::VectorXd& {
    return k < static_cast<int>(log.steps.size())
               ? log.steps[static_cast<size_t>(k)].agents[static_cast<size_t>(i)].x
               : log.final_states[static_cast<size_t>(i)];
  };
  const int K = static_cast<int>(log.steps.size());

  for (int k = 0; k <= K; ++k) {
    // Pairwise clearance.
    for (int i = 0; i < n_agents; ++i) {
      for (int j = i + 1; j < n_agents; ++j) {
        const double d = (state_at(k, i).head<2>() - state_at(k, j).head<2>()).norm();
        const double need = scenario.agents[static_cast<size_t>(i)].sigma +
                            scenario.agents[static_cast<size_t>(j)].sigma + scenario.ocp.d_min;
        if (d <= need - 1e-6) {
          std::ostringstream msg;
          msg << "agents " << i << "," << j << " at distance " << d << " < " << need;
          flag(k, -1, "collision", msg.str());
        }
      }
    }
    // Boxes.
    for (int i = 0; i < n_agents; ++i) {
      const auto& md = *scenario.agents[static_cast<size_t>(i)].model;
      const auto& xi = state_at(k, i);
      if (((xi - md.x_ub).array() > 1e-9).any() || ((md.x_lb - xi).array() > 1e-9).any())
        flag(k, i, "state_box", "state outside its box");
      if (k < K) {
        const auto& ui = log.steps[static_cast<size_t>(k)].agents[static_cast<size_t>(i)].u;
        if (((ui - md.u_ub).array() > 1e-9).any() || ((md.u_lb - ui).array() > 1e-9).any())
          flag(k, i, "input_box", "input outside its box");
      }
    }
  }

  // Dynamics consistency.
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < n_agents; ++i) {
      const auto& md = *scenario.agents[static_cast<size_t>(i)].model;
      const auto& rec = log.steps[static_cast<size_t>(k)].agents[static_cast<size_t>(i)];
      const Eigen::VectorXd want = md.f(rec.x, rec.u);
      if ((state_at(k + 1, i) - want).lpNorm<Eigen::Infinity>() > 1e-9)
        flag(k, i, "dynamics", "state at k+1 is not the rollout of (x_k, u_k)");
    }
  }

  // Safe-cost chain: J_s within its bound, and the next bound below J_s.
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < n_agents; ++i) {
      const auto& rec = log.steps[static_cast<size_t>(k)].agents[static_cast<size_t>(i)];
      if (std::isfinite(rec.j_safe_bound) && rec.j_safe > rec.j_safe_bound + 1e-6) {
        std::ostringstream msg;
        msg << "J_s " << rec.j_safe << " exceeds its bound " << rec.j_safe_bound;
        flag(k, i, "safe_cost_bound", msg.str());
      }
      if (k + 1 < K) {
        const auto& nxt = log.steps[static_cast<size_t>(k + 1)].agents[static_cast<size_t>(i)];
        if (std::isfinite(nxt.j_safe_bound) && nxt.j_safe_bound > rec.j_safe + 1e-6) {
          std::ostringstream msg;
          msg << "bound " << nxt.j_safe_bound << " at k+1 exceeds J_s " << rec.j_safe;
          flag(k + 1, i, "safe_cost_chain", msg.str());
        }
        if (std::isfinite(nxt.j_safe_bound) && nxt.j_safe > rec.j_safe_bound + 1e-6 &&
            std::isfinite(rec.j_safe_bound)) {
          std::ostringstream msg;
          msg << "J_s " << nxt.j_safe << " at k+1 exceeds the k bound " << rec.j_safe_bound;
          flag(k + 1, i, "lyapunov", msg.str());
        }
      }
    }
  }

  return rep;
}

}  // namespace swarm::sim
