#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "swarm/collision.hpp"
#include "swarm/dynamics.hpp"
#include "swarm/geometry.hpp"
#include "swarm/nlp.hpp"
#include "swarm/solver.hpp"

namespace swarm::ocp {

enum class CouplingMode { Sphere, PolytopeDual };

/// Safe-set handling: Rate is the per-step increment form (reach the border
/// only after N steps); ShiftedMembership imposes the position-shifted set
/// directly per stage and is kept as the counterexample that loses recursive
/// feasibility.
enum class SafeSetForm { Rate, ShiftedMembership };

struct OcpConfig {
  int N = 10;
  Eigen::VectorXd q_t, r_t;  // tracking stage weights (diagonals, > 0)
  Eigen::VectorXd q_s, r_s;  // safe stage weights
  Eigen::VectorXd t_o;       // offset cost weight
  double beta = 50.0;
  double d_min = 0.1;
  int n_facets = 8;
  CouplingMode coupling = CouplingMode::Sphere;
  SafeSetForm safe_form = SafeSetForm::Rate;

  void validate(int n, int m) const;
};

/// Uniform default weights for a model with n states and m inputs: position
/// entries weigh 1, the rest 0.1; inputs 0.05.
OcpConfig default_config(int n, int m);

struct AgentRef {
  Eigen::VectorXd x, u;
};

struct AgentProblem {
  int id = 0;
  std::shared_ptr<const dynamics::AgentModel> model;
  Eigen::VectorXd x0;
  AgentRef ref;
  geometry::HPolytope safe_set;  // origin-centered {q : A_c q <= b_c}
  double sigma = 1.0;
  double j_s_bound = std::numeric_limits<double>::infinity();  // inf: bound inactive
  collision::PolyShape shape;  // only consulted in PolytopeDual mode
};

struct FhocpProblem {
  std::vector<AgentProblem> agents;
  std::vector<std::pair<int, int>> coupling_pairs;  // indices into agents, i < j

  void validate(const OcpConfig& cfg) const;
};

struct AgentSolution {
  int id = 0;
  std::vector<Eigen::VectorXd> x_t, x_s;  // N+1 states each
  std::vector<Eigen::VectorXd> u_t, u_s;  // N inputs each, u_t[0] == u_s[0]
  Eigen::VectorXd xbar_s, ubar_s;
  double j_track = 0.0;
  double j_safe = 0.0;
};

struct FhocpSolution {
  std::vector<AgentSolution> agents;
  solver::SolveReport report;
};

/// Tracking objective: sum_j |x_t(j)-x_ref|^2_Qt + |u_t(j)-u_ref|^2_Rt over
/// j = 0..N-1, plus beta * |xbar_s - x_ref|^2_To.
double tracking_cost(const std::vector<Eigen::VectorXd>& x_t,
                     const std::vector<Eigen::VectorXd>& u_t, const Eigen::VectorXd& xbar_s,
                     const AgentRef& ref, const OcpConfig& cfg);

/// Safe performance index: sum_j |x_s(j)-xbar_s|^2_Qs + |u_s(j)-ubar_s|^2_Rs
/// over j = 0..N-1, plus |xbar_s - x_ref|^2_To.
double safe_cost(const std::vector<Eigen::VectorXd>& x_s, const std::vector<Eigen::VectorXd>& u_s,
                 const Eigen::VectorXd& xbar_s, const Eigen::VectorXd& ubar_s, const AgentRef& ref,
                 const OcpConfig& cfg);

/// Offset part alone, |xbar - x_ref|^2_To.
double offset_cost(const Eigen::VectorXd& xbar, const AgentRef& ref, const OcpConfig& cfg);

/// Upper bound for the next step's safe cost: the previous safe cost minus its
/// first stage term. std::nullopt (no previous solution) yields the inactive
/// sentinel +inf.
double update_safe_bound(const std::optional<AgentSolution>& prev, const AgentRef& ref,
                         const OcpConfig& cfg);

/// Shifted safe tail: both trajectories become [x_s(1..N), xbar_s] driven by
/// [u_s(1..N-1), ubar_s]; the artificial reference carries over. Costs are
/// recomputed against the provided references.
AgentSolution candidate_agent(const AgentSolution& prev, const AgentRef& ref, const OcpConfig& cfg);
FhocpSolution candidate_solution(const FhocpSolution& prev, const std::vector<AgentRef>& refs,
                                 const OcpConfig& cfg);

/// The transcribed per-cluster NLP plus enough layout to encode and decode
/// solutions. Variable order per agent: shared first input, tracking inputs
/// 1..N-1, safe inputs 1..N-1, tracking states 0..N, safe states 0..N,
/// artificial reference state and input. PolytopeDual mode appends one dual
/// block per coupled pair and stage.
class FhocpNlp {
 public:
  FhocpNlp(FhocpProblem problem, OcpConfig cfg);

  const solver::NlpInstance& nlp() const { return nlp_; }
  const FhocpProblem& problem() const { return *problem_; }

  Eigen::VectorXd encode(const FhocpSolution& sol) const;
  FhocpSolution decode(const Eigen::VectorXd& z) const;

  /// Zero-input rollout for both trajectories; artificial reference at the
  /// rest projection of the terminal state.
  Eigen::VectorXd cold_start() const;

  /// Largest constraint violation (equalities and inequalities) at z.
  double max_violation(const Eigen::VectorXd& z) const;

  // Variable indices (global), exposed for tests.
  int u_t_index(int agent, int j) const;
  int u_s_index(int agent, int j) const;
  int x_t_index(int agent, int j) const;
  int x_s_index(int agent, int j) const;
  int xbar_index(int agent) const;
  int ubar_index(int agent) const;
  int num_coupling_rows() const { return n_coupling_rows_; }

 private:
  struct Layout {
    int off = 0;
    int n = 0, m = 0, N = 0;
    int size() const { return m * (2 * N - 1) + 2 * (N + 1) * n + n + m; }
    int u_shared() const { return off; }
    int u_t(int j) const { return j == 0 ? u_shared() : off + m + (j - 1) * m; }
    int u_s(int j) const { return j == 0 ? u_shared() : off + m + (N - 1) * m + (j - 1) * m; }
    int x_t(int j) const { return off + m * (2 * N - 1) + j * n; }
    int x_s(int j) const { return off + m * (2 * N - 1) + (N + 1) * n + j * n; }
    int xbar() const { return off + m * (2 * N - 1) + 2 * (N + 1) * n; }
    int ubar() const { return xbar() + n; }
  };
  struct DualBlock {  // PolytopeDual multipliers for one (pair, trajectory, stage)
    int pair = 0;
    bool safe = false;
    int stage = 0;
    int off = 0;
    int fi = 0, fj = 0;
  };

  void assemble();

  std::shared_ptr<FhocpProblem> problem_;
  OcpConfig cfg_;
  std::vector<Layout> layout_;
  std::vector<DualBlock> duals_;
  int n_coupling_rows_ = 0;
  solver::NlpInstance nlp_;
};

/// Convenience: build, warm start (or cold start), solve, decode.
FhocpSolution solve_fhocp(const FhocpProblem& problem, const OcpConfig& cfg,
                          const Eigen::VectorXd* warm_start = nullptr,
                          const solver::SolveOptions& opts = {});

struct EmptyReachableSet : std::runtime_error {
  EmptyReachableSet() : std::runtime_error("optimal_reachable_steady_state: reachable set empty") {}
};

/// Definition 2/3: minimizes the offset cost over the steady states reachable
/// in at most N admissible steps, keeping every visited position inside the
/// safe set anchored at x0 and clear of the given neighbor positions
/// (one sequence of N+1 points per neighbor). Throws EmptyReachableSet.
dynamics::Equilibrium optimal_reachable_steady_state(
    const AgentProblem& agent, const std::vector<std::vector<Eigen::Vector2d>>& neighbor_positions,
    const OcpConfig& cfg, const solver::SolveOptions& opts = {});

}  // namespace swarm::ocp
