#pragma once

#include <iosfwd>
#include <utility>

#include "swarm/nlp.hpp"

namespace swarm::solver {

struct SolveOptions {
  double tol_feas = 1e-6;
  double tol_opt = 1e-4;
  int max_iter = 200;
  std::ostream* trace = nullptr;  // per-iteration CSV: iter, merit, violation, step length
  std::vector<Eigen::VectorXd>* iterate_log = nullptr;
};

/// Sequential quadratic programming with an l1-merit line search.
///
/// Each iteration eliminates the (per-block) linearized equality constraints
/// through a complete orthogonal decomposition, builds a reduced convex QP
/// with a damped Gauss-Newton/BFGS Hessian, and solves it with the dual
/// active-set method in qp.hpp. Equality rows that straddle blocks are folded
/// into opposing inequality pairs. A damped least-squares restoration phase
/// handles inconsistent linearizations; Infeasible is reported when that
/// phase stalls above tol_feas.
std::pair<Eigen::VectorXd, SolveReport> solve(const NlpInstance& nlp, const Eigen::VectorXd& init,
                                              const SolveOptions& opts);

std::pair<Eigen::VectorXd, SolveReport> solve(const NlpInstance& nlp, const Eigen::VectorXd& init,
                                              double tol_feas = 1e-6, double tol_opt = 1e-4,
                                              int max_iter = 200);

struct DerivativeFlag {
  char target = 'g';  // 'g' gradient, 'E' equality Jacobian, 'I' inequality Jacobian
  int row = 0;
  int col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_err = 0.0;
};

struct DerivativeReport {
  std::vector<DerivativeFlag> flags;
  int entries_checked = 0;
  bool ok() const { return flags.empty(); }
};

/// Compares the supplied gradient and Jacobians against central finite
/// differences and flags entries whose relative error exceeds tol.
DerivativeReport check_derivatives(const NlpInstance& nlp, const Eigen::VectorXd& point,
                                   double tol = 1e-4);

}  // namespace swarm::solver
