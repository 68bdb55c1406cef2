#pragma once

#include <Eigen/Dense>

namespace swarm::solver {

struct QpResult {
  bool feasible = false;
  Eigen::VectorXd y;
  Eigen::VectorXd mult;  // one multiplier per row, >= 0, complementary
  int iterations = 0;
};

/// Dense dual active-set method (Goldfarb-Idnani) for
///   min 0.5 y'G y + a'y   s.t.   C y <= d,
/// with G symmetric positive definite. Starts from the unconstrained minimum
/// and adds violated constraints one at a time, so no feasible initial point
/// is needed. Deterministic: ties break on the lowest row index.
QpResult solve_qp(const Eigen::MatrixXd& G, const Eigen::VectorXd& a, const Eigen::MatrixXd& C,
                  const Eigen::VectorXd& d);

}  // namespace swarm::solver
