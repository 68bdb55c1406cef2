#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace swarm::solver {

/// One constraint-Jacobian row with sorted, unique column indices.
struct SparseRow {
  std::vector<int> idx;
  std::vector<double> val;

  void clear() {
    idx.clear();
    val.clear();
  }
  void add(int i, double v) {
    idx.push_back(i);
    val.push_back(v);
  }
  double dot(const Eigen::VectorXd& z) const {
    double s = 0.0;
    for (size_t k = 0; k < idx.size(); ++k) s += val[k] * z(idx[k]);
    return s;
  }
};

/// Independent variable group. Equality constraints must not straddle blocks
/// (per-agent dynamics never do); inequality rows may couple blocks.
struct VarBlock {
  int offset = 0;
  int size = 0;
};

/// Generic constrained NLP:
///   min f(z)  s.t.  c_E(z) = 0,  c_I(z) <= 0,  lb <= z <= ub.
/// Callbacks must be finite on the feasible box. The optional per-block base
/// Hessians carry the Gauss-Newton curvature of a quadratic objective; the
/// solver layers a damped BFGS correction on top.
struct NlpInstance {
  int n_vars = 0;
  Eigen::VectorXd lb, ub;

  std::function<double(const Eigen::VectorXd&)> objective;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;

  int n_eq = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> eq;
  std::function<void(const Eigen::VectorXd&, std::vector<SparseRow>&)> eq_jacobian;

  int n_ineq = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> ineq;
  std::function<void(const Eigen::VectorXd&, std::vector<SparseRow>&)> ineq_jacobian;

  std::vector<VarBlock> blocks;           // empty => one block spanning all vars
  std::vector<Eigen::MatrixXd> h0_blocks; // empty => zero base Hessian

  /// Optional multiplier-weighted positive-semidefinite constraint curvature,
  /// added per block on top of h0 (e.g. the exact Hessian of a quadratic
  /// inequality scaled by its multiplier estimate). Must only ever add PSD
  /// contributions; indefinite curvature is left to the BFGS correction.
  std::function<void(const Eigen::VectorXd& z, const Eigen::VectorXd& ineq_mult,
                     std::vector<Eigen::MatrixXd>& add)>
      constraint_curvature;

  std::vector<VarBlock> effective_blocks() const {
    if (!blocks.empty()) return blocks;
    return {VarBlock{0, n_vars}};
  }
};

enum class SolveStatus { Optimal, MaxIter, Infeasible };

struct SolveReport {
  SolveStatus status = SolveStatus::MaxIter;
  int iterations = 0;
  double stationarity = std::numeric_limits<double>::infinity();
  double violation = std::numeric_limits<double>::infinity();
};

const char* to_string(SolveStatus s);

}  // namespace swarm::solver
