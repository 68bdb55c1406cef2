#include "swarm/qp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace swarm::solver {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Rank-one update of the factorization after activating a constraint whose
// transformed normal is w = J' n. Givens rotations zero w below entry q+1 and
// are mirrored onto the columns of J.
bool add_constraint(Eigen::MatrixXd& J, Eigen::MatrixXd& R, Eigen::VectorXd& w, int& q,
                    double& r_norm) {
  const int n = static_cast<int>(J.rows());
  for (int j = n - 1; j >= q + 1; --j) {
    double cc = w(j - 1);
    double ss = w(j);
    const double h = std::hypot(cc, ss);
    if (h == 0.0) continue;
    w(j) = 0.0;
    ss /= h;
    cc /= h;
    if (cc < 0.0) {
      cc = -cc;
      ss = -ss;
      w(j - 1) = -h;
    } else {
      w(j - 1) = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = 0; k < n; ++k) {
      const double t1 = J(k, j - 1);
      const double t2 = J(k, j);
      J(k, j - 1) = t1 * cc + t2 * ss;
      J(k, j) = xny * (t1 + J(k, j - 1)) - t2;
    }
  }
  ++q;
  R.col(q - 1).head(q) = w.head(q);
  if (std::abs(w(q - 1)) <= 1e-13 * r_norm) return false;  // linearly dependent normal
  r_norm = std::max(r_norm, std::abs(w(q - 1)));
  return true;
}

// Removes the active constraint at position pos, restoring R to triangular
// form with Givens rotations mirrored onto J.
void delete_constraint(Eigen::MatrixXd& J, Eigen::MatrixXd& R, std::vector<int>& active,
                       std::vector<double>& u, int& q, int pos) {
  const int n = static_cast<int>(J.rows());
  for (int j = pos; j < q - 1; ++j) {
    active[j] = active[j + 1];
    u[j] = u[j + 1];
    R.col(j) = R.col(j + 1);
  }
  active.pop_back();
  u.pop_back();
  R.col(q - 1).setZero();
  --q;
  for (int j = pos; j < q; ++j) {
    double cc = R(j, j);
    double ss = R(j + 1, j);
    const double h = std::hypot(cc, ss);
    if (h == 0.0) continue;
    cc /= h;
    ss /= h;
    R(j + 1, j) = 0.0;
    if (cc < 0.0) {
      R(j, j) = -h;
      cc = -cc;
      ss = -ss;
    } else {
      R(j, j) = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = j + 1; k < q; ++k) {
      const double t1 = R(j, k);
      const double t2 = R(j + 1, k);
      R(j, k) = t1 * cc + t2 * ss;
      R(j + 1, k) = xny * (t1 + R(j, k)) - t2;
    }
    for (int k = 0; k < n; ++k) {
      const double t1 = J(k, j);
      const double t2 = J(k, j + 1);
      J(k, j) = t1 * cc + t2 * ss;
      J(k, j + 1) = xny * (t1 + J(k, j)) - t2;
    }
  }
}

}  // namespace

QpResult solve_qp(const Eigen::MatrixXd& G, const Eigen::VectorXd& a, const Eigen::MatrixXd& C,
                  const Eigen::VectorXd& d) {
  const int n = static_cast<int>(G.rows());
  const int m = static_cast<int>(C.rows());
  if (G.cols() != n || a.size() != n || (m > 0 && C.cols() != n) || d.size() != m)
    throw std::invalid_argument("solve_qp: dimension mismatch");

  QpResult res;
  res.mult = Eigen::VectorXd::Zero(m);

  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) throw std::runtime_error("solve_qp: G not positive definite");

  // Internal >= form: rows n_i y >= b_i with n_i = -C_i, unit norm. Zero rows
  // are decided up front.
  Eigen::MatrixXd N(m, n);
  Eigen::VectorXd b(m);
  std::vector<bool> skip(static_cast<size_t>(m), false);
  for (int i = 0; i < m; ++i) {
    const double nrm = C.row(i).norm();
    if (nrm < 1e-14) {
      skip[static_cast<size_t>(i)] = true;
      if (d(i) < -1e-10) return res;  // 0 <= d violated, infeasible
      continue;
    }
    N.row(i) = -C.row(i) / nrm;
    b(i) = -d(i) / nrm;
  }

  // J = L^{-T}; columns beyond q span the free subspace in the G metric.
  Eigen::MatrixXd J = llt.matrixU().solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
  double r_norm = 1.0;

  Eigen::VectorXd y = -llt.solve(a);
  std::vector<int> active;
  std::vector<double> u;
  int q = 0;

  const int max_iter = 20 * (n + m) + 200;
  int iter = 0;

  while (true) {
    if (++iter > max_iter) return res;  // stalled, report infeasible

    // Most violated inactive constraint.
    int p = -1;
    double worst = -1e-10;
    for (int i = 0; i < m; ++i) {
      if (skip[static_cast<size_t>(i)]) continue;
      bool is_active = false;
      for (int k : active)
        if (k == i) {
          is_active = true;
          break;
        }
      if (is_active) continue;
      const double s = N.row(i).dot(y) - b(i);
      if (s < worst) {
        worst = s;
        p = i;
      }
    }
    if (p < 0) break;  // all satisfied: optimal

    const Eigen::VectorXd np = N.row(p).transpose();
    double s = worst;
    double u_plus = 0.0;

    while (true) {
      if (++iter > max_iter) return res;

      // Primal direction in the free subspace and dual direction.
      Eigen::VectorXd w = J.transpose() * np;
      Eigen::VectorXd z = J.rightCols(n - q) * w.tail(n - q);
      Eigen::VectorXd r;
      if (q > 0)
        r = R.topLeftCorner(q, q).triangularView<Eigen::Upper>().solve(w.head(q));

      double t1 = kInf;
      int drop = -1;
      for (int k = 0; k < q; ++k) {
        if (r(k) > 1e-12) {
          const double t = u[static_cast<size_t>(k)] / r(k);
          if (t < t1) {
            t1 = t;
            drop = k;
          }
        }
      }
      const double z_dot = z.dot(np);
      const double t2 = (z_dot > 1e-14) ? -s / z_dot : kInf;
      const double t = std::min(t1, t2);

      if (t >= kInf) return res;  // dual unbounded: QP infeasible

      if (t2 >= kInf) {
        // Dual-only step: drop the blocking constraint and retry.
        for (int k = 0; k < q; ++k) u[static_cast<size_t>(k)] -= t * r(k);
        u_plus += t;
        delete_constraint(J, R, active, u, q, drop);
        continue;
      }

      y += t * z;
      for (int k = 0; k < q; ++k) u[static_cast<size_t>(k)] -= t * r(k);
      u_plus += t;

      if (t >= t2 - 1e-15 * (1.0 + std::abs(t2))) {
        // Full step: constraint p becomes active.
        Eigen::VectorXd wn = J.transpose() * np;
        active.push_back(p);
        u.push_back(u_plus);
        if (!add_constraint(J, R, wn, q, r_norm)) {
          // Dependent normal despite a nonzero primal step: numerical edge,
          // back the bookkeeping out and leave the constraint inactive.
          R.col(q - 1).setZero();
          --q;
          active.pop_back();
          u.pop_back();
        }
        break;
      }

      // Partial step: the blocking constraint leaves the active set.
      delete_constraint(J, R, active, u, q, drop);
      s = np.dot(y) - b(p);
    }
  }

  // Map multipliers back to the <= rows (scale by the row normalization).
  for (int k = 0; k < q; ++k) {
    const int i = active[static_cast<size_t>(k)];
    res.mult(i) = u[static_cast<size_t>(k)] / C.row(i).norm();
  }
  res.feasible = true;
  res.y = y;
  res.iterations = iter;
  return res;
}

}  // namespace swarm::solver
