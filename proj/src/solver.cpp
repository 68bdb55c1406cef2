#include "swarm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "swarm/qp.hpp"

namespace swarm::solver {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const char* status_names[] = {"optimal", "max_iter", "infeasible"};

struct Evaluation {
  double f = 0.0;
  Eigen::VectorXd g;
  Eigen::VectorXd ce, ci;
  std::vector<SparseRow> je, ji;
};

struct BlockWork {
  VarBlock vb;
  std::vector<int> eq_rows;  // global equality rows owned by this block
  Eigen::MatrixXd Je;        // dense equality Jacobian restricted to the block
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  Eigen::MatrixXd pinv_t;    // (Je^+)^T, for multiplier recovery
  Eigen::MatrixXd Z;         // nullspace basis, size x dof
  Eigen::VectorXd d0;        // min-norm particular solution of Je d = -ce
  Eigen::MatrixXd C;         // BFGS correction on top of the Gauss-Newton base
  Eigen::MatrixXd B;         // Hessian model used this iteration (base + C)
  int dof = 0;
  int y_off = 0;             // offset into the reduced variable vector
};

Eigen::VectorXd clip_to_bounds(const NlpInstance& nlp, Eigen::VectorXd z) {
  for (int i = 0; i < nlp.n_vars; ++i) z(i) = std::clamp(z(i), nlp.lb(i), nlp.ub(i));
  return z;
}

Evaluation evaluate(const NlpInstance& nlp, const Eigen::VectorXd& z, bool with_jacobians) {
  Evaluation ev;
  ev.f = nlp.objective(z);
  if (with_jacobians) ev.g = nlp.gradient(z);
  ev.ce = nlp.n_eq > 0 ? nlp.eq(z) : Eigen::VectorXd();
  ev.ci = nlp.n_ineq > 0 ? nlp.ineq(z) : Eigen::VectorXd();
  if (with_jacobians && nlp.n_eq > 0) nlp.eq_jacobian(z, ev.je);
  if (with_jacobians && nlp.n_ineq > 0) nlp.ineq_jacobian(z, ev.ji);
  return ev;
}

double violation_inf(const Evaluation& ev) {
  double v = 0.0;
  if (ev.ce.size() > 0) v = ev.ce.lpNorm<Eigen::Infinity>();
  for (Eigen::Index i = 0; i < ev.ci.size(); ++i) v = std::max(v, ev.ci(i));
  return v;
}

double violation_l1(const Evaluation& ev) {
  double v = 0.0;
  if (ev.ce.size() > 0) v = ev.ce.lpNorm<1>();
  for (Eigen::Index i = 0; i < ev.ci.size(); ++i) v += std::max(0.0, ev.ci(i));
  return v;
}

int block_of_column(const std::vector<VarBlock>& blocks, int col) {
  for (size_t b = 0; b < blocks.size(); ++b)
    if (col >= blocks[b].offset && col < blocks[b].offset + blocks[b].size)
      return static_cast<int>(b);
  throw std::logic_error("solver: column outside every block");
}

// A best-so-far record: feasible points rank by objective, others by violation.
struct Incumbent {
  Eigen::VectorXd z;
  double f = kInf;
  double viol = kInf;
  void offer(const Eigen::VectorXd& zc, double fc, double vc, double tol_feas) {
    const bool cand_feas = vc <= tol_feas;
    const bool have_feas = viol <= tol_feas;
    bool better = false;
    if (cand_feas && !have_feas)
      better = true;
    else if (cand_feas && have_feas)
      better = fc < f;
    else if (!cand_feas && !have_feas)
      better = vc < viol;
    if (better || z.size() == 0) {
      z = zc;
      f = fc;
      viol = vc;
    }
  }
};

}  // namespace

const char* to_string(SolveStatus s) { return status_names[static_cast<int>(s)]; }

std::pair<Eigen::VectorXd, SolveReport> solve(const NlpInstance& nlp, const Eigen::VectorXd& init,
                                              double tol_feas, double tol_opt, int max_iter) {
  SolveOptions opts;
  opts.tol_feas = tol_feas;
  opts.tol_opt = tol_opt;
  opts.max_iter = max_iter;
  return solve(nlp, init, opts);
}

std::pair<Eigen::VectorXd, SolveReport> solve(const NlpInstance& nlp, const Eigen::VectorXd& init,
                                              const SolveOptions& opts) {
  if (init.size() != nlp.n_vars) throw std::invalid_argument("solve: init size mismatch");
  if (!init.allFinite()) throw std::invalid_argument("solve: init must be finite");

  const std::vector<VarBlock> blocks = nlp.effective_blocks();
  const int nb = static_cast<int>(blocks.size());

  Eigen::VectorXd z = clip_to_bounds(nlp, init);
  SolveReport report;
  Incumbent best;

  std::vector<BlockWork> work(static_cast<size_t>(nb));
  std::vector<Eigen::MatrixXd> h0_base(static_cast<size_t>(nb));
  for (int b = 0; b < nb; ++b) {
    work[static_cast<size_t>(b)].vb = blocks[static_cast<size_t>(b)];
    Eigen::MatrixXd h0;
    if (!nlp.h0_blocks.empty())
      h0 = nlp.h0_blocks[static_cast<size_t>(b)];
    else
      h0 = Eigen::MatrixXd::Zero(blocks[static_cast<size_t>(b)].size, blocks[static_cast<size_t>(b)].size);
    const double delta = 1e-6 * (1.0 + h0.lpNorm<Eigen::Infinity>());
    h0_base[static_cast<size_t>(b)] =
        h0 + delta * Eigen::MatrixXd::Identity(h0.rows(), h0.cols());
    work[static_cast<size_t>(b)].C = Eigen::MatrixXd::Zero(h0.rows(), h0.cols());
  }
  Eigen::VectorXd mu_latest = Eigen::VectorXd::Zero(std::max(nlp.n_ineq, 1));

  // Per-row l1 penalty weights. A single scalar penalty driven by the largest
  // multiplier strangles steps whose only cost is a mild quadratic overshoot
  // of one cheap constraint, so each row carries its own weight.
  Eigen::VectorXd pen_eq = Eigen::VectorXd::Ones(std::max(nlp.n_eq, 1));
  Eigen::VectorXd pen_ineq = Eigen::VectorXd::Ones(std::max(nlp.n_ineq, 1));
  auto merit_of = [&](const Evaluation& e) {
    double v = e.f;
    for (Eigen::Index i = 0; i < e.ce.size(); ++i) v += pen_eq(i) * std::abs(e.ce(i));
    for (Eigen::Index i = 0; i < e.ci.size(); ++i) v += pen_ineq(i) * std::max(0.0, e.ci(i));
    return v;
  };
  auto weighted_viol = [&](const Evaluation& e) {
    double v = 0.0;
    for (Eigen::Index i = 0; i < e.ce.size(); ++i) v += pen_eq(i) * std::abs(e.ce(i));
    for (Eigen::Index i = 0; i < e.ci.size(); ++i) v += pen_ineq(i) * std::max(0.0, e.ci(i));
    return v;
  };
  int restoration_stalls = 0;
  int linesearch_stalls = 0;

  // Deferred BFGS data: gradient of the Lagrangian at the previous iterate,
  // re-evaluated with the current multipliers.
  bool have_prev = false;
  Eigen::VectorXd z_prev, gradL_prev_point;  // grad f + J' mults evaluated at z_prev
  Eigen::VectorXd mult_eq_prev, mult_ineq_prev;
  std::vector<SparseRow> je_prev, ji_prev;
  Eigen::VectorXd g_prev;

  auto gradL = [&](const Eigen::VectorXd& g, const std::vector<SparseRow>& je,
                   const std::vector<SparseRow>& ji, const Eigen::VectorXd& lam,
                   const Eigen::VectorXd& mu) {
    Eigen::VectorXd out = g;
    for (size_t r = 0; r < je.size(); ++r)
      for (size_t k = 0; k < je[r].idx.size(); ++k)
        out(je[r].idx[k]) += lam(static_cast<Eigen::Index>(r)) * je[r].val[k];
    for (size_t r = 0; r < ji.size(); ++r)
      for (size_t k = 0; k < ji[r].idx.size(); ++k)
        out(ji[r].idx[k]) += mu(static_cast<Eigen::Index>(r)) * ji[r].val[k];
    return out;
  };

  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    Evaluation ev = evaluate(nlp, z, true);
    const double viol = violation_inf(ev);
    best.offer(z, ev.f, viol, opts.tol_feas);
    if (opts.iterate_log) opts.iterate_log->push_back(z);

    // ---- Hessian model: Gauss-Newton base (objective curvature plus any
    // declared multiplier-weighted constraint curvature) plus the BFGS
    // correction carried in C.
    {
      std::vector<Eigen::MatrixXd> extra;
      if (nlp.constraint_curvature) {
        extra.resize(work.size());
        for (size_t wb = 0; wb < work.size(); ++wb)
          extra[wb] = Eigen::MatrixXd::Zero(work[wb].vb.size, work[wb].vb.size);
        nlp.constraint_curvature(z, mu_latest, extra);
      }
      for (size_t wb = 0; wb < work.size(); ++wb) {
        work[wb].B = h0_base[wb] + work[wb].C;
        if (!extra.empty()) work[wb].B += extra[wb];
      }
    }

    // ---- BFGS update deferred from the previous accepted step ----
    if (have_prev) {
      const Eigen::VectorXd gL_new = gradL(ev.g, ev.je, ev.ji, mult_eq_prev, mult_ineq_prev);
      const Eigen::VectorXd s_full = z - z_prev;
      const Eigen::VectorXd y_full = gL_new - gradL_prev_point;
      for (size_t wb = 0; wb < work.size(); ++wb) {
        auto& w = work[wb];
        const auto seg_s = s_full.segment(w.vb.offset, w.vb.size);
        const auto seg_y = y_full.segment(w.vb.offset, w.vb.size);
        const double sn = seg_s.norm();
        if (sn < 1e-14) continue;
        Eigen::VectorXd q = w.B * seg_s;
        const double sBs = seg_s.dot(q);
        if (!(sBs > 1e-16)) {
          w.B -= w.C;  // negative curvature: reset to the Gauss-Newton base
          w.C.setZero();
          continue;
        }
        const double sy = seg_s.dot(seg_y);
        double theta = 1.0;
        if (sy < 0.2 * sBs) theta = 0.8 * sBs / (sBs - sy);
        const Eigen::VectorXd rvec = theta * seg_y + (1.0 - theta) * q;
        const double sr = seg_s.dot(rvec);
        if (sr > 1e-14 * sn * sn) {
          const Eigen::MatrixXd upd =
              (rvec * rvec.transpose()) / sr - (q * q.transpose()) / sBs;
          if (upd.allFinite()) {
            w.C += upd;
            w.B += upd;
          }
        }
      }
      have_prev = false;
    }

    // ---- partition equality rows; cross-block rows fold into ineq pairs ----
    std::vector<int> folded_eq;  // equality rows spanning several blocks
    for (auto& w : work) w.eq_rows.clear();
    for (int r = 0; r < nlp.n_eq; ++r) {
      const auto& row = ev.je[static_cast<size_t>(r)];
      if (row.idx.empty()) {
        // Constant-row constraint: consistent only if its value is ~0.
        if (std::abs(ev.ce(r)) > opts.tol_feas) folded_eq.push_back(r);
        continue;
      }
      const int b0 = block_of_column(blocks, row.idx.front());
      bool spans = false;
      for (int c : row.idx)
        if (block_of_column(blocks, c) != b0) {
          spans = true;
          break;
        }
      if (spans)
        folded_eq.push_back(r);
      else
        work[static_cast<size_t>(b0)].eq_rows.push_back(r);
    }

    // ---- per-block elimination of the owned equality rows ----
    bool inconsistent = false;
    int total_dof = 0;
    for (auto& w : work) {
      const int sz = w.vb.size;
      const int me = static_cast<int>(w.eq_rows.size());
      if (me == 0) {
        w.Z = Eigen::MatrixXd::Identity(sz, sz);
        w.d0 = Eigen::VectorXd::Zero(sz);
        w.dof = sz;
        w.pinv_t.resize(0, 0);
      } else {
        w.Je.setZero(me, sz);
        Eigen::VectorXd ce_b(me);
        for (int rr = 0; rr < me; ++rr) {
          const int r = w.eq_rows[static_cast<size_t>(rr)];
          ce_b(rr) = ev.ce(r);
          const auto& row = ev.je[static_cast<size_t>(r)];
          for (size_t k = 0; k < row.idx.size(); ++k)
            w.Je(rr, row.idx[k] - w.vb.offset) += row.val[k];
        }
        w.cod.setThreshold(1e-10);
        w.cod.compute(w.Je);
        const int rank = static_cast<int>(w.cod.rank());
        w.d0 = w.cod.solve(-ce_b);
        if ((w.Je * w.d0 + ce_b).lpNorm<Eigen::Infinity>() >
            std::max(1e-9, 1e-9 * ce_b.lpNorm<Eigen::Infinity>()))
          inconsistent = true;
        // Null-space basis from A P = Q [T 0; 0 0] Z: the trailing columns of
        // P Z^T span ker(A) and are orthonormal.
        w.Z = w.cod.colsPermutation() *
              Eigen::MatrixXd(w.cod.matrixZ().transpose()).rightCols(sz - rank);
        w.dof = sz - rank;
        w.pinv_t = w.cod.pseudoInverse().transpose();
      }
      w.y_off = total_dof;
      total_dof += w.dof;
    }

    auto restoration_step = [&]() -> bool {
      // Damped Gauss-Newton on the violated constraint set.
      std::vector<std::pair<const SparseRow*, double>> rows;
      for (int r = 0; r < nlp.n_eq; ++r) rows.push_back({&ev.je[static_cast<size_t>(r)], ev.ce(r)});
      for (int r = 0; r < nlp.n_ineq; ++r)
        if (ev.ci(r) > 0.0) rows.push_back({&ev.ji[static_cast<size_t>(r)], ev.ci(r)});
      if (rows.empty()) return false;
      Eigen::MatrixXd Jv = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), nlp.n_vars);
      Eigen::VectorXd cv(static_cast<Eigen::Index>(rows.size()));
      for (size_t r = 0; r < rows.size(); ++r) {
        cv(static_cast<Eigen::Index>(r)) = rows[r].second;
        for (size_t k = 0; k < rows[r].first->idx.size(); ++k)
          Jv(static_cast<Eigen::Index>(r), rows[r].first->idx[k]) = rows[r].first->val[k];
      }
      Eigen::MatrixXd JtJ = Jv.transpose() * Jv;
      const double tau = 1e-6 * (1.0 + JtJ.diagonal().lpNorm<Eigen::Infinity>());
      JtJ.diagonal().array() += tau;
      const Eigen::VectorXd dir = Eigen::LDLT<Eigen::MatrixXd>(JtJ).solve(-Jv.transpose() * cv);
      const double v0 = violation_l1(ev);
      double alpha = 1.0;
      for (int ls = 0; ls < 30; ++ls, alpha *= 0.5) {
        const Eigen::VectorXd zt = clip_to_bounds(nlp, z + alpha * dir);
        Evaluation et = evaluate(nlp, zt, false);
        if (violation_l1(et) < v0 - 1e-12) {
          z = zt;
          return true;
        }
      }
      return false;
    };

    if (inconsistent) {
      if (!restoration_step()) {
        ++restoration_stalls;
        if (restoration_stalls >= 3) {
          report.status = SolveStatus::Infeasible;
          break;
        }
      } else {
        restoration_stalls = 0;
      }
      continue;
    }

    // ---- reduced QP assembly ----
    Eigen::MatrixXd Gred = Eigen::MatrixXd::Zero(total_dof, total_dof);
    Eigen::VectorXd ared(total_dof);
    Eigen::VectorXd d0_full = Eigen::VectorXd::Zero(nlp.n_vars);
    for (auto& w : work) d0_full.segment(w.vb.offset, w.vb.size) = w.d0;
    for (auto& w : work) {
      const Eigen::MatrixXd BZ = w.B * w.Z;
      Gred.block(w.y_off, w.y_off, w.dof, w.dof) = w.Z.transpose() * BZ;
      ared.segment(w.y_off, w.dof) =
          w.Z.transpose() * (ev.g.segment(w.vb.offset, w.vb.size) + w.B * w.d0);
    }

    // Rows: nonlinear inequalities, folded equality pairs, finite bounds.
    struct RedRow {
      Eigen::VectorXd coef;
      double rhs;
      int kind;  // 0 ineq, 1 folded+, 2 folded-, 3 upper bound, 4 lower bound
      int ref;   // constraint row or variable index
    };
    std::vector<RedRow> rows;
    auto reduce_row = [&](const SparseRow& row) {
      Eigen::VectorXd coef = Eigen::VectorXd::Zero(total_dof);
      for (size_t k = 0; k < row.idx.size(); ++k) {
        const int b = block_of_column(blocks, row.idx[k]);
        const auto& w = work[static_cast<size_t>(b)];
        coef.segment(w.y_off, w.dof) +=
            row.val[k] * w.Z.row(row.idx[k] - w.vb.offset).transpose();
      }
      return coef;
    };
    auto lin_value = [&](const SparseRow& row, double c0) { return c0 + row.dot(d0_full); };

    for (int r = 0; r < nlp.n_ineq; ++r) {
      const auto& row = ev.ji[static_cast<size_t>(r)];
      rows.push_back({reduce_row(row), -lin_value(row, ev.ci(r)), 0, r});
    }
    for (int fr : folded_eq) {
      const auto& row = ev.je[static_cast<size_t>(fr)];
      const Eigen::VectorXd coef = reduce_row(row);
      const double v = lin_value(row, ev.ce(fr));
      rows.push_back({coef, -v, 1, fr});
      rows.push_back({-coef, v, 2, fr});
    }
    for (int i = 0; i < nlp.n_vars; ++i) {
      const int b = block_of_column(blocks, i);
      const auto& w = work[static_cast<size_t>(b)];
      const double base = z(i) + d0_full(i);
      if (std::isfinite(nlp.ub(i))) {
        Eigen::VectorXd coef = Eigen::VectorXd::Zero(total_dof);
        coef.segment(w.y_off, w.dof) = w.Z.row(i - w.vb.offset).transpose();
        rows.push_back({coef, nlp.ub(i) - base, 3, i});
      }
      if (std::isfinite(nlp.lb(i))) {
        Eigen::VectorXd coef = Eigen::VectorXd::Zero(total_dof);
        coef.segment(w.y_off, w.dof) = -w.Z.row(i - w.vb.offset).transpose();
        rows.push_back({coef, base - nlp.lb(i), 4, i});
      }
    }

    Eigen::MatrixXd Cmat(static_cast<Eigen::Index>(rows.size()), total_dof);
    Eigen::VectorXd dvec(static_cast<Eigen::Index>(rows.size()));
    for (size_t r = 0; r < rows.size(); ++r) {
      Cmat.row(static_cast<Eigen::Index>(r)) = rows[r].coef.transpose();
      dvec(static_cast<Eigen::Index>(r)) = rows[r].rhs;
    }

    QpResult qp;
    {
      double jitter = 0.0;
      for (int attempt = 0; attempt < 4; ++attempt) {
        Eigen::MatrixXd Gtry = Gred;
        if (jitter > 0.0) Gtry.diagonal().array() += jitter;
        try {
          qp = solve_qp(Gtry, ared, Cmat, dvec);
          break;
        } catch (const std::runtime_error&) {
          jitter = (jitter == 0.0) ? 1e-8 * (1.0 + Gred.diagonal().maxCoeff()) : jitter * 100.0;
        }
      }
    }

    if (!qp.feasible) {
      if (!restoration_step()) {
        ++restoration_stalls;
        if (restoration_stalls >= 3 && viol > opts.tol_feas) {
          report.status = SolveStatus::Infeasible;
          break;
        }
        if (restoration_stalls >= 6) break;  // feasible but the QP keeps failing
      } else {
        restoration_stalls = 0;
      }
      continue;
    }
    restoration_stalls = 0;

    // ---- step, multipliers, KKT residual ----
    Eigen::VectorXd d = d0_full;
    for (auto& w : work)
      d.segment(w.vb.offset, w.vb.size) += w.Z * qp.y.segment(w.y_off, w.dof);

    Eigen::VectorXd mu = Eigen::VectorXd::Zero(std::max(nlp.n_ineq, 1));
    Eigen::VectorXd lam = Eigen::VectorXd::Zero(std::max(nlp.n_eq, 1));
    Eigen::VectorXd bound_force = Eigen::VectorXd::Zero(nlp.n_vars);
    for (size_t r = 0; r < rows.size(); ++r) {
      const double m = qp.mult(static_cast<Eigen::Index>(r));
      if (m == 0.0) continue;
      switch (rows[r].kind) {
        case 0: mu(rows[r].ref) += m; break;
        case 1: lam(rows[r].ref) += m; break;
        case 2: lam(rows[r].ref) -= m; break;
        case 3: bound_force(rows[r].ref) += m; break;
        case 4: bound_force(rows[r].ref) -= m; break;
      }
    }

    mu_latest = mu;  // feeds the declared constraint curvature next iteration

    // rho = grad f + J_I' mu + bound forces; equality multipliers then solve
    // the remaining least-squares stationarity per block.
    Eigen::VectorXd rho = ev.g + bound_force;
    for (int r = 0; r < nlp.n_ineq; ++r)
      for (size_t k = 0; k < ev.ji[static_cast<size_t>(r)].idx.size(); ++k)
        rho(ev.ji[static_cast<size_t>(r)].idx[k]) += mu(r) * ev.ji[static_cast<size_t>(r)].val[k];
    for (int fr : folded_eq)
      for (size_t k = 0; k < ev.je[static_cast<size_t>(fr)].idx.size(); ++k)
        rho(ev.je[static_cast<size_t>(fr)].idx[k]) += lam(fr) * ev.je[static_cast<size_t>(fr)].val[k];
    for (auto& w : work) {
      if (w.eq_rows.empty()) continue;
      const Eigen::VectorXd lam_b = -w.pinv_t * rho.segment(w.vb.offset, w.vb.size);
      for (int rr = 0; rr < static_cast<int>(w.eq_rows.size()); ++rr)
        lam(w.eq_rows[static_cast<size_t>(rr)]) = lam_b(rr);
    }
    Eigen::VectorXd kkt = rho;
    for (auto& w : work)
      for (int rr = 0; rr < static_cast<int>(w.eq_rows.size()); ++rr) {
        const int r = w.eq_rows[static_cast<size_t>(rr)];
        for (size_t k = 0; k < ev.je[static_cast<size_t>(r)].idx.size(); ++k)
          kkt(ev.je[static_cast<size_t>(r)].idx[k]) += lam(r) * ev.je[static_cast<size_t>(r)].val[k];
      }
    // Bound-active components carry sign-constrained multipliers implicitly.
    for (int i = 0; i < nlp.n_vars; ++i) {
      if (std::isfinite(nlp.ub(i)) && z(i) >= nlp.ub(i) - 1e-10 && kkt(i) < 0.0) kkt(i) = 0.0;
      if (std::isfinite(nlp.lb(i)) && z(i) <= nlp.lb(i) + 1e-10 && kkt(i) > 0.0) kkt(i) = 0.0;
    }
    const double stat = kkt.lpNorm<Eigen::Infinity>() / (1.0 + ev.g.lpNorm<Eigen::Infinity>());

    report.stationarity = stat;
    report.violation = viol;
    if (viol <= opts.tol_feas && stat <= opts.tol_opt) {
      report.status = SolveStatus::Optimal;
      best.offer(z, ev.f, viol, opts.tol_feas);
      break;
    }

    // ---- l1 merit line search ----
    // Per-row weights track the current multiplier estimates: raise promptly,
    // relax halfway when a row's multiplier drops.
    for (int r = 0; r < nlp.n_eq; ++r) {
      const double want = 1.1 * std::abs(lam(r)) + 1.0;
      pen_eq(r) = want >= pen_eq(r) ? want : 0.5 * (pen_eq(r) + want);
    }
    for (int r = 0; r < nlp.n_ineq; ++r) {
      const double want = 1.1 * mu(r) + 1.0;
      pen_ineq(r) = want >= pen_ineq(r) ? want : 0.5 * (pen_ineq(r) + want);
    }

    const double v1 = violation_l1(ev);
    const double wv0 = weighted_viol(ev);
    const double merit0 = ev.f + wv0;
    const double descent = ev.g.dot(d) - wv0;
    const double dn = d.lpNorm<Eigen::Infinity>();

    if (dn <= 1e-14 * (1.0 + z.lpNorm<Eigen::Infinity>())) {
      // Nowhere to go; either we are done or the model is exhausted.
      if (viol <= opts.tol_feas) {
        report.status = (stat <= opts.tol_opt) ? SolveStatus::Optimal : SolveStatus::MaxIter;
        break;
      }
      if (!restoration_step()) {
        report.status = SolveStatus::Infeasible;
        break;
      }
      continue;
    }

    double alpha = 1.0;
    double accepted_alpha = -1.0;
    Eigen::VectorXd z_next;
    Evaluation ev_next;
    double best_trial_merit = kInf, best_trial_alpha = 1.0;
    for (int ls = 0; ls < 28; ++ls, alpha *= 0.5) {
      Eigen::VectorXd zt = clip_to_bounds(nlp, z + alpha * d);
      Evaluation et = evaluate(nlp, zt, false);
      const double merit_t = merit_of(et);
      if (merit_t < best_trial_merit) {
        best_trial_merit = merit_t;
        best_trial_alpha = alpha;
      }
      if (merit_t <= merit0 + 1e-4 * alpha * descent) {
        accepted_alpha = alpha;
        z_next = std::move(zt);
        ev_next = std::move(et);
        break;
      }
      if (ls == 0 && nlp.n_eq > 0 && violation_l1(et) > v1) {
        // Second-order correction against the Maratos effect: kill the
        // equality residual left at the full-step trial point using the
        // factorizations from the current iterate.
        Eigen::VectorXd dc = Eigen::VectorXd::Zero(nlp.n_vars);
        const Eigen::VectorXd ce_trial = nlp.eq(zt);
        bool soc_ok = ce_trial.allFinite();
        for (auto& w : work) {
          if (!soc_ok || w.eq_rows.empty()) continue;
          Eigen::VectorXd ce_t(static_cast<Eigen::Index>(w.eq_rows.size()));
          for (int rr = 0; rr < static_cast<int>(w.eq_rows.size()); ++rr)
            ce_t(rr) = ce_trial(w.eq_rows[static_cast<size_t>(rr)]);
          dc.segment(w.vb.offset, w.vb.size) = w.cod.solve(-ce_t);
        }
        if (soc_ok) {
          Eigen::VectorXd zs = clip_to_bounds(nlp, z + d + dc);
          Evaluation es = evaluate(nlp, zs, false);
          const double merit_s = merit_of(es);
          if (merit_s <= merit0 + 1e-4 * descent) {
            accepted_alpha = 1.0;
            z_next = std::move(zs);
            ev_next = std::move(es);
            break;
          }
        }
      }
    }

    if (accepted_alpha < 0.0) {
      ++linesearch_stalls;
      if (linesearch_stalls >= 3) break;  // max_iter-style exit with best iterate
      accepted_alpha = best_trial_alpha;
      z_next = clip_to_bounds(nlp, z + accepted_alpha * d);
      ev_next = evaluate(nlp, z_next, false);
    } else {
      linesearch_stalls = 0;
    }

    if (opts.trace)
      (*opts.trace) << iter << ',' << merit0 << ',' << viol << ',' << accepted_alpha << '\n';

    // Stash data for the deferred BFGS update.
    z_prev = z;
    g_prev = ev.g;
    mult_eq_prev = lam;
    mult_ineq_prev = mu;
    gradL_prev_point = gradL(ev.g, ev.je, ev.ji, lam, mu);
    have_prev = true;

    z = std::move(z_next);
    best.offer(z, ev_next.f, violation_inf(ev_next), opts.tol_feas);
  }

  if (report.status == SolveStatus::Optimal) {
    report.iterations = iter;
    return {z, report};
  }

  // Non-optimal exits return the best iterate seen.
  Eigen::VectorXd zr = best.z.size() > 0 ? best.z : z;
  Evaluation ev = evaluate(nlp, zr, false);
  report.iterations = iter;
  report.violation = violation_inf(ev);
  if (report.status != SolveStatus::Infeasible)
    report.status = SolveStatus::MaxIter;
  return {zr, report};
}

DerivativeReport check_derivatives(const NlpInstance& nlp, const Eigen::VectorXd& point,
                                   double tol) {
  DerivativeReport rep;
  const Eigen::VectorXd g = nlp.gradient(point);
  std::vector<SparseRow> je, ji;
  if (nlp.n_eq > 0) nlp.eq_jacobian(point, je);
  if (nlp.n_ineq > 0) nlp.ineq_jacobian(point, ji);

  Eigen::MatrixXd JE = Eigen::MatrixXd::Zero(nlp.n_eq, nlp.n_vars);
  Eigen::MatrixXd JI = Eigen::MatrixXd::Zero(nlp.n_ineq, nlp.n_vars);
  for (int r = 0; r < nlp.n_eq; ++r)
    for (size_t k = 0; k < je[static_cast<size_t>(r)].idx.size(); ++k)
      JE(r, je[static_cast<size_t>(r)].idx[k]) += je[static_cast<size_t>(r)].val[k];
  for (int r = 0; r < nlp.n_ineq; ++r)
    for (size_t k = 0; k < ji[static_cast<size_t>(r)].idx.size(); ++k)
      JI(r, ji[static_cast<size_t>(r)].idx[k]) += ji[static_cast<size_t>(r)].val[k];

  auto rel_err = [](double a, double n) {
    return std::abs(a - n) / std::max({1.0, std::abs(a), std::abs(n)});
  };

  for (int j = 0; j < nlp.n_vars; ++j) {
    const double h = 1e-6 * (1.0 + std::abs(point(j)));
    Eigen::VectorXd zp = point, zm = point;
    zp(j) += h;
    zm(j) -= h;

    const double gfd = (nlp.objective(zp) - nlp.objective(zm)) / (2.0 * h);
    ++rep.entries_checked;
    if (rel_err(g(j), gfd) > tol) rep.flags.push_back({'g', 0, j, g(j), gfd, rel_err(g(j), gfd)});

    if (nlp.n_eq > 0) {
      const Eigen::VectorXd col = (nlp.eq(zp) - nlp.eq(zm)) / (2.0 * h);
      for (int r = 0; r < nlp.n_eq; ++r) {
        ++rep.entries_checked;
        const double e = rel_err(JE(r, j), col(r));
        if (e > tol) rep.flags.push_back({'E', r, j, JE(r, j), col(r), e});
      }
    }
    if (nlp.n_ineq > 0) {
      const Eigen::VectorXd col = (nlp.ineq(zp) - nlp.ineq(zm)) / (2.0 * h);
      for (int r = 0; r < nlp.n_ineq; ++r) {
        ++rep.entries_checked;
        const double e = rel_err(JI(r, j), col(r));
        if (e > tol) rep.flags.push_back({'I', r, j, JI(r, j), col(r), e});
      }
    }
  }
  return rep;
}

}  // namespace swarm::solver
