#include "swarm/ocp.hpp"

#include <cmath>

namespace swarm::ocp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMarginEps = 1e-6;  // strict-inequality slack for the dual form

double quad(const Eigen::VectorXd& v, const Eigen::VectorXd& diag) {
  return (diag.array() * v.array().square()).sum();
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> stage_jacobian(const dynamics::AgentModel& md,
                                                           const Eigen::VectorXd& x,
                                                           const Eigen::VectorXd& u) {
  if (md.jacobian) return md.jacobian(x, u);
  return dynamics::linearize(md, x, u);
}

Eigen::Matrix2d rot_derivative(const Eigen::Matrix2d& R) {
  // d/dtheta of [[c,-s],[s,c]] expressed through R itself.
  Eigen::Matrix2d D;
  D << -R(1, 0), -R(0, 0), R(0, 0), -R(1, 0);
  return D;
}

}  // namespace

void OcpConfig::validate(int n, int m) const {
  if (N < 2) throw std::invalid_argument("OcpConfig: N >= 2 required");
  if (!(beta > 0.0)) throw std::invalid_argument("OcpConfig: beta > 0 required");
  if (d_min < 0.0) throw std::invalid_argument("OcpConfig: d_min >= 0 required");
  if (n_facets < 3) throw std::invalid_argument("OcpConfig: n_facets >= 3 required");
  auto check = [](const Eigen::VectorXd& w, int want, const char* name) {
    if (w.size() != want || (w.array() <= 0.0).any())
      throw std::invalid_argument(std::string("OcpConfig: bad weight ") + name);
  };
  check(q_t, n, "q_t");
  check(q_s, n, "q_s");
  check(t_o, n, "t_o");
  check(r_t, m, "r_t");
  check(r_s, m, "r_s");
}

OcpConfig default_config(int n, int m) {
  OcpConfig cfg;
  cfg.q_t = Eigen::VectorXd::Constant(n, 0.1);
  cfg.q_t(0) = cfg.q_t(1) = 1.0;
  cfg.q_s = cfg.q_t;
  cfg.t_o = cfg.q_t;
  cfg.r_t = Eigen::VectorXd::Constant(m, 0.05);
  cfg.r_s = cfg.r_t;
  return cfg;
}

void FhocpProblem::validate(const OcpConfig& cfg) const {
  if (agents.empty()) throw std::invalid_argument("FhocpProblem: empty cluster");
  for (const auto& a : agents) {
    if (!a.model) throw std::invalid_argument("FhocpProblem: missing model");
    cfg.validate(a.model->n, a.model->m);
    if (a.x0.size() != a.model->n || a.ref.x.size() != a.model->n ||
        a.ref.u.size() != a.model->m)
      throw std::invalid_argument("FhocpProblem: dimension mismatch");
    if (((a.x0 - a.model->x_ub).array() > 1e-9).any() ||
        ((a.model->x_lb - a.x0).array() > 1e-9).any())
      throw std::invalid_argument("FhocpProblem: initial state outside its box");
    if (a.safe_set.num_facets() < 3 || (a.safe_set.b().array() <= 0.0).any())
      throw std::invalid_argument("FhocpProblem: safe set must contain the origin strictly");
    if (!(a.j_s_bound >= 0.0))
      throw std::invalid_argument("FhocpProblem: safe bound must be >= 0 or the +inf sentinel");
  }
  for (auto [i, j] : coupling_pairs)
    if (i < 0 || j <= i || j >= static_cast<int>(agents.size()))
      throw std::invalid_argument("FhocpProblem: bad coupling pair");
}

double tracking_cost(const std::vector<Eigen::VectorXd>& x_t,
                     const std::vector<Eigen::VectorXd>& u_t, const Eigen::VectorXd& xbar_s,
                     const AgentRef& ref, const OcpConfig& cfg) {
  if (static_cast<int>(u_t.size()) != cfg.N || static_cast<int>(x_t.size()) != cfg.N + 1)
    throw std::invalid_argument("tracking_cost: trajectory length mismatch");
  double c = 0.0;
  for (int j = 0; j < cfg.N; ++j) {
    c += quad(x_t[static_cast<size_t>(j)] - ref.x, cfg.q_t);
    c += quad(u_t[static_cast<size_t>(j)] - ref.u, cfg.r_t);
  }
  return c + cfg.beta * quad(xbar_s - ref.x, cfg.t_o);
}

double safe_cost(const std::vector<Eigen::VectorXd>& x_s, const std::vector<Eigen::VectorXd>& u_s,
                 const Eigen::VectorXd& xbar_s, const Eigen::VectorXd& ubar_s, const AgentRef& ref,
                 const OcpConfig& cfg) {
  if (static_cast<int>(u_s.size()) != cfg.N || static_cast<int>(x_s.size()) != cfg.N + 1)
    throw std::invalid_argument("safe_cost: trajectory length mismatch");
  double c = 0.0;
  for (int j = 0; j < cfg.N; ++j) {
    c += quad(x_s[static_cast<size_t>(j)] - xbar_s, cfg.q_s);
    c += quad(u_s[static_cast<size_t>(j)] - ubar_s, cfg.r_s);
  }
  return c + quad(xbar_s - ref.x, cfg.t_o);
}

double offset_cost(const Eigen::VectorXd& xbar, const AgentRef& ref, const OcpConfig& cfg) {
  return quad(xbar - ref.x, cfg.t_o);
}

double update_safe_bound(const std::optional<AgentSolution>& prev, const AgentRef& ref,
                         const OcpConfig& cfg) {
  if (!prev) return kInf;
  const double js = safe_cost(prev->x_s, prev->u_s, prev->xbar_s, prev->ubar_s, ref, cfg);
  const double stage0 = quad(prev->x_s[0] - prev->xbar_s, cfg.q_s) +
                        quad(prev->u_s[0] - prev->ubar_s, cfg.r_s);
  return js - stage0;
}

AgentSolution candidate_agent(const AgentSolution& prev, const AgentRef& ref,
                              const OcpConfig& cfg) {
  const int N = cfg.N;
  AgentSolution out;
  out.id = prev.id;
  out.xbar_s = prev.xbar_s;
  out.ubar_s = prev.ubar_s;
  out.x_s.reserve(N + 1);
  out.u_s.reserve(N);
  for (int j = 1; j <= N; ++j) out.x_s.push_back(prev.x_s[static_cast<size_t>(j)]);
  out.x_s.push_back(prev.xbar_s);
  for (int j = 1; j <= N - 1; ++j) out.u_s.push_back(prev.u_s[static_cast<size_t>(j)]);
  out.u_s.push_back(prev.ubar_s);
  out.x_t = out.x_s;
  out.u_t = out.u_s;
  out.j_track = tracking_cost(out.x_t, out.u_t, out.xbar_s, ref, cfg);
  out.j_safe = safe_cost(out.x_s, out.u_s, out.xbar_s, out.ubar_s, ref, cfg);
  return out;
}

FhocpSolution candidate_solution(const FhocpSolution& prev, const std::vector<AgentRef>& refs,
                                 const OcpConfig& cfg) {
  if (refs.size() != prev.agents.size())
    throw std::invalid_argument("candidate_solution: one reference per agent");
  FhocpSolution out;
  out.report = prev.report;
  for (size_t a = 0; a < prev.agents.size(); ++a)
    out.agents.push_back(candidate_agent(prev.agents[a], refs[a], cfg));
  return out;
}

// ---------------------------------------------------------------------------
// FhocpNlp
// ---------------------------------------------------------------------------

FhocpNlp::FhocpNlp(FhocpProblem problem, OcpConfig cfg)
    : problem_(std::make_shared<FhocpProblem>(std::move(problem))), cfg_(std::move(cfg)) {
  problem_->validate(cfg_);
  assemble();
}

int FhocpNlp::u_t_index(int agent, int j) const { return layout_[static_cast<size_t>(agent)].u_t(j); }
int FhocpNlp::u_s_index(int agent, int j) const { return layout_[static_cast<size_t>(agent)].u_s(j); }
int FhocpNlp::x_t_index(int agent, int j) const { return layout_[static_cast<size_t>(agent)].x_t(j); }
int FhocpNlp::x_s_index(int agent, int j) const { return layout_[static_cast<size_t>(agent)].x_s(j); }
int FhocpNlp::xbar_index(int agent) const { return layout_[static_cast<size_t>(agent)].xbar(); }
int FhocpNlp::ubar_index(int agent) const { return layout_[static_cast<size_t>(agent)].ubar(); }

void FhocpNlp::assemble() {
  const auto& agents = problem_->agents;
  const int N = cfg_.N;
  const int na = static_cast<int>(agents.size());

  // Variable layout: one block per agent, then one per dual multiplier group.
  layout_.clear();
  int off = 0;
  for (int a = 0; a < na; ++a) {
    Layout L;
    L.off = off;
    L.n = agents[static_cast<size_t>(a)].model->n;
    L.m = agents[static_cast<size_t>(a)].model->m;
    L.N = N;
    layout_.push_back(L);
    off += L.size();
  }
  duals_.clear();
  if (cfg_.coupling == CouplingMode::PolytopeDual) {
    for (size_t p = 0; p < problem_->coupling_pairs.size(); ++p) {
      const auto [ia, ja] = problem_->coupling_pairs[p];
      const int fi = static_cast<int>(agents[static_cast<size_t>(ia)].shape.tmpl.num_facets());
      const int fj = static_cast<int>(agents[static_cast<size_t>(ja)].shape.tmpl.num_facets());
      for (int traj = 0; traj < 2; ++traj) {
        for (int j = 0; j <= N; ++j) {
          duals_.push_back({static_cast<int>(p), traj == 1, j, off, fi, fj});
          off += fi + fj;
        }
      }
    }
  }
  nlp_.n_vars = off;

  nlp_.blocks.clear();
  nlp_.h0_blocks.clear();
  for (int a = 0; a < na; ++a) {
    const Layout& L = layout_[static_cast<size_t>(a)];
    nlp_.blocks.push_back({L.off, L.size()});
    Eigen::MatrixXd h0 = Eigen::MatrixXd::Zero(L.size(), L.size());
    for (int j = 0; j < N; ++j) {
      for (int i = 0; i < L.n; ++i)
        h0(L.x_t(j) - L.off + i, L.x_t(j) - L.off + i) = 2.0 * cfg_.q_t(i);
      for (int i = 0; i < L.m; ++i)
        h0(L.u_t(j) - L.off + i, L.u_t(j) - L.off + i) += 2.0 * cfg_.r_t(i);
    }
    for (int i = 0; i < L.n; ++i)
      h0(L.xbar() - L.off + i, L.xbar() - L.off + i) = 2.0 * cfg_.beta * cfg_.t_o(i);
    nlp_.h0_blocks.push_back(std::move(h0));
  }
  for (const auto& db : duals_) {
    nlp_.blocks.push_back({db.off, db.fi + db.fj});
    nlp_.h0_blocks.push_back(Eigen::MatrixXd::Zero(db.fi + db.fj, db.fi + db.fj));
  }

  // Bounds.
  nlp_.lb = Eigen::VectorXd::Constant(nlp_.n_vars, -kInf);
  nlp_.ub = Eigen::VectorXd::Constant(nlp_.n_vars, kInf);
  for (int a = 0; a < na; ++a) {
    const Layout& L = layout_[static_cast<size_t>(a)];
    const auto& md = *agents[static_cast<size_t>(a)].model;
    auto set_u = [&](int at) {
      nlp_.lb.segment(at, L.m) = md.u_lb;
      nlp_.ub.segment(at, L.m) = md.u_ub;
    };
    auto set_x = [&](int at) {
      nlp_.lb.segment(at, L.n) = md.x_lb;
      nlp_.ub.segment(at, L.n) = md.x_ub;
    };
    set_u(L.u_shared());
    for (int j = 1; j < N; ++j) {
      set_u(L.u_t(j));
      set_u(L.u_s(j));
    }
    set_u(L.ubar());
    for (int j = 0; j <= N; ++j) {
      set_x(L.x_t(j));
      set_x(L.x_s(j));
    }
    set_x(L.xbar());
  }
  for (const auto& db : duals_)
    nlp_.lb.segment(db.off, db.fi + db.fj).setZero();  // multipliers >= 0

  // Equality rows: per agent [init_t, init_s, dyn_t, dyn_s, x_s(N)=xbar,
  // xbar=f(xbar,ubar)], then dual-form alignment rows per dual block.
  int n_eq = 0;
  for (int a = 0; a < na; ++a) n_eq += (2 * N + 4) * layout_[static_cast<size_t>(a)].n;
  const int align_base = n_eq;
  if (cfg_.coupling == CouplingMode::PolytopeDual) n_eq += 2 * static_cast<int>(duals_.size());
  nlp_.n_eq = n_eq;

  // Inequality rows: per agent safe-set rows, per agent the optional safe-cost
  // bound, then coupling rows pair-major, tracking trajectory first.
  int n_ineq = 0;
  std::vector<int> safe_row_base(static_cast<size_t>(na));
  for (int a = 0; a < na; ++a) {
    safe_row_base[static_cast<size_t>(a)] = n_ineq;
    const int facets = static_cast<int>(agents[static_cast<size_t>(a)].safe_set.num_facets());
    n_ineq += facets * N;  // Rate: j=0..N-1; ShiftedMembership: j=1..N
  }
  std::vector<int> bound_row(static_cast<size_t>(na), -1);
  for (int a = 0; a < na; ++a)
    if (std::isfinite(agents[static_cast<size_t>(a)].j_s_bound)) bound_row[static_cast<size_t>(a)] = n_ineq++;
  const int coupling_base = n_ineq;
  if (cfg_.coupling == CouplingMode::Sphere)
    n_ineq += 2 * (N + 1) * static_cast<int>(problem_->coupling_pairs.size());
  else
    n_ineq += 2 * static_cast<int>(duals_.size());  // margin + norm per dual block
  nlp_.n_ineq = n_ineq;
  n_coupling_rows_ = n_ineq - coupling_base;

  // Safe-cost bound rows are convex quadratics with a constant Hessian; hand
  // that curvature to the solver (scaled by the row multiplier) so warm starts
  // with an active bound take full Newton-like steps immediately.
  std::vector<Eigen::MatrixXd> js_hessians;
  for (int a = 0; a < na; ++a) {
    const Layout& L = layout_[static_cast<size_t>(a)];
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(L.size(), L.size());
    if (bound_row[static_cast<size_t>(a)] < 0) {
      js_hessians.push_back(std::move(H));
      continue;
    }
    auto couple = [&](int at_a, int at_b, const Eigen::VectorXd& wdiag) {
      for (Eigen::Index i = 0; i < wdiag.size(); ++i) {
        H(at_a + i, at_a + i) += 2.0 * wdiag(i);
        H(at_b + i, at_b + i) += 2.0 * wdiag(i);
        H(at_a + i, at_b + i) -= 2.0 * wdiag(i);
        H(at_b + i, at_a + i) -= 2.0 * wdiag(i);
      }
    };
    for (int j = 0; j < N; ++j) {
      couple(L.x_s(j) - L.off, L.xbar() - L.off, cfg_.q_s);
      couple(L.u_s(j) - L.off, L.ubar() - L.off, cfg_.r_s);
    }
    for (int i = 0; i < L.n; ++i)
      H(L.xbar() - L.off + i, L.xbar() - L.off + i) += 2.0 * cfg_.t_o(i);
    js_hessians.push_back(std::move(H));
  }

  // Shared state for the callbacks.
  auto prob = problem_;
  auto cfg = cfg_;
  auto layout = layout_;
  auto duals = duals_;

  nlp_.constraint_curvature = [bound_row, js_hessians, na](
                                  const Eigen::VectorXd&, const Eigen::VectorXd& mu,
                                  std::vector<Eigen::MatrixXd>& add) {
    for (int a = 0; a < na; ++a) {
      const int row = bound_row[static_cast<size_t>(a)];
      if (row < 0) continue;
      const double w = mu(row);
      if (w > 0.0) add[static_cast<size_t>(a)] += w * js_hessians[static_cast<size_t>(a)];
    }
  };

  nlp_.objective = [prob, cfg, layout](const Eigen::VectorXd& z) {
    double c = 0.0;
    for (size_t a = 0; a < prob->agents.size(); ++a) {
      const Layout& L = layout[a];
      const auto& ag = prob->agents[a];
      for (int j = 0; j < L.N; ++j) {
        c += quad(z.segment(L.x_t(j), L.n) - ag.ref.x, cfg.q_t);
        c += quad(z.segment(L.u_t(j), L.m) - ag.ref.u, cfg.r_t);
      }
      c += cfg.beta * quad(z.segment(L.xbar(), L.n) - ag.ref.x, cfg.t_o);
    }
    return c;
  };

  nlp_.gradient = [prob, cfg, layout](const Eigen::VectorXd& z) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(z.size());
    for (size_t a = 0; a < prob->agents.size(); ++a) {
      const Layout& L = layout[a];
      const auto& ag = prob->agents[a];
      for (int j = 0; j < L.N; ++j) {
        g.segment(L.x_t(j), L.n) +=
            2.0 * (cfg.q_t.array() * (z.segment(L.x_t(j), L.n) - ag.ref.x).array()).matrix();
        g.segment(L.u_t(j), L.m) +=
            2.0 * (cfg.r_t.array() * (z.segment(L.u_t(j), L.m) - ag.ref.u).array()).matrix();
      }
      g.segment(L.xbar(), L.n) +=
          2.0 * cfg.beta * (cfg.t_o.array() * (z.segment(L.xbar(), L.n) - ag.ref.x).array()).matrix();
    }
    return g;
  };

  const int n_eq_agents = align_base;
  nlp_.eq = [prob, layout, n_eq_agents](const Eigen::VectorXd& z) {
    Eigen::VectorXd ce(n_eq_agents);
    int at = 0;
    for (size_t a = 0; a < prob->agents.size(); ++a) {
      const Layout& L = layout[a];
      const auto& ag = prob->agents[a];
      ce.segment(at, L.n) = z.segment(L.x_t(0), L.n) - ag.x0;
      at += L.n;
      ce.segment(at, L.n) = z.segment(L.x_s(0), L.n) - ag.x0;
      at += L.n;
      for (int j = 0; j < L.N; ++j, at += L.n)
        ce.segment(at, L.n) =
            z.segment(L.x_t(j + 1), L.n) -
            ag.model->f(z.segment(L.x_t(j), L.n), z.segment(L.u_t(j), L.m));
      for (int j = 0; j < L.N; ++j, at += L.n)
        ce.segment(at, L.n) =
            z.segment(L.x_s(j + 1), L.n) -
            ag.model->f(z.segment(L.x_s(j), L.n), z.segment(L.u_s(j), L.m));
      ce.segment(at, L.n) = z.segment(L.x_s(L.N), L.n) - z.segment(L.xbar(), L.n);
      at += L.n;
      ce.segment(at, L.n) =
          z.segment(L.xbar(), L.n) -
          ag.model->f(z.segment(L.xbar(), L.n), z.segment(L.ubar(), L.m));
      at += L.n;
    }
    return ce;
  };

  if (cfg_.coupling == CouplingMode::PolytopeDual) {
    // Extend eq with alignment rows (2 per dual block).
    auto base_eq = nlp_.eq;
    nlp_.eq = [base_eq, prob, layout, duals](const Eigen::VectorXd& z) {
      Eigen::VectorXd head = base_eq(z);
      Eigen::VectorXd ce(head.size() + 2 * static_cast<Eigen::Index>(duals.size()));
      ce.head(head.size()) = head;
      Eigen::Index at = head.size();
      for (const auto& db : duals) {
        const auto [ia, ja] = prob->coupling_pairs[static_cast<size_t>(db.pair)];
        const auto& si = prob->agents[static_cast<size_t>(ia)].shape;
        const auto& sj = prob->agents[static_cast<size_t>(ja)].shape;
        const Layout& Li = layout[static_cast<size_t>(ia)];
        const Layout& Lj = layout[static_cast<size_t>(ja)];
        const int xi = db.safe ? Li.x_s(db.stage) : Li.x_t(db.stage);
        const int xj = db.safe ? Lj.x_s(db.stage) : Lj.x_t(db.stage);
        const Eigen::Matrix2d Ri = si.rotation(z.segment(xi, Li.n));
        const Eigen::Matrix2d Rj = sj.rotation(z.segment(xj, Lj.n));
        const Eigen::VectorXd lam = z.segment(db.off, db.fi);
        const Eigen::VectorXd mu = z.segment(db.off + db.fi, db.fj);
        ce.segment<2>(at) = Rj.transpose() * (si.tmpl.A().transpose() * lam) +
                            Ri.transpose() * (sj.tmpl.A().transpose() * mu);
        at += 2;
      }
      return ce;
    };
  }

  nlp_.eq_jacobian = [prob, layout, duals, mode = cfg_.coupling](const Eigen::VectorXd& z,
                                                                std::vector<solver::SparseRow>& rows) {
    rows.clear();
    for (size_t a = 0; a < prob->agents.size(); ++a) {
      const Layout& L = layout[a];
      const auto& md = *prob->agents[a].model;
      for (int tr = 0; tr < 2; ++tr) {  // init rows
        for (int i = 0; i < L.n; ++i) {
          solver::SparseRow r;
          r.add((tr == 0 ? L.x_t(0) : L.x_s(0)) + i, 1.0);
          rows.push_back(std::move(r));
        }
      }
      for (int tr = 0; tr < 2; ++tr) {  // dynamics rows
        for (int j = 0; j < L.N; ++j) {
          const int xs = tr == 0 ? L.x_t(j) : L.x_s(j);
          const int xn = tr == 0 ? L.x_t(j + 1) : L.x_s(j + 1);
          const int us = tr == 0 ? L.u_t(j) : L.u_s(j);
          const auto [A, B] = stage_jacobian(md, z.segment(xs, L.n), z.segment(us, L.m));
          for (int i = 0; i < L.n; ++i) {
            solver::SparseRow r;
            r.add(xn + i, 1.0);
            for (int c = 0; c < L.n; ++c)
              if (A(i, c) != 0.0) r.add(xs + c, -A(i, c));
            for (int c = 0; c < L.m; ++c)
              if (B(i, c) != 0.0) r.add(us + c, -B(i, c));
            rows.push_back(std::move(r));
          }
        }
      }
      for (int i = 0; i < L.n; ++i) {  // x_s(N) = xbar
        solver::SparseRow r;
        r.add(L.x_s(L.N) + i, 1.0);
        r.add(L.xbar() + i, -1.0);
        rows.push_back(std::move(r));
      }
      const auto [Ab, Bb] = stage_jacobian(md, z.segment(L.xbar(), L.n), z.segment(L.ubar(), L.m));
      for (int i = 0; i < L.n; ++i) {  // xbar = f(xbar, ubar)
        solver::SparseRow r;
        r.add(L.xbar() + i, 1.0 - Ab(i, i));
        for (int c = 0; c < L.n; ++c)
          if (c != i && Ab(i, c) != 0.0) r.add(L.xbar() + c, -Ab(i, c));
        for (int c = 0; c < L.m; ++c)
          if (Bb(i, c) != 0.0) r.add(L.ubar() + c, -Bb(i, c));
        rows.push_back(std::move(r));
      }
    }
    if (mode == CouplingMode::PolytopeDual) {
      for (const auto& db : duals) {
        const auto [ia, ja] = prob->coupling_pairs[static_cast<size_t>(db.pair)];
        const auto& si = prob->agents[static_cast<size_t>(ia)].shape;
        const auto& sj = prob->agents[static_cast<size_t>(ja)].shape;
        const Layout& Li = layout[static_cast<size_t>(ia)];
        const Layout& Lj = layout[static_cast<size_t>(ja)];
        const int xi = db.safe ? Li.x_s(db.stage) : Li.x_t(db.stage);
        const int xj = db.safe ? Lj.x_s(db.stage) : Lj.x_t(db.stage);
        const Eigen::Matrix2d Ri = si.rotation(z.segment(xi, Li.n));
        const Eigen::Matrix2d Rj = sj.rotation(z.segment(xj, Lj.n));
        const Eigen::VectorXd lam = z.segment(db.off, db.fi);
        const Eigen::VectorXd mu = z.segment(db.off + db.fi, db.fj);
        const Eigen::MatrixXd dLam = Rj.transpose() * si.tmpl.A().transpose();  // 2 x fi
        const Eigen::MatrixXd dMu = Ri.transpose() * sj.tmpl.A().transpose();   // 2 x fj
        const Eigen::Vector2d vi = si.tmpl.A().transpose() * lam;
        const Eigen::Vector2d vj = sj.tmpl.A().transpose() * mu;
        for (int comp = 0; comp < 2; ++comp) {
          solver::SparseRow r;
          for (int k = 0; k < db.fi; ++k)
            if (dLam(comp, k) != 0.0) r.add(db.off + k, dLam(comp, k));
          for (int k = 0; k < db.fj; ++k)
            if (dMu(comp, k) != 0.0) r.add(db.off + db.fi + k, dMu(comp, k));
          if (sj.heading_index >= 0) {
            const Eigen::Vector2d dj = rot_derivative(Rj).transpose() * vi;
            r.add(xj + sj.heading_index, dj(comp));
          }
          if (si.heading_index >= 0) {
            const Eigen::Vector2d di = rot_derivative(Ri).transpose() * vj;
            r.add(xi + si.heading_index, di(comp));
          }
          rows.push_back(std::move(r));
        }
      }
    }
  };

  nlp_.ineq = [prob, cfg, layout, duals, bound_row, na](const Eigen::VectorXd& z) {
    const int N = cfg.N;
    std::vector<double> vals;
    for (int a = 0; a < na; ++a) {
      const Layout& L = layout[static_cast<size_t>(a)];
      const auto& ag = prob->agents[static_cast<size_t>(a)];
      const auto& Ac = ag.safe_set.A();
      const auto& bc = ag.safe_set.b();
      if (cfg.safe_form == SafeSetForm::Rate) {
        for (int j = 0; j < N; ++j) {
          const Eigen::Vector2d dp =
              z.segment<2>(L.x_s(j + 1)) - z.segment<2>(L.x_s(j));
          for (Eigen::Index fct = 0; fct < Ac.rows(); ++fct)
            vals.push_back(Ac.row(fct).dot(dp) - bc(fct) / N);
        }
      } else {
        const Eigen::Vector2d p0 = ag.x0.head<2>();
        for (int j = 1; j <= N; ++j) {
          const Eigen::Vector2d dp = z.segment<2>(L.x_s(j)) - p0;
          for (Eigen::Index fct = 0; fct < Ac.rows(); ++fct)
            vals.push_back(Ac.row(fct).dot(dp) - bc(fct));
        }
      }
    }
    for (int a = 0; a < na; ++a) {
      if (bound_row[static_cast<size_t>(a)] < 0) continue;
      const Layout& L = layout[static_cast<size_t>(a)];
      const auto& ag = prob->agents[static_cast<size_t>(a)];
      double js = quad(z.segment(L.xbar(), L.n) - ag.ref.x, cfg.t_o);
      for (int j = 0; j < N; ++j) {
        js += quad(z.segment(L.x_s(j), L.n) - z.segment(L.xbar(), L.n), cfg.q_s);
        js += quad(z.segment(L.u_s(j), L.m) - z.segment(L.ubar(), L.m), cfg.r_s);
      }
      vals.push_back(js - ag.j_s_bound);
    }
    if (cfg.coupling == CouplingMode::Sphere) {
      for (auto [ia, ja] : prob->coupling_pairs) {
        const Layout& Li = layout[static_cast<size_t>(ia)];
        const Layout& Lj = layout[static_cast<size_t>(ja)];
        const double reach = prob->agents[static_cast<size_t>(ia)].sigma +
                             prob->agents[static_cast<size_t>(ja)].sigma + cfg.d_min;
        for (int tr = 0; tr < 2; ++tr) {
          for (int j = 0; j <= N; ++j) {
            const Eigen::Vector2d pi =
                tr == 0 ? z.segment<2>(Li.x_t(j)) : z.segment<2>(Li.x_s(j));
            const Eigen::Vector2d pj =
                tr == 0 ? z.segment<2>(Lj.x_t(j)) : z.segment<2>(Lj.x_s(j));
            vals.push_back(-(pi - pj).squaredNorm() + reach * reach);
          }
        }
      }
    } else {
      for (const auto& db : duals) {
        const auto [ia, ja] = prob->coupling_pairs[static_cast<size_t>(db.pair)];
        const auto& agi = prob->agents[static_cast<size_t>(ia)];
        const auto& agj = prob->agents[static_cast<size_t>(ja)];
        const Layout& Li = layout[static_cast<size_t>(ia)];
        const Layout& Lj = layout[static_cast<size_t>(ja)];
        const int xi = db.safe ? Li.x_s(db.stage) : Li.x_t(db.stage);
        const int xj = db.safe ? Lj.x_s(db.stage) : Lj.x_t(db.stage);
        const Eigen::VectorXd lam = z.segment(db.off, db.fi);
        const Eigen::VectorXd mu = z.segment(db.off + db.fi, db.fj);
        const Eigen::Vector2d ti = z.segment<2>(xi);
        const Eigen::Vector2d tj = z.segment<2>(xj);
        const double margin = -(agi.shape.tmpl.b() - agi.shape.tmpl.A() * tj).dot(lam) -
                              (agj.shape.tmpl.b() - agj.shape.tmpl.A() * ti).dot(mu) - cfg.d_min;
        vals.push_back(-margin + kMarginEps);  // margin >= eps_strict
        vals.push_back((agj.shape.tmpl.A().transpose() * mu).squaredNorm() - 1.0);
      }
    }
    return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size())).eval();
  };

  nlp_.ineq_jacobian = [prob, cfg, layout, duals, bound_row, na](
                           const Eigen::VectorXd& z, std::vector<solver::SparseRow>& rows) {
    const int N = cfg.N;
    rows.clear();
    for (int a = 0; a < na; ++a) {
      const Layout& L = layout[static_cast<size_t>(a)];
      const auto& Ac = prob->agents[static_cast<size_t>(a)].safe_set.A();
      if (cfg.safe_form == SafeSetForm::Rate) {
        for (int j = 0; j < N; ++j) {
          for (Eigen::Index fct = 0; fct < Ac.rows(); ++fct) {
            solver::SparseRow r;
            r.add(L.x_s(j + 1) + 0, Ac(fct, 0));
            r.add(L.x_s(j + 1) + 1, Ac(fct, 1));
            r.add(L.x_s(j) + 0, -Ac(fct, 0));
            r.add(L.x_s(j) + 1, -Ac(fct, 1));
            rows.push_back(std::move(r));
          }
        }
      } else {
        for (int j = 1; j <= N; ++j) {
          for (Eigen::Index fct = 0; fct < Ac.rows(); ++fct) {
            solver::SparseRow r;
            r.add(L.x_s(j) + 0, Ac(fct, 0));
            r.add(L.x_s(j) + 1, Ac(fct, 1));
            rows.push_back(std::move(r));
          }
        }
      }
    }
    for (int a = 0; a < na; ++a) {
      if (bound_row[static_cast<size_t>(a)] < 0) continue;
      const Layout& L = layout[static_cast<size_t>(a)];
      const auto& ag = prob->agents[static_cast<size_t>(a)];
      solver::SparseRow r;
      Eigen::VectorXd dxbar =
          2.0 * (cfg.t_o.array() * (z.segment(L.xbar(), L.n) - ag.ref.x).array()).matrix();
      Eigen::VectorXd dubar = Eigen::VectorXd::Zero(L.m);
      for (int j = 0; j < N; ++j) {
        const Eigen::VectorXd dx =
            2.0 * (cfg.q_s.array() *
                   (z.segment(L.x_s(j), L.n) - z.segment(L.xbar(), L.n)).array()).matrix();
        const Eigen::VectorXd du =
            2.0 * (cfg.r_s.array() *
                   (z.segment(L.u_s(j), L.m) - z.segment(L.ubar(), L.m)).array()).matrix();
        for (int i = 0; i < L.n; ++i) r.add(L.x_s(j) + i, dx(i));
        for (int i = 0; i < L.m; ++i) r.add(L.u_s(j) + i, du(i));
        dxbar -= dx;
        dubar -= du;
      }
      for (int i = 0; i < L.n; ++i) r.add(L.xbar() + i, dxbar(i));
      for (int i = 0; i < L.m; ++i) r.add(L.ubar() + i, dubar(i));
      rows.push_back(std::move(r));
    }
    if (cfg.coupling == CouplingMode::Sphere) {
      for (auto [ia, ja] : prob->coupling_pairs) {
        const Layout& Li = layout[static_cast<size_t>(ia)];
        const Layout& Lj = layout[static_cast<size_t>(ja)];
        for (int tr = 0; tr < 2; ++tr) {
          for (int j = 0; j <= N; ++j) {
            const int pi_at = tr == 0 ? Li.x_t(j) : Li.x_s(j);
            const int pj_at = tr == 0 ? Lj.x_t(j) : Lj.x_s(j);
            const Eigen::Vector2d dp = z.segment<2>(pi_at) - z.segment<2>(pj_at);
            solver::SparseRow r;
            r.add(pi_at + 0, -2.0 * dp(0));
            r.add(pi_at + 1, -2.0 * dp(1));
            r.add(pj_at + 0, 2.0 * dp(0));
            r.add(pj_at + 1, 2.0 * dp(1));
            rows.push_back(std::move(r));
          }
        }
      }
    } else {
      for (const auto& db : duals) {
        const auto [ia, ja] = prob->coupling_pairs[static_cast<size_t>(db.pair)];
        const auto& agi = prob->agents[static_cast<size_t>(ia)];
        const auto& agj = prob->agents[static_cast<size_t>(ja)];
        const Layout& Li = layout[static_cast<size_t>(ia)];
        const Layout& Lj = layout[static_cast<size_t>(ja)];
        const int xi = db.safe ? Li.x_s(db.stage) : Li.x_t(db.stage);
        const int xj = db.safe ? Lj.x_s(db.stage) : Lj.x_t(db.stage);
        const Eigen::VectorXd lam = z.segment(db.off, db.fi);
        const Eigen::VectorXd mu = z.segment(db.off + db.fi, db.fj);
        const Eigen::Vector2d ti = z.segment<2>(xi);
        const Eigen::Vector2d tj = z.segment<2>(xj);
        // margin row, negated: -dmargin everywhere.
        solver::SparseRow r;
        const Eigen::VectorXd dlam = -(agi.shape.tmpl.b() - agi.shape.tmpl.A() * tj);
        const Eigen::VectorXd dmu = -(agj.shape.tmpl.b() - agj.shape.tmpl.A() * ti);
        const Eigen::Vector2d dtj = agi.shape.tmpl.A().transpose() * lam;
        const Eigen::Vector2d dti = agj.shape.tmpl.A().transpose() * mu;
        for (int k = 0; k < db.fi; ++k) r.add(db.off + k, -dlam(k));
        for (int k = 0; k < db.fj; ++k) r.add(db.off + db.fi + k, -dmu(k));
        r.add(xj + 0, -dtj(0));
        r.add(xj + 1, -dtj(1));
        r.add(xi + 0, -dti(0));
        r.add(xi + 1, -dti(1));
        rows.push_back(std::move(r));
        // norm row (squared form).
        solver::SparseRow rn;
        const Eigen::VectorXd dn =
            2.0 * agj.shape.tmpl.A() * (agj.shape.tmpl.A().transpose() * mu);
        for (int k = 0; k < db.fj; ++k) rn.add(db.off + db.fi + k, dn(k));
        rows.push_back(std::move(rn));
      }
    }
  };
}

Eigen::VectorXd FhocpNlp::encode(const FhocpSolution& sol) const {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(nlp_.n_vars);
  for (size_t a = 0; a < layout_.size(); ++a) {
    const Layout& L = layout_[a];
    const auto& ag = sol.agents[a];
    z.segment(L.u_shared(), L.m) = ag.u_s[0];
    for (int j = 1; j < L.N; ++j) {
      z.segment(L.u_t(j), L.m) = ag.u_t[static_cast<size_t>(j)];
      z.segment(L.u_s(j), L.m) = ag.u_s[static_cast<size_t>(j)];
    }
    for (int j = 0; j <= L.N; ++j) {
      z.segment(L.x_t(j), L.n) = ag.x_t[static_cast<size_t>(j)];
      z.segment(L.x_s(j), L.n) = ag.x_s[static_cast<size_t>(j)];
    }
    z.segment(L.xbar(), L.n) = ag.xbar_s;
    z.segment(L.ubar(), L.m) = ag.ubar_s;
  }
  for (const auto& db : duals_)
    z.segment(db.off, db.fi + db.fj).setConstant(0.3);
  return z;
}

FhocpSolution FhocpNlp::decode(const Eigen::VectorXd& z) const {
  FhocpSolution sol;
  for (size_t a = 0; a < layout_.size(); ++a) {
    const Layout& L = layout_[a];
    const auto& ag = problem_->agents[a];
    AgentSolution out;
    out.id = ag.id;
    for (int j = 0; j <= L.N; ++j) {
      out.x_t.push_back(z.segment(L.x_t(j), L.n));
      out.x_s.push_back(z.segment(L.x_s(j), L.n));
    }
    for (int j = 0; j < L.N; ++j) {
      out.u_t.push_back(z.segment(L.u_t(j), L.m));
      out.u_s.push_back(z.segment(L.u_s(j), L.m));
    }
    out.xbar_s = z.segment(L.xbar(), L.n);
    out.ubar_s = z.segment(L.ubar(), L.m);
    out.j_track = tracking_cost(out.x_t, out.u_t, out.xbar_s, ag.ref, cfg_);
    out.j_safe = safe_cost(out.x_s, out.u_s, out.xbar_s, out.ubar_s, ag.ref, cfg_);
    sol.agents.push_back(std::move(out));
  }
  return sol;
}

Eigen::VectorXd FhocpNlp::cold_start() const {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(nlp_.n_vars);
  for (size_t a = 0; a < layout_.size(); ++a) {
    const Layout& L = layout_[a];
    const auto& ag = problem_->agents[a];
    Eigen::VectorXd x = ag.x0;
    const Eigen::VectorXd u0 = Eigen::VectorXd::Zero(L.m);
    for (int j = 0; j <= L.N; ++j) {
      z.segment(L.x_t(j), L.n) = x;
      z.segment(L.x_s(j), L.n) = x;
      if (j < L.N) x = ag.model->f(x, u0);
    }
    z.segment(L.xbar(), L.n) =
        ag.model->rest ? ag.model->rest(z.segment(L.x_s(L.N), L.n)).eval()
                       : z.segment(L.x_s(L.N), L.n).eval();
  }
  for (const auto& db : duals_)
    z.segment(db.off, db.fi + db.fj).setConstant(0.3);
  return z;
}

double FhocpNlp::max_violation(const Eigen::VectorXd& z) const {
  double v = 0.0;
  if (nlp_.n_eq > 0) v = nlp_.eq(z).lpNorm<Eigen::Infinity>();
  if (nlp_.n_ineq > 0) {
    const Eigen::VectorXd ci = nlp_.ineq(z);
    for (Eigen::Index i = 0; i < ci.size(); ++i) v = std::max(v, ci(i));
  }
  for (int i = 0; i < nlp_.n_vars; ++i) {
    v = std::max(v, nlp_.lb(i) - z(i));
    v = std::max(v, z(i) - nlp_.ub(i));
  }
  return v;
}

FhocpSolution solve_fhocp(const FhocpProblem& problem, const OcpConfig& cfg,
                          const Eigen::VectorXd* warm_start, const solver::SolveOptions& opts) {
  FhocpNlp builder(problem, cfg);
  const Eigen::VectorXd init = warm_start ? *warm_start : builder.cold_start();
  auto [z, report] = solver::solve(builder.nlp(), init, opts);
  FhocpSolution sol = builder.decode(z);
  sol.report = report;
  return sol;
}

dynamics::Equilibrium optimal_reachable_steady_state(
    const AgentProblem& agent, const std::vector<std::vector<Eigen::Vector2d>>& neighbor_positions,
    const OcpConfig& cfg, const solver::SolveOptions& opts) {
  const auto md = agent.model;
  const int N = cfg.N, n = md->n, m = md->m;
  cfg.validate(n, m);
  for (const auto& traj : neighbor_positions)
    if (static_cast<int>(traj.size()) != N + 1)
      throw std::invalid_argument("optimal_reachable_steady_state: neighbor horizon mismatch");

  // Layout: inputs v(0..N-1), states x(0..N), steady state xbar.
  const auto v_at = [m](int j) { return j * m; };
  const auto x_at = [n, m, N](int j) { return N * m + j * n; };
  const int xbar_at = N * m + (N + 1) * n;

  solver::NlpInstance nlp;
  nlp.n_vars = xbar_at + n;
  nlp.lb = Eigen::VectorXd::Constant(nlp.n_vars, -kInf);
  nlp.ub = Eigen::VectorXd::Constant(nlp.n_vars, kInf);
  for (int j = 0; j < N; ++j) {
    nlp.lb.segment(v_at(j), m) = md->u_lb;
    nlp.ub.segment(v_at(j), m) = md->u_ub;
  }
  for (int j = 0; j <= N; ++j) {
    nlp.lb.segment(x_at(j), n) = md->x_lb;
    nlp.ub.segment(x_at(j), n) = md->x_ub;
  }
  nlp.lb.segment(xbar_at, n) = md->x_lb;
  nlp.ub.segment(xbar_at, n) = md->x_ub;

  const AgentRef ref = agent.ref;
  nlp.objective = [xbar_at, n, ref, cfg](const Eigen::VectorXd& z) {
    return quad(z.segment(xbar_at, n) - ref.x, cfg.t_o);
  };
  nlp.gradient = [xbar_at, n, ref, cfg](const Eigen::VectorXd& z) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(z.size());
    g.segment(xbar_at, n) =
        2.0 * (cfg.t_o.array() * (z.segment(xbar_at, n) - ref.x).array()).matrix();
    return g;
  };
  Eigen::MatrixXd h0 = Eigen::MatrixXd::Zero(nlp.n_vars, nlp.n_vars);
  for (int i = 0; i < n; ++i) h0(xbar_at + i, xbar_at + i) = 2.0 * cfg.t_o(i);
  nlp.h0_blocks = {h0};

  const Eigen::VectorXd x0 = agent.x0;
  nlp.n_eq = (N + 3) * n;
  nlp.eq = [md, x0, v_at, x_at, xbar_at, n, m, N](const Eigen::VectorXd& z) {
    Eigen::VectorXd ce((N + 3) * n);
    int at = 0;
    ce.segment(at, n) = z.segment(x_at(0), n) - x0;
    at += n;
    for (int j = 0; j < N; ++j, at += n)
      ce.segment(at, n) =
          z.segment(x_at(j + 1), n) - md->f(z.segment(x_at(j), n), z.segment(v_at(j), m));
    ce.segment(at, n) = z.segment(x_at(N), n) - z.segment(xbar_at, n);
    at += n;
    ce.segment(at, n) =
        z.segment(xbar_at, n) - md->f(z.segment(xbar_at, n), z.segment(v_at(N - 1), m));
    return ce;
  };
  nlp.eq_jacobian = [md, v_at, x_at, xbar_at, n, m, N](const Eigen::VectorXd& z,
                                                       std::vector<solver::SparseRow>& rows) {
    rows.clear();
    for (int i = 0; i < n; ++i) {
      solver::SparseRow r;
      r.add(x_at(0) + i, 1.0);
      rows.push_back(std::move(r));
    }
    for (int j = 0; j < N; ++j) {
      const auto [A, B] = stage_jacobian(*md, z.segment(x_at(j), n), z.segment(v_at(j), m));
      for (int i = 0; i < n; ++i) {
        solver::SparseRow r;
        r.add(x_at(j + 1) + i, 1.0);
        for (int c = 0; c < n; ++c)
          if (A(i, c) != 0.0) r.add(x_at(j) + c, -A(i, c));
        for (int c = 0; c < m; ++c)
          if (B(i, c) != 0.0) r.add(v_at(j) + c, -B(i, c));
        rows.push_back(std::move(r));
      }
    }
    for (int i = 0; i < n; ++i) {
      solver::SparseRow r;
      r.add(x_at(N) + i, 1.0);
      r.add(xbar_at + i, -1.0);
      rows.push_back(std::move(r));
    }
    const auto [Ab, Bb] = stage_jacobian(*md, z.segment(xbar_at, n), z.segment(v_at(N - 1), m));
    for (int i = 0; i < n; ++i) {
      solver::SparseRow r;
      r.add(xbar_at + i, 1.0 - Ab(i, i));
      for (int c = 0; c < n; ++c)
        if (c != i && Ab(i, c) != 0.0) r.add(xbar_at + c, -Ab(i, c));
      for (int c = 0; c < m; ++c)
        if (Bb(i, c) != 0.0) r.add(v_at(N - 1) + c, -Bb(i, c));
      rows.push_back(std::move(r));
    }
  };

  // Inequalities: safe-set membership per stage, coupling per neighbor and
  // stage, then the safe-cost bound when finite.
  const auto& Ac = agent.safe_set.A();
  const auto& bc = agent.safe_set.b();
  const Eigen::Vector2d p0 = x0.head<2>();
  const double reach = 2.0 * agent.sigma + cfg.d_min;
  const bool bound_active = std::isfinite(agent.j_s_bound);
  const double j_s_bound = agent.j_s_bound;
  const int facet_rows = static_cast<int>(Ac.rows()) * (N + 1);
  const int coupling_rows = static_cast<int>(neighbor_positions.size()) * (N + 1);
  nlp.n_ineq = facet_rows + coupling_rows + (bound_active ? 1 : 0);

  nlp.ineq = [=](const Eigen::VectorXd& z) {
    std::vector<double> vals;
    for (int j = 0; j <= N; ++j) {
      const Eigen::Vector2d dp = z.segment<2>(x_at(j)) - p0;
      for (Eigen::Index f = 0; f < Ac.rows(); ++f) vals.push_back(Ac.row(f).dot(dp) - bc(f));
    }
    for (const auto& traj : neighbor_positions)
      for (int j = 0; j <= N; ++j)
        vals.push_back(-(z.segment<2>(x_at(j)) - traj[static_cast<size_t>(j)]).squaredNorm() +
                       reach * reach);
    if (bound_active) {
      double js = quad(z.segment(xbar_at, n) - ref.x, cfg.t_o);
      for (int j = 0; j < N; ++j) {
        js += quad(z.segment(x_at(j), n) - z.segment(xbar_at, n), cfg.q_s);
        js += quad(z.segment(v_at(j), m) - z.segment(v_at(N - 1), m), cfg.r_s);
      }
      vals.push_back(js - j_s_bound);
    }
    return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size())).eval();
  };
  nlp.ineq_jacobian = [=](const Eigen::VectorXd& z, std::vector<solver::SparseRow>& rows) {
    rows.clear();
    for (int j = 0; j <= N; ++j) {
      for (Eigen::Index f = 0; f < Ac.rows(); ++f) {
        solver::SparseRow r;
        r.add(x_at(j) + 0, Ac(f, 0));
        r.add(x_at(j) + 1, Ac(f, 1));
        rows.push_back(std::move(r));
      }
    }
    for (const auto& traj : neighbor_positions) {
      for (int j = 0; j <= N; ++j) {
        const Eigen::Vector2d dp = z.segment<2>(x_at(j)) - traj[static_cast<size_t>(j)];
        solver::SparseRow r;
        r.add(x_at(j) + 0, -2.0 * dp(0));
        r.add(x_at(j) + 1, -2.0 * dp(1));
        rows.push_back(std::move(r));
      }
    }
    if (bound_active) {
      solver::SparseRow r;
      Eigen::VectorXd dxbar =
          2.0 * (cfg.t_o.array() * (z.segment(xbar_at, n) - ref.x).array()).matrix();
      Eigen::VectorXd dlast = Eigen::VectorXd::Zero(m);
      for (int j = 0; j < N; ++j) {
        const Eigen::VectorXd dx =
            2.0 * (cfg.q_s.array() * (z.segment(x_at(j), n) - z.segment(xbar_at, n)).array())
                      .matrix();
        for (int i = 0; i < n; ++i) r.add(x_at(j) + i, dx(i));
        dxbar -= dx;
        if (j < N - 1) {
          const Eigen::VectorXd du =
              2.0 *
              (cfg.r_s.array() * (z.segment(v_at(j), m) - z.segment(v_at(N - 1), m)).array())
                  .matrix();
          for (int i = 0; i < m; ++i) r.add(v_at(j) + i, du(i));
          dlast -= du;
        }
      }
      for (int i = 0; i < m; ++i) r.add(v_at(N - 1) + i, dlast(i));
      for (int i = 0; i < n; ++i) r.add(xbar_at + i, dxbar(i));
      rows.push_back(std::move(r));
    }
  };

  // Hold-still initial guess.
  Eigen::VectorXd init = Eigen::VectorXd::Zero(nlp.n_vars);
  for (int j = 0; j <= N; ++j) init.segment(x_at(j), n) = x0;
  init.segment(xbar_at, n) = md->rest ? md->rest(x0).eval() : x0;

  auto [z, report] = solver::solve(nlp, init, opts);
  if (report.status == solver::SolveStatus::Infeasible ||
      (report.status == solver::SolveStatus::MaxIter && report.violation > opts.tol_feas))
    throw EmptyReachableSet();
  return dynamics::Equilibrium{z.segment(xbar_at, n), z.segment(v_at(N - 1), m)};
}

}  // namespace swarm::ocp
