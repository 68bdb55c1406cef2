#include "swarm/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace swarm::dynamics {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double sample_box(std::mt19937_64& rng, double lo, double hi) {
  // Unbounded coordinates (positions) are sampled from a generous range.
  if (!std::isfinite(lo)) lo = std::isfinite(hi) ? hi - 20.0 : -10.0;
  if (!std::isfinite(hi)) hi = lo + 20.0;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}
}  // namespace

Equilibrium make_equilibrium(const AgentModel& model, const Eigen::VectorXd& x_bar,
                             const Eigen::VectorXd& u_bar, double tol) {
  if ((model.f(x_bar, u_bar) - x_bar).lpNorm<Eigen::Infinity>() > tol)
    throw std::invalid_argument("make_equilibrium: (x, u) is not a fixed point");
  return Equilibrium{x_bar, u_bar};
}

Eigen::Matrix<double, 5, 1> bicycle_step(const Eigen::Matrix<double, 5, 1>& x,
                                         const Eigen::Vector2d& u, double Ts, double L) {
  const double v = x(2), theta = x(3), gamma = x(4);
  Eigen::Matrix<double, 5, 1> out;
  out(0) = x(0) + Ts * std::cos(theta) * v;
  out(1) = x(1) + Ts * std::sin(theta) * v;
  out(2) = v + Ts * u(0);
  out(3) = theta + Ts * (v / L) * std::tan(gamma);
  out(4) = gamma + Ts * u(1);
  return out;
}

AgentModel make_bicycle(double Ts, double L) {
  AgentModel md;
  md.name = "bicycle";
  md.n = 5;
  md.m = 2;
  md.Ts = Ts;
  md.f = [Ts, L](const Eigen::VectorXd& x, const Eigen::VectorXd& u) -> Eigen::VectorXd {
    return bicycle_step(x.head<5>(), u.head<2>(), Ts, L);
  };
  const double half_pi = std::numbers::pi / 2.0;
  md.x_lb = (Eigen::VectorXd(5) << -kInf, -kInf, 0.0, 0.0, -(half_pi - 1e-3)).finished();
  md.x_ub = (Eigen::VectorXd(5) << kInf, kInf, 2.0, 2.0 * std::numbers::pi, half_pi - 1e-3).finished();
  md.u_lb = (Eigen::VectorXd(2) << -3.0, -1.0).finished();
  md.u_ub = (Eigen::VectorXd(2) << 3.0, 1.0).finished();
  md.jacobian = [Ts, L](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    const double v = x(2), th = x(3), ga = x(4);
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(5, 5);
    A(0, 2) = Ts * std::cos(th);
    A(0, 3) = -Ts * v * std::sin(th);
    A(1, 2) = Ts * std::sin(th);
    A(1, 3) = Ts * v * std::cos(th);
    A(3, 2) = Ts * std::tan(ga) / L;
    const double sec = 1.0 / std::cos(ga);
    A(3, 4) = Ts * v * sec * sec / L;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(5, 2);
    B(2, 0) = Ts;
    B(4, 1) = Ts;
    return std::make_pair(A, B);
  };
  md.rest = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd out = x;
    out(2) = 0.0;  // v = 0 is an equilibrium for any heading and steer
    return out;
  };
  return md;
}

AgentModel make_double_integrator(double Ts, double v_max, double a_max) {
  AgentModel md;
  md.name = "double_integrator";
  md.n = 4;
  md.m = 2;
  md.Ts = Ts;
  md.f = [Ts](const Eigen::VectorXd& x, const Eigen::VectorXd& u) -> Eigen::VectorXd {
    Eigen::VectorXd out(4);
    out(0) = x(0) + Ts * x(2);
    out(1) = x(1) + Ts * x(3);
    out(2) = x(2) + Ts * u(0);
    out(3) = x(3) + Ts * u(1);
    return out;
  };
  md.x_lb = (Eigen::VectorXd(4) << -kInf, -kInf, -v_max, -v_max).finished();
  md.x_ub = (Eigen::VectorXd(4) << kInf, kInf, v_max, v_max).finished();
  md.u_lb = Eigen::VectorXd::Constant(2, -a_max);
  md.u_ub = Eigen::VectorXd::Constant(2, a_max);
  md.jacobian = [Ts](const Eigen::VectorXd&, const Eigen::VectorXd&) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(4, 4);
    A(0, 2) = Ts;
    A(1, 3) = Ts;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(4, 2);
    B(2, 0) = Ts;
    B(3, 1) = Ts;
    return std::make_pair(A, B);
  };
  md.rest = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd out = x;
    out(2) = 0.0;
    out(3) = 0.0;
    return out;
  };
  return md;
}

bool check_position_invariance(const AgentModel& model, int samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("check_position_invariance: samples >= 1");
  std::mt19937_64 rng(seed);
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd x(model.n), u(model.m);
    for (int i = 0; i < model.n; ++i) x(i) = sample_box(rng, model.x_lb(i), model.x_ub(i));
    for (int i = 0; i < model.m; ++i) u(i) = sample_box(rng, model.u_lb(i), model.u_ub(i));
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(model.n);
    phi(0) = std::uniform_real_distribution<double>(-50.0, 50.0)(rng);
    phi(1) = std::uniform_real_distribution<double>(-50.0, 50.0)(rng);
    const Eigen::VectorXd lhs = model.f(x + phi, u);
    const Eigen::VectorXd rhs = model.f(x, u) + phi;
    if ((lhs - rhs).lpNorm<Eigen::Infinity>() > 1e-9) return false;
  }
  return true;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> linearize(const AgentModel& model,
                                                      const Eigen::VectorXd& x,
                                                      const Eigen::VectorXd& u) {
  const double h = 1e-6;
  Eigen::MatrixXd A(model.n, model.n), B(model.n, model.m);
  for (int j = 0; j < model.n; ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    A.col(j) = (model.f(xp, u) - model.f(xm, u)) / (2.0 * h);
  }
  for (int j = 0; j < model.m; ++j) {
    Eigen::VectorXd up = u, um = u;
    up(j) += h;
    um(j) -= h;
    B.col(j) = (model.f(x, up) - model.f(x, um)) / (2.0 * h);
  }
  return {A, B};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> linearize(const AgentModel& model,
                                                      const Equilibrium& eq) {
  return linearize(model, eq.x, eq.u);
}

int controllability_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  if (A.rows() != A.cols() || A.rows() != B.rows())
    throw std::invalid_argument("controllability_rank: dimension mismatch");
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd ctrb(n, n * B.cols());
  Eigen::MatrixXd Akb = B;
  for (Eigen::Index k = 0; k < n; ++k) {
    ctrb.middleCols(k * B.cols(), B.cols()) = Akb;
    Akb = A * Akb;
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(ctrb);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0) return 0;
  const double tol = 1e-8 * sv(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol) ++rank;
  return rank;
}

}  // namespace swarm::dynamics
