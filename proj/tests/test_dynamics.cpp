#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "swarm/dynamics.hpp"

using namespace swarm::dynamics;
using Eigen::VectorXd;

TEST_CASE("bicycle_step fixed point at rest") {
  Eigen::Matrix<double, 5, 1> x = Eigen::Matrix<double, 5, 1>::Zero();
  const auto next = bicycle_step(x, Eigen::Vector2d::Zero(), 0.1, 0.8);
  CHECK((next - x).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("bicycle_step hand-evaluated updates") {
  Eigen::Matrix<double, 5, 1> x;
  x << 0, 0, 1, 0, 0;
  auto next = bicycle_step(x, {0, 0}, 0.1, 0.8);
  Eigen::Matrix<double, 5, 1> want;
  want << 0.1, 0, 1, 0, 0;
  CHECK((next - want).lpNorm<Eigen::Infinity>() < 1e-15);

  x << 0, 0, 2, std::numbers::pi / 2, 0;
  next = bicycle_step(x, {3, 0}, 0.1, 0.8);
  want << 0, 0.2, 2.3, std::numbers::pi / 2, 0;
  CHECK((next - want).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("bicycle position invariance property") {
  const AgentModel md = make_bicycle();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int it = 0; it < 100; ++it) {
    VectorXd x(5), shift = VectorXd::Zero(5);
    x << u(rng), u(rng), 1.0 + 0.4 * u(rng), 1.5 + u(rng) * 0.5, 0.3 * u(rng);
    VectorXd in(2);
    in << u(rng), 0.4 * u(rng);
    shift(0) = 10.0 * u(rng);
    shift(1) = 10.0 * u(rng);
    const VectorXd lhs = md.f(x + shift, in);
    const VectorXd rhs = md.f(x, in) + shift;
    CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() < 1e-9);
  }
  CHECK(check_position_invariance(md, 100, 5));
}

TEST_CASE("any state with v=0 and u=0 is a bicycle fixed point") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int it = 0; it < 50; ++it) {
    Eigen::Matrix<double, 5, 1> x;
    x << 5 * u(rng), 5 * u(rng), 0.0, 3.0 + u(rng), 1.2 * u(rng);
    const auto next = bicycle_step(x, Eigen::Vector2d::Zero(), 0.1, 0.8);
    CHECK((next - x).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("position invariance detects a counterexample") {
  AgentModel bad = make_double_integrator();
  const auto base = bad.f;
  bad.f = [base](const VectorXd& x, const VectorXd& u) {
    VectorXd out = base(x, u);
    out(2) += 0.1 * x(0);  // velocity leaks the absolute position
    return out;
  };
  CHECK_FALSE(check_position_invariance(bad, 100, 11));
  CHECK(check_position_invariance(make_double_integrator(), 100, 11));
}

TEST_CASE("linearize bicycle at rest and double integrator exactly") {
  const AgentModel bike = make_bicycle();
  VectorXd x0 = VectorXd::Zero(5), u0 = VectorXd::Zero(2);
  const auto [A, B] = linearize(bike, x0, u0);
  CHECK(A(0, 2) == doctest::Approx(0.1).epsilon(1e-9));  // d px' / d v = Ts cos(0)
  CHECK(A(2, 2) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(B(2, 0) == doctest::Approx(0.1).epsilon(1e-9));

  const AgentModel di = make_double_integrator(0.1);
  const auto [Ad, Bd] = linearize(di, VectorXd::Zero(4), VectorXd::Zero(2));
  Eigen::MatrixXd Aexp = Eigen::MatrixXd::Identity(4, 4);
  Aexp(0, 2) = 0.1;
  Aexp(1, 3) = 0.1;
  Eigen::MatrixXd Bexp = Eigen::MatrixXd::Zero(4, 2);
  Bexp(2, 0) = 0.1;
  Bexp(3, 1) = 0.1;
  CHECK((Ad - Aexp).lpNorm<Eigen::Infinity>() < 1e-9);
  CHECK((Bd - Bexp).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("central differences agree with a forward-difference oracle") {
  const AgentModel bike = make_bicycle();
  VectorXd x(5), u(2);
  x << 0.3, -0.2, 1.1, 0.7, 0.2;
  u << 0.5, -0.3;
  const auto [A, B] = linearize(bike, x, u);
  const double h = 1e-6;
  for (int j = 0; j < 5; ++j) {
    VectorXd xp = x;
    xp(j) += h;
    const VectorXd col = (bike.f(xp, u) - bike.f(x, u)) / h;
    CHECK((A.col(j) - col).lpNorm<Eigen::Infinity>() < 1e-4);
  }
  for (int j = 0; j < 2; ++j) {
    VectorXd up = u;
    up(j) += h;
    const VectorXd col = (bike.f(x, up) - bike.f(x, u)) / h;
    CHECK((B.col(j) - col).lpNorm<Eigen::Infinity>() < 1e-4);
  }
}

TEST_CASE("linearization error decays quadratically at an equilibrium") {
  const AgentModel bike = make_bicycle();
  VectorXd xb(5), ub = VectorXd::Zero(2);
  xb << 1.0, -2.0, 0.0, 0.9, 0.4;  // v = 0: fixed point with curvature around it
  const Equilibrium eq = make_equilibrium(bike, xb, ub);
  const auto [A, B] = linearize(bike, eq);
  VectorXd dir(5);
  dir << 0.3, -0.1, 1.0, 0.8, 0.5;
  dir.normalize();
  const auto err = [&](double step) {
    const VectorXd dx = step * dir;
    return (bike.f(xb + dx, ub) - xb - A * dx).lpNorm<Eigen::Infinity>();
  };
  const double e1 = err(1e-2), e2 = err(5e-3);
  CHECK(e1 > 1e-9);  // genuinely nonlinear
  CHECK(e2 <= 0.35 * e1 + 1e-14);
}

TEST_CASE("controllability ranks") {
  // 1-D double integrator: the classic full-rank pair.
  Eigen::MatrixXd A(2, 2), B(2, 1);
  A << 1, 0.1, 0, 1;
  B << 0, 0.1;
  CHECK(controllability_rank(A, B) == 2);

  CHECK(controllability_rank(Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Zero(3, 1)) == 0);

  // Bicycle linearized along straight motion at v = 1.
  const AgentModel bike = make_bicycle();
  VectorXd x(5), u(2);
  x << 0, 0, 1.0, 0, 0;
  u << 0, 0;
  const auto [Ab, Bb] = linearize(bike, x, u);
  CHECK(controllability_rank(Ab, Bb) == 5);
  // Numeric rank oracle: column-pivoted QR agrees with the SVD-based count.
  Eigen::MatrixXd ctrb(5, 10);
  Eigen::MatrixXd Akb = Bb;
  for (int k = 0; k < 5; ++k) {
    ctrb.middleCols(2 * k, 2) = Akb;
    Akb = Ab * Akb;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(ctrb);
  qr.setThreshold(1e-8);
  CHECK(qr.rank() == 5);
}

TEST_CASE("make_equilibrium validates the fixed point") {
  const AgentModel bike = make_bicycle();
  VectorXd x = VectorXd::Zero(5), u = VectorXd::Zero(2);
  CHECK_NOTHROW((void)make_equilibrium(bike, x, u));
  x(2) = 1.0;
  CHECK_THROWS((void)make_equilibrium(bike, x, u));
}
