#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>

namespace swarm::dynamics {

/// Discrete-time agent model. Positions occupy the top two state entries, so
/// the position extractor is implicit. Boxes may be unbounded (+-inf entries).
struct AgentModel {
  std::string name;
  int n = 0;  // state dimension
  int m = 0;  // input dimension
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> f;
  Eigen::VectorXd x_lb, x_ub;  // state box X_i
  Eigen::VectorXd u_lb, u_ub;  // input box U_i
  double Ts = 0.1;             // sampling time [s]

  /// Optional analytic Jacobians (A, B); finite differences otherwise.
  std::function<std::pair<Eigen::MatrixXd, Eigen::MatrixXd>(const Eigen::VectorXd&,
                                                            const Eigen::VectorXd&)>
      jacobian;
  /// Maps a state to a nearby natural equilibrium state (zero input assumed);
  /// used for cold starts.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> rest;

  Eigen::Vector2d position(const Eigen::VectorXd& x) const { return x.head<2>(); }
  Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const { return f(x, u); }
};

struct Equilibrium {
  Eigen::VectorXd x;
  Eigen::VectorXd u;
};

/// Validates and wraps (x_bar, u_bar); throws when it is not a fixed point of f.
Equilibrium make_equilibrium(const AgentModel& model, const Eigen::VectorXd& x_bar,
                             const Eigen::VectorXd& u_bar, double tol = 1e-9);

/// Kinematic bicycle update: state (px, py, v, theta, gamma), input (a, delta).
Eigen::Matrix<double, 5, 1> bicycle_step(const Eigen::Matrix<double, 5, 1>& x,
                                         const Eigen::Vector2d& u, double Ts, double L);

/// Bicycle model with the intersection-scenario boxes:
/// v in [0, 2] m/s, theta in [0, 2pi], gamma in +-(pi/2 - 1e-3),
/// |a| <= 3 m/s^2, |delta| <= 1 rad/s. Positions are unbounded.
AgentModel make_bicycle(double Ts = 0.1, double L = 0.8);

/// Planar double integrator: state (px, py, vx, vy), input (ax, ay).
AgentModel make_double_integrator(double Ts = 0.1, double v_max = 2.0, double a_max = 3.0);

/// Samples (x, u, p_j) tuples and checks f(x + phi(p_j), u) == f(x, u) + phi(p_j)
/// to 1e-9, where phi pads a position with zeros.
bool check_position_invariance(const AgentModel& model, int samples, std::uint64_t seed);

/// Central finite-difference Jacobians (A, B) at (x, u), step 1e-6.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> linearize(const AgentModel& model,
                                                      const Eigen::VectorXd& x,
                                                      const Eigen::VectorXd& u);
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> linearize(const AgentModel& model,
                                                      const Equilibrium& eq);

/// Rank of [B, AB, ..., A^{n-1}B] with singular values below
/// 1e-8 * sigma_max treated as zero.
int controllability_rank(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

}  // namespace swarm::dynamics
