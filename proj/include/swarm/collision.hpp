#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "swarm/geometry.hpp"

namespace swarm::collision {

/// Spherical over-approximation of a vehicle: footprint radius sigma plus a
/// safety margin d_min, both in meters.
struct SphereShape {
  double sigma = 1.0;
  double d_min = 0.0;
};

/// Polytopic vehicle shape: body-frame template plus state-dependent pose.
/// heading_index names the state coordinate the rotation depends on (-1 for a
/// pose-independent rotation); optimization code differentiates through it.
struct PolyShape {
  geometry::HPolytope tmpl;
  std::function<Eigen::Matrix2d(const Eigen::VectorXd&)> rotation;
  std::function<Eigen::Vector2d(const Eigen::VectorXd&)> translation;
  int heading_index = -1;
};

/// Coupling constraint value h = -|p_i - p_j|^2 + (2*sigma + d_min)^2.
/// h <= 0 means collision-free with margin. Smooth in both arguments.
double sphere_clearance(const Eigen::Vector2d& p_i, const Eigen::Vector2d& p_j,
                        const SphereShape& shape);

/// Gradient of sphere_clearance w.r.t. p_i (the p_j gradient is its negation).
Eigen::Vector2d sphere_clearance_grad(const Eigen::Vector2d& p_i, const Eigen::Vector2d& p_j);

/// Residuals of the dual separating-certificate form for two posed polytopes.
/// Given multipliers lambda (facets of i) and mu (facets of j), returns the
/// stacked vector [margin, align_x, align_y, norm]:
///   margin = -(b_i - A_i t(x_j))' lambda - (b_j - A_j t(x_i))' mu - d_min  (want > 0)
///   align  = R(x_j)' A_i' lambda + R(x_i)' A_j' mu                        (want = 0)
///   norm   = |A_j' mu| - 1                                                (want <= 0)
Eigen::VectorXd polytope_clearance_residuals(const Eigen::VectorXd& x_i, const Eigen::VectorXd& x_j,
                                             const PolyShape& shape_i, const PolyShape& shape_j,
                                             const Eigen::VectorXd& lambda,
                                             const Eigen::VectorXd& mu, double d_min);

/// Minimum Euclidean distance over all agent pairs. Throws for < 2 agents.
double min_pairwise_distance(const std::vector<Eigen::Vector2d>& positions);

}  // namespace swarm::collision
