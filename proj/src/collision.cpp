#include "swarm/collision.hpp"

#include <stdexcept>

namespace swarm::collision {

double sphere_clearance(const Eigen::Vector2d& p_i, const Eigen::Vector2d& p_j,
                        const SphereShape& shape) {
  const double reach = 2.0 * shape.sigma + shape.d_min;
  return -(p_i - p_j).squaredNorm() + reach * reach;
}

Eigen::Vector2d sphere_clearance_grad(const Eigen::Vector2d& p_i, const Eigen::Vector2d& p_j) {
  return -2.0 * (p_i - p_j);
}

Eigen::VectorXd polytope_clearance_residuals(const Eigen::VectorXd& x_i, const Eigen::VectorXd& x_j,
                                             const PolyShape& shape_i, const PolyShape& shape_j,
                                             const Eigen::VectorXd& lambda,
                                             const Eigen::VectorXd& mu, double d_min) {
  if (lambda.size() != shape_i.tmpl.num_facets() || mu.size() != shape_j.tmpl.num_facets())
    throw std::invalid_argument("polytope_clearance_residuals: multiplier dimension mismatch");
  const Eigen::MatrixX2d& Ai = shape_i.tmpl.A();
  const Eigen::MatrixX2d& Aj = shape_j.tmpl.A();
  const Eigen::VectorXd& bi = shape_i.tmpl.b();
  const Eigen::VectorXd& bj = shape_j.tmpl.b();
  const Eigen::Matrix2d Ri = shape_i.rotation(x_i);
  const Eigen::Matrix2d Rj = shape_j.rotation(x_j);
  const Eigen::Vector2d ti = shape_i.translation(x_i);
  const Eigen::Vector2d tj = shape_j.translation(x_j);

  Eigen::VectorXd res(4);
  res(0) = -(bi - Ai * tj).dot(lambda) - (bj - Aj * ti).dot(mu) - d_min;
  res.segment<2>(1) = Rj.transpose() * (Ai.transpose() * lambda) +
                      Ri.transpose() * (Aj.transpose() * mu);
  res(3) = (Aj.transpose() * mu).norm() - 1.0;
  return res;
}

double min_pairwise_distance(const std::vector<Eigen::Vector2d>& positions) {
  if (positions.size() < 2)
    throw std::invalid_argument("min_pairwise_distance: need at least 2 agents");
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < positions.size(); ++i)
    for (size_t j = i + 1; j < positions.size(); ++j)
      best = std::min(best, (positions[i] - positions[j]).norm());
  return best;
}

}  // namespace swarm::collision
