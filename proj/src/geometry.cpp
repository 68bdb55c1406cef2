#include "swarm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace swarm::geometry {

namespace {
constexpr double kFeasTol = 1e-9;
}

HPolytope::HPolytope(Eigen::MatrixX2d A, Eigen::VectorXd b) : A_(std::move(A)), b_(std::move(b)) {
  if (A_.rows() != b_.rows()) throw std::invalid_argument("HPolytope: A rows != b rows");
  for (Eigen::Index i = 0; i < A_.rows(); ++i) {
    const double nrm = A_.row(i).norm();
    if (nrm < 1e-14) throw std::invalid_argument("HPolytope: zero facet normal");
    A_.row(i) /= nrm;
    b_(i) /= nrm;
  }
}

bool HPolytope::is_bounded() const {
  if (A_.rows() < 3) return false;
  std::vector<double> ang(static_cast<size_t>(A_.rows()));
  for (Eigen::Index i = 0; i < A_.rows(); ++i) ang[static_cast<size_t>(i)] = std::atan2(A_(i, 1), A_(i, 0));
  std::sort(ang.begin(), ang.end());
  double max_gap = ang.front() + 2.0 * std::numbers::pi - ang.back();
  for (size_t i = 1; i < ang.size(); ++i) max_gap = std::max(max_gap, ang[i] - ang[i - 1]);
  return max_gap < std::numbers::pi - 1e-12;
}

std::vector<Eigen::Vector2d> HPolytope::vertices() const {
  std::vector<Eigen::Vector2d> verts;
  const Eigen::Index m = A_.rows();
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      Eigen::Matrix2d M;
      M.row(0) = A_.row(i);
      M.row(1) = A_.row(j);
      const double det = M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0);
      if (std::abs(det) < 1e-12) continue;  // parallel facets
      const Eigen::Vector2d q = M.inverse() * Eigen::Vector2d(b_(i), b_(j));
      if (((A_ * q - b_).array() <= kFeasTol).all()) {
        bool dup = false;
        for (const auto& v : verts) {
          if ((v - q).norm() < 1e-9) {
            dup = true;
            break;
          }
        }
        if (!dup) verts.push_back(q);
      }
    }
  }
  if (verts.size() < 2) return verts;
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& v : verts) c += v;
  c /= static_cast<double>(verts.size());
  std::sort(verts.begin(), verts.end(), [&](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return std::atan2(a.y() - c.y(), a.x() - c.x()) < std::atan2(b.y() - c.y(), b.x() - c.x());
  });
  return verts;
}

double HPolytope::support(const Eigen::Vector2d& dir) const {
  const auto verts = vertices();
  if (verts.empty()) throw std::runtime_error("support: polytope has no vertices");
  double h = -std::numeric_limits<double>::infinity();
  for (const auto& v : verts) h = std::max(h, dir.dot(v));
  return h;
}

double HPolytope::area() const {
  const auto verts = vertices();
  if (verts.size() < 3) return 0.0;
  double twice = 0.0;
  for (size_t i = 0; i < verts.size(); ++i) {
    const auto& p = verts[i];
    const auto& q = verts[(i + 1) % verts.size()];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * std::abs(twice);
}

HPolytope translate(const HPolytope& P, const Eigen::Vector2d& p) {
  // {q : A(q - p) <= b} == {q : A q <= b + A p}; A is untouched.
  return HPolytope(HPolytope::UnitRowsTag{}, P.A_, P.b_ + P.A_ * p);
}

HPolytope pontryagin_diff(const HPolytope& P, const HPolytope& Q) {
  if (!P.is_bounded() || !Q.is_bounded())
    throw std::invalid_argument("pontryagin_diff: operands must be bounded");
  if (!Q.contains_origin()) throw std::invalid_argument("pontryagin_diff: Q must contain the origin");
  Eigen::VectorXd b2(P.num_facets());
  for (Eigen::Index i = 0; i < P.num_facets(); ++i)
    b2(i) = P.b()(i) - Q.support(P.A().row(i).transpose());
  HPolytope out(HPolytope::UnitRowsTag{}, P.A_, std::move(b2));
  if (out.vertices().empty()) throw EmptyDifference();
  return out;
}

HPolytope inscribe_polytope(const Disc& s, int n_facets) {
  if (n_facets < 3) throw std::invalid_argument("inscribe_polytope: need at least 3 facets");
  if (s.radius <= 0.0) throw std::invalid_argument("inscribe_polytope: radius must be positive");
  Eigen::MatrixX2d A(n_facets, 2);
  Eigen::VectorXd b(n_facets);
  const double step = 2.0 * std::numbers::pi / n_facets;
  const double offset = s.radius * std::cos(std::numbers::pi / n_facets);
  for (int k = 0; k < n_facets; ++k) {
    // Vertices sit at angles 2*pi*k/n; each facet normal bisects two vertices.
    const double phi = (static_cast<double>(k) + 0.5) * step;
    A(k, 0) = std::cos(phi);
    A(k, 1) = std::sin(phi);
    b(k) = offset;
  }
  return HPolytope(HPolytope::UnitRowsTag{}, std::move(A), std::move(b));
}

HPolytope build_safe_set(const Disc& comm, double vehicle_radius, int n_facets) {
  if (comm.radius <= vehicle_radius) throw NonpositiveRadius();
  return inscribe_polytope(Disc{{0.0, 0.0}, comm.radius - vehicle_radius}, n_facets);
}

bool contains(const HPolytope& P, const Eigen::Vector2d& q, double tol) {
  return ((P.A() * q - P.b()).array() <= tol).all();
}

}  // namespace swarm::geometry
