#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace swarm::geometry {

/// Planar disc, used for circular communication areas and vehicle footprints.
struct Disc {
  Eigen::Vector2d center{0.0, 0.0};
  double radius{0.0};
};

struct EmptyDifference : std::runtime_error {
  EmptyDifference() : std::runtime_error("pontryagin_diff: result is empty") {}
};

struct NonpositiveRadius : std::runtime_error {
  NonpositiveRadius()
      : std::runtime_error("build_safe_set: communication radius must exceed vehicle radius") {}
};

/// Half-space representation of a convex polygon, {q : A q <= b}.
/// Rows of A are kept at unit Euclidean norm; b entries are facet offsets in
/// meters. Construction normalizes the rows, everything else leaves A alone.
class HPolytope {
 public:
  HPolytope() = default;
  HPolytope(Eigen::MatrixX2d A, Eigen::VectorXd b);

  const Eigen::MatrixX2d& A() const { return A_; }
  const Eigen::VectorXd& b() const { return b_; }
  Eigen::Index num_facets() const { return A_.rows(); }

  /// True when no recession direction exists (normals positively span the plane).
  bool is_bounded() const;

  bool contains_origin(double tol = 1e-9) const { return (b_.array() >= -tol).all(); }

  /// Vertices in counter-clockwise order. Empty result means the set is empty
  /// (or has no vertex, which for a bounded nonempty polygon cannot happen).
  std::vector<Eigen::Vector2d> vertices() const;

  /// Support function h(d) = max_{q in P} d.q, computed by vertex enumeration.
  double support(const Eigen::Vector2d& dir) const;

  /// Polygon area via the shoelace formula on the ordered vertices.
  double area() const;

 private:
  struct UnitRowsTag {};
  HPolytope(UnitRowsTag, Eigen::MatrixX2d A, Eigen::VectorXd b)
      : A_(std::move(A)), b_(std::move(b)) {}

  friend HPolytope translate(const HPolytope&, const Eigen::Vector2d&);
  friend HPolytope pontryagin_diff(const HPolytope&, const HPolytope&);
  friend HPolytope inscribe_polytope(const Disc&, int);

  Eigen::MatrixX2d A_;
  Eigen::VectorXd b_;
};

/// Minkowski translation p (+) P: {q : A (q - p) <= b}.
HPolytope translate(const HPolytope& P, const Eigen::Vector2d& p);

/// Pontryagin difference P (-) Q with b'_i = b_i - h_Q(a_i).
/// Q must contain the origin. Throws EmptyDifference when the result is empty.
HPolytope pontryagin_diff(const HPolytope& P, const HPolytope& Q);

/// Regular n-gon inscribed in the disc (under-approximation), centered at the
/// origin, facet offsets radius*cos(pi/n).
HPolytope inscribe_polytope(const Disc& s, int n_facets);

/// Safe-set template: n-gon inscribed in the disc of radius
/// comm.radius - vehicle_radius, centered at the origin.
HPolytope build_safe_set(const Disc& comm, double vehicle_radius, int n_facets);

/// Membership test with absolute tolerance (meters).
bool contains(const HPolytope& P, const Eigen::Vector2d& q, double tol = 1e-9);

}  // namespace swarm::geometry
