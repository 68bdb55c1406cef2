#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "swarm/geometry.hpp"

using namespace swarm::geometry;
using Eigen::Vector2d;

namespace {

HPolytope unit_box(double half = 1.0) {
  Eigen::MatrixX2d A(4, 2);
  A << 1, 0, -1, 0, 0, 1, 0, -1;
  Eigen::VectorXd b = Eigen::VectorXd::Constant(4, half);
  return HPolytope(A, b);
}

HPolytope point_at_origin() {
  Eigen::MatrixX2d A(4, 2);
  A << 1, 0, -1, 0, 0, 1, 0, -1;
  return HPolytope(A, Eigen::VectorXd::Zero(4));
}

// Random bounded polygon containing the origin: normals at jittered angles,
// positive offsets.
HPolytope random_polygon(std::mt19937_64& rng, int facets, double b_lo, double b_hi) {
  Eigen::MatrixX2d A(facets, 2);
  Eigen::VectorXd b(facets);
  std::uniform_real_distribution<double> jitter(-0.25, 0.25);
  std::uniform_real_distribution<double> off(b_lo, b_hi);
  for (int k = 0; k < facets; ++k) {
    const double phi = 2.0 * std::numbers::pi * (k + 0.5 + jitter(rng)) / facets;
    A(k, 0) = std::cos(phi);
    A(k, 1) = std::sin(phi);
    b(k) = off(rng);
  }
  return HPolytope(A, b);
}

}  // namespace

TEST_CASE("translate identity and offset") {
  const HPolytope box = unit_box();
  const HPolytope same = translate(box, Vector2d(0, 0));
  CHECK((same.b() - box.b()).lpNorm<Eigen::Infinity>() == 0.0);

  // unit box shifted to [1,3] x [-1,1]
  const HPolytope moved = translate(box, Vector2d(2, 0));
  CHECK(contains(moved, {1.0 + 1e-3, 0}));
  CHECK(contains(moved, {3.0 - 1e-3, 0}));
  CHECK_FALSE(contains(moved, {0.9, 0}));
  CHECK(contains(moved, {2.0, 0.999}));
  CHECK_FALSE(contains(moved, {2.0, 1.001}));
}

TEST_CASE("translate shifts every vertex and keeps A bitwise") {
  const HPolytope gon = inscribe_polytope(Disc{{0, 0}, 3.0}, 16);
  const Vector2d p(1.0, 1.0);
  const HPolytope moved = translate(gon, p);

  // Vertex-enumeration oracle: each vertex moves by exactly p.
  const auto v0 = gon.vertices();
  const auto v1 = moved.vertices();
  REQUIRE(v0.size() == 16);
  REQUIRE(v1.size() == 16);
  for (size_t i = 0; i < v0.size(); ++i)
    CHECK((v1[i] - (v0[i] + p)).norm() < 1e-9);

  for (Eigen::Index i = 0; i < gon.A().rows(); ++i)
    for (Eigen::Index j = 0; j < 2; ++j)
      CHECK(moved.A()(i, j) == gon.A()(i, j));  // bitwise
}

TEST_CASE("pontryagin_diff on boxes and the zero set") {
  const HPolytope big = unit_box(3.0);
  const HPolytope small = unit_box(1.0);
  const HPolytope diff = pontryagin_diff(big, small);
  CHECK((diff.b() - Eigen::VectorXd::Constant(4, 2.0)).lpNorm<Eigen::Infinity>() < 1e-12);

  const HPolytope same = pontryagin_diff(big, point_at_origin());
  CHECK((same.b() - big.b()).lpNorm<Eigen::Infinity>() < 1e-12);

  CHECK_THROWS_AS((void)pontryagin_diff(small, big), EmptyDifference);
}

TEST_CASE("pontryagin_diff of 16-gons matches grid membership oracle") {
  const HPolytope P = inscribe_polytope(Disc{{0, 0}, 3.0}, 16);
  const HPolytope Q = inscribe_polytope(Disc{{0, 0}, 1.0}, 16);
  const HPolytope D = pontryagin_diff(P, Q);
  const auto qverts = Q.vertices();
  int checked = 0;
  for (double x = -3.2; x <= 3.2; x += 0.01) {
    for (double y = -3.2; y <= 3.2; y += 0.01) {
      const Vector2d q(x, y);
      bool oracle = true;
      for (const auto& v : qverts)
        if (!contains(P, q + v)) {
          oracle = false;
          break;
        }
      CHECK(contains(D, q) == oracle);
      ++checked;
    }
  }
  CHECK(checked > 100000);
}

TEST_CASE("pontryagin_diff Minkowski consistency on random points") {
  std::mt19937_64 rng(7);
  const HPolytope P = inscribe_polytope(Disc{{0, 0}, 2.5}, 12);
  const HPolytope Q = random_polygon(rng, 6, 0.2, 0.5);
  const HPolytope D = pontryagin_diff(P, Q);
  const auto qverts = Q.vertices();
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  int hits = 0;
  for (int it = 0; it < 1000 || hits < 200; ++it) {
    REQUIRE(it < 20000);
    const Vector2d q(u(rng), u(rng));
    if (!contains(D, q)) continue;
    ++hits;
    for (const auto& v : qverts) CHECK(contains(P, q + v, 1e-7));
  }
}

TEST_CASE("inscribe_polytope offsets and area convergence") {
  const HPolytope square = inscribe_polytope(Disc{{0, 0}, 2.0}, 4);
  CHECK(square.b()(0) == doctest::Approx(2.0 * std::cos(std::numbers::pi / 4)).epsilon(1e-12));
  CHECK(square.b()(0) == doctest::Approx(1.4142135623730951).epsilon(1e-12));

  const HPolytope octagon = inscribe_polytope(Disc{{0, 0}, 2.0}, 8);
  CHECK(octagon.b()(0) == doctest::Approx(2.0 * std::cos(std::numbers::pi / 8)).epsilon(1e-12));
  CHECK(octagon.b()(0) == doctest::Approx(1.8477590650225735).epsilon(1e-12));

  // Shoelace-area oracle: at n = 64 the polygon fills pi r^2 to within 1%.
  const double r = 1.7;
  const HPolytope fine = inscribe_polytope(Disc{{0, 0}, r}, 64);
  const double target = std::numbers::pi * r * r;
  CHECK(std::abs(fine.area() - target) / target < 0.01);

  CHECK_THROWS((void)inscribe_polytope(Disc{{0, 0}, 1.0}, 2));
}

TEST_CASE("inscribe_polytope is an under-approximation") {
  const double r = 2.3;
  const HPolytope gon = inscribe_polytope(Disc{{0, 0}, r}, 10);
  for (const auto& v : gon.vertices()) CHECK(v.norm() == doctest::Approx(r).epsilon(1e-9));
  // Facet midpoints project strictly inside the disc.
  for (Eigen::Index i = 0; i < gon.num_facets(); ++i) {
    const Vector2d mid = gon.A().row(i).transpose() * gon.b()(i);
    CHECK(mid.norm() < r - 1e-6);
  }
}

TEST_CASE("build_safe_set shrinks the communication disc") {
  const HPolytope s = build_safe_set(Disc{{0, 0}, 3.0}, 1.0, 8);
  CHECK(s.num_facets() == 8);
  CHECK(s.b()(0) == doctest::Approx(2.0 * std::cos(std::numbers::pi / 8)).epsilon(1e-12));

  CHECK_THROWS_AS((void)build_safe_set(Disc{{0, 0}, 3.0}, 3.0, 8), NonpositiveRadius);

  const HPolytope full = build_safe_set(Disc{{0, 0}, 3.0}, 0.0, 8);
  CHECK(full.b()(0) == doctest::Approx(3.0 * std::cos(std::numbers::pi / 8)).epsilon(1e-12));
}

TEST_CASE("contains") {
  const HPolytope box = unit_box();
  CHECK(contains(box, {0, 0}));
  CHECK_FALSE(contains(box, {1.5, 0}));

  // Octagon with inradius 2 (facet offsets exactly 2): a point at radius 1.99
  // along a facet normal is inside.
  Eigen::MatrixX2d A(8, 2);
  for (int k = 0; k < 8; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / 8;
    A(k, 0) = std::cos(phi);
    A(k, 1) = std::sin(phi);
  }
  const HPolytope octagon(A, Eigen::VectorXd::Constant(8, 2.0));
  const Vector2d probe = 1.99 * octagon.A().row(3).transpose();
  CHECK(contains(octagon, probe));
  CHECK_FALSE(contains(octagon, 2.01 * octagon.A().row(3).transpose()));
}

TEST_CASE("is_bounded") {
  CHECK(unit_box().is_bounded());
  Eigen::MatrixX2d slab(2, 2);
  slab << 1, 0, -1, 0;
  CHECK_FALSE(HPolytope(slab, Eigen::VectorXd::Ones(2)).is_bounded());
}
