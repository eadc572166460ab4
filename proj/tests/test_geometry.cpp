#include "nyfem/geometry.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace nyfem;
using nyfem::test::l_hexagon;
using nyfem::test::unit_square;

namespace {

// Chebyshev center of a polygon kernel by grid search: the kernel is the
// intersection of the left half-planes of the edges.
std::pair<Point2, double> brute_force_star_center(const Element& el, double step) {
  double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
  for (const auto& v : el.vertices()) {
    lo_x = std::min(lo_x, v.x()), hi_x = std::max(hi_x, v.x());
    lo_y = std::min(lo_y, v.y()), hi_y = std::max(hi_y, v.y());
  }
  std::pair<Point2, double> best{Point2::Zero(), -1e300};
  for (double x = lo_x; x <= hi_x + 1e-12; x += step) {
    for (double y = lo_y; y <= hi_y + 1e-12; y += step) {
      double r = 1e300;
      for (std::size_t i = 0; i < el.size(); ++i) {
        const Point2 a = el.vertex(i);
        const Vec2 d = (el.vertex(i + 1) - a).normalized();
        r = std::min(r, cross(d, Point2(x, y) - a));
      }
      if (r > best.second) best = {Point2(x, y), r};
    }
  }
  return best;
}

double numeric_arc_length(const EdgeGeometry& e, double t0, double t1, int panels = 2000) {
  double s = 0.0;
  const double h = (t1 - t0) / panels;
  for (int k = 0; k < panels; ++k) {
    const double a = t0 + k * h;
    s += h / 6.0 * (e.eval(a).dx.norm() + 4.0 * e.eval(a + h / 2).dx.norm() + e.eval(a + h).dx.norm());
  }
  return s;
}

}  // namespace

TEST_CASE("unit square polygon has area one") {
  const Element sq = unit_square();
  CHECK(sq.size() == 4);
  CHECK(sq.edges().size() == 4);
  CHECK(sq.area() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sq.is_straight());
}

TEST_CASE("L-shaped hexagon from its vertex list") {
  const Element el = l_hexagon();
  CHECK(el.size() == 6);
  CHECK(el.area() == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(el.vertex(0).isApprox(Point2(0, 0)));
}

TEST_CASE("clockwise input is flipped to positive orientation") {
  std::vector<Point2> cw{{0, 0}, {0, 1}, {1, 1}, {1, 0}};
  const Element el = polygon_from_vertices(cw);
  CHECK(el.area() == doctest::Approx(1.0).epsilon(1e-15));
  for (std::size_t i = 0; i < el.size(); ++i) CHECK(interior_angle(el, i) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("malformed polygons are rejected") {
  std::vector<Point2> two{{0, 0}, {1, 0}};
  CHECK_THROWS_AS(polygon_from_vertices(two), GeometryError);
  std::vector<Point2> bowtie{{0, 0}, {1, 1}, {1, 0}, {0, 1}};
  CHECK_THROWS_AS(polygon_from_vertices(bowtie), GeometryError);
  std::vector<Point2> repeated{{0, 0}, {1, 0}, {1, 0}, {0, 1}};
  CHECK_THROWS_AS(polygon_from_vertices(repeated), GeometryError);
}

TEST_CASE("interior angles") {
  const Element sq = unit_square();
  for (std::size_t i = 0; i < 4; ++i) CHECK(interior_angle(sq, i) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(interior_angle(l_hexagon(), 0) == doctest::Approx(1.5).epsilon(1e-14));
  const Element oct = test::octagon();
  CHECK(interior_angle(oct, 3) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(interior_angle(oct, 5) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("a zero angle is rejected") {
  // The boundary runs down to (1,1) and straight back up.
  const std::vector<Point2> v{{0, 0}, {2, 0}, {2, 2}, {1, 2}, {1, 1}, {1, 1.5}, {0, 2}};
  std::vector<EdgeGeometry> e;
  for (std::size_t i = 0; i < v.size(); ++i) e.push_back(EdgeGeometry::straight(v[i], v[(i + 1) % v.size()]));
  CHECK_THROWS_AS(interior_angle(Element(v, e), 4), GeometryError);
}

TEST_CASE("interior angles of straight polygons sum to N-2") {
  std::vector<Element> shapes{unit_square(), l_hexagon(), test::triangle(), test::octagon()};
  for (int n = 3; n <= 12; ++n) shapes.push_back(test::regular_polygon(n));
  for (const auto& el : shapes) {
    double sum = 0.0;
    for (std::size_t i = 0; i < el.size(); ++i) sum += interior_angle(el, i);
    CHECK(sum == doctest::Approx(static_cast<double>(el.size()) - 2.0).epsilon(1e-12));
  }
}

TEST_CASE("shape report of the unit square") {
  const ShapeReport r = shape_report(unit_square());
  CHECK(r.h_K == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(r.h_e_min == doctest::Approx(1.0).epsilon(1e-14));
  REQUIRE(r.rho_K);
  REQUIRE(r.z_K);
  CHECK(*r.rho_K == doctest::Approx(0.5).epsilon(1e-10));
  CHECK((*r.z_K - Point2(0.5, 0.5)).norm() < 1e-8);
  CHECK(r.star_shaped);
}

TEST_CASE("star radius of the L-hexagon agrees with a grid search") {
  const Element el = l_hexagon();
  const ShapeReport r = shape_report(el);
  const auto [center, radius] = brute_force_star_center(el, 0.002);
  REQUIRE(r.rho_K);
  CHECK(std::abs(*r.rho_K - radius) < 1e-3);
  CHECK(r.star_shaped);
}

TEST_CASE("thin rectangle has chunkiness about 100") {
  std::vector<Point2> v{{0, 0}, {1, 0}, {1, 0.01}, {0, 0.01}};
  const ShapeReport r = shape_report(polygon_from_vertices(v));
  CHECK(r.c == doctest::Approx(std::sqrt(1.0001) / 0.01).epsilon(1e-12));
}

TEST_CASE("every vertex is visible from the star center") {
  std::vector<Element> shapes{unit_square(), l_hexagon(), test::octagon(), test::triangle()};
  for (const auto& el : shapes) {
    const ShapeReport r = shape_report(el);
    REQUIRE(r.z_K);
    for (const auto& v : el.vertices()) {
      for (int k = 0; k <= 200; ++k) {
        const Point2 x = *r.z_K + (k / 200.0) * (v - *r.z_K);
        const bool inside = contains(el, x) || distance_to_boundary(el, x) < 1e-12;
        CHECK(inside);
      }
    }
  }
}

TEST_CASE("non-star-shaped polygon is reported, not thrown") {
  // Comb with two deep notches: no point sees both notch floors.
  const std::vector<Point2> v{{0, 0}, {5, 0}, {5, 3}, {4, 3}, {4, 0.2}, {3, 0.2}, {3, 3}, {2, 3}, {2, 0.2}, {1, 0.2},
                              {1, 3}, {0, 3}};
  ShapeReport r;
  CHECK_NOTHROW(r = shape_report(polygon_from_vertices(v)));
  CHECK_FALSE(r.star_shaped);
  CHECK_FALSE(r.rho_K.has_value());
}

TEST_CASE("boundary distance on the unit square") {
  const Element sq = unit_square();
  CHECK(boundary_distance(sq, {0, 0}, {1, 1}) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(boundary_distance(sq, {0.25, 0}, {0, 0.25}) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_THROWS_AS(boundary_distance(sq, {0.5, 0.5}, {0, 0}), GeometryError);
}

TEST_CASE("boundary distance across an arc matches a numeric arc length") {
  const Element el = test::circular_sector();
  const Point2 b = el.edge(1).point(1.0 / 3.0);
  const double expected = 0.5 + numeric_arc_length(el.edge(1), 0.0, 1.0 / 3.0);
  CHECK(std::abs(boundary_distance(el, {0.5, 0}, b) - expected) < 1e-10);
  CHECK(std::abs(expected - (0.5 + std::numbers::pi / 2)) < 1e-10);
}

TEST_CASE("boundary distance is a metric on sampled points") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (const Element& el : {l_hexagon(), test::circular_sector()}) {
    auto sample = [&] { return el.edge(static_cast<std::size_t>(U(rng) * el.size())).point(U(rng)); };
    for (int trial = 0; trial < 100; ++trial) {
      const Point2 a = sample(), b = sample(), c = sample();
      const double ab = boundary_distance(el, a, b);
      CHECK(ab == doctest::Approx(boundary_distance(el, b, a)).epsilon(1e-12));
      CHECK(ab <= boundary_distance(el, a, c) + boundary_distance(el, c, b) + 1e-12);
      CHECK(boundary_distance(el, a, a) < 1e-12);
      CHECK(ab <= 0.5 * el.perimeter() + 1e-12);
    }
  }
}

TEST_CASE("constructed elements have positive signed area") {
  CHECK(test::circular_sector().area() == doctest::Approx(0.75 * std::numbers::pi).epsilon(1e-12));
  const EdgeGeometry s = EdgeGeometry::sine({0, 0}, {1, 0}, 0.25, 1);
  const Element k({{0, 0}, {1, 0}, {1, 1}, {0, 1}},
                  {s, EdgeGeometry::straight({1, 0}, {1, 1}), EdgeGeometry::straight({1, 1}, {0, 1}),
                   EdgeGeometry::straight({0, 1}, {0, 0})});
  CHECK(k.area() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(k.area() > 0.0);
}

TEST_CASE("edge offsets stay accurate next to the vertices") {
  const EdgeGeometry arc = EdgeGeometry::arc({1, 0}, {0, 0}, 1.5 * std::numbers::pi);
  const double t = 1e-12;
  const Vec2 d = arc.offset_from_start(t);
  const double angle = 1.5 * std::numbers::pi * t;
  CHECK(d.x() == doctest::Approx(std::cos(angle) - 1.0).epsilon(1e-6));
  CHECK(d.y() == doctest::Approx(std::sin(angle)).epsilon(1e-12));
  CHECK(arc.curvature(0.3) == doctest::Approx(1.0).epsilon(1e-12));
}
