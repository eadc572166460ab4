#include "nyfem/gauss.hpp"
#include "nyfem/quadrature.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace nyfem;

namespace {

// int_K x^a y^b by Green's theorem, x^(a+1) y^b / (a+1) dy along each straight edge.
double green_monomial(const Element& el, int a, int b) {
  const GaussRule& g = gauss_legendre(8);
  double s = 0.0;
  for (std::size_t i = 0; i < el.size(); ++i) {
    const Point2 p = el.vertex(i), q = el.vertex(i + 1);
    for (std::size_t k = 0; k < g.nodes.size(); ++k) {
      const Point2 x = p + 0.5 * (g.nodes[k] + 1.0) * (q - p);
      s += 0.5 * g.weights[k] * std::pow(x.x(), a + 1) * std::pow(x.y(), b) / (a + 1) * (q.y() - p.y());
    }
  }
  return s;
}

double integrate(const InteriorRule& rule, auto f) {
  double s = 0.0;
  for (const auto& q : rule.nodes) s += q.w * f(q.x);
  return s;
}

Element circle() {
  const EdgeGeometry upper = EdgeGeometry::arc({1, 0}, {0, 0}, std::numbers::pi);
  const EdgeGeometry lower = EdgeGeometry::arc({-1, 0}, {0, 0}, std::numbers::pi);
  return Element({{1, 0}, {-1, 0}}, {upper, lower}, "circle");
}

}  // namespace

TEST_CASE("sigmoid is symmetric about one half") {
  for (int p = 2; p <= 10; ++p) {
    CHECK(sigmoid(0.5, p).eta == doctest::Approx(0.5).epsilon(1e-15));
    for (int k = 0; k <= 1000; ++k) {
      const double tau = k / 1000.0;
      CHECK(std::abs(sigmoid(1.0 - tau, p).eta - (1.0 - sigmoid(tau, p).eta)) < 1e-14);
    }
  }
}

TEST_CASE("sigmoid has roots at both ends") {
  const auto a = sigmoid(0.0, 6), b = sigmoid(1.0, 6);
  CHECK(a.eta == 0.0);
  CHECK(a.eta_prime == 0.0);
  CHECK(b.eta == 1.0);
  CHECK(b.eta_prime == 0.0);
  // Root of order p: eta(tau) / tau^p tends to a nonzero constant.
  const double r1 = sigmoid(1e-3, 6).eta / std::pow(1e-3, 6);
  const double r2 = sigmoid(5e-4, 6).eta / std::pow(5e-4, 6);
  CHECK(r1 == doctest::Approx(r2).epsilon(1e-2));
  CHECK(r1 > 0.0);
}

TEST_CASE("sigmoid is strictly increasing") {
  // Near tau = 1 eta rounds to 1; the upper half follows from the symmetry.
  for (int p = 2; p <= 10; ++p) {
    double prev = sigmoid(0.0, p).eta;
    for (int k = 1; k <= 1000; ++k) {
      const double next = sigmoid(k / 1000.0, p).eta;
      if (k <= 500) {
        CHECK(next > prev);
      } else {
        CHECK(next >= prev);
      }
      prev = next;
    }
  }
}

TEST_CASE("sigmoid derivative matches finite differences") {
  const double h = 1e-6;
  for (int p : {2, 4, 6, 8}) {
    for (double tau : {0.05, 0.2, 0.37, 0.5, 0.81, 0.95}) {
      const double fd = (sigmoid(tau + h, p).eta - sigmoid(tau - h, p).eta) / (2 * h);
      CHECK(sigmoid(tau, p).eta_prime == doctest::Approx(fd).epsilon(1e-7));
    }
  }
}

TEST_CASE("graded rule weights sum to the edge lengths") {
  const Element sq = test::unit_square();
  const KressRule rule = kress_rule(sq, 64, 6);
  std::vector<double> sums(4, 0.0);
  for (const auto& node : rule.nodes) sums[node.edge] += node.weight;
  for (double s : sums) CHECK(std::abs(s - 1.0) < 1e-8);

  const KressRule hex = kress_rule(test::l_hexagon(), 64, 6);
  double total = 0.0;
  for (const auto& node : hex.nodes) total += node.weight;
  CHECK(std::abs(total - 8.0) < 1e-8);
}

TEST_CASE("rule size is n times the number of edges") {
  const KressRule rule = kress_rule(test::unit_square(), 16, 6);
  CHECK(rule.size() == 64);
  for (std::size_t v = 0; v < 4; ++v) {
    CHECK(rule.nodes[rule.vertex_node(v)].is_vertex);
    CHECK(rule.nodes[rule.vertex_node(v)].weight == 0.0);
  }
}

TEST_CASE("nodes on straight edges are convex combinations of the vertices") {
  const Element el = test::l_hexagon();
  const int n = 32;
  const KressRule rule = kress_rule(el, n, 6);
  for (std::size_t e = 0; e < el.size(); ++e) {
    const Point2 z = el.vertex(e), zp = el.vertex(e + 1);
    for (int k = 0; k < n; ++k) {
      const double tau = static_cast<double>(k) / n;
      const Point2 expected = sigmoid(1.0 - tau, 6).eta * z + sigmoid(tau, 6).eta * zp;
      CHECK((rule.nodes[e * n + k].x - expected).norm() < 1e-14);
    }
  }
}

TEST_CASE("graded rule on a circle converges to the circumference") {
  const Element c = circle();
  auto length = [&](int n) {
    double s = 0.0;
    for (const auto& node : kress_rule(c, n, 6).nodes) s += node.weight;
    return s;
  };
  const double e16 = std::abs(length(16) - 2 * std::numbers::pi);
  const double e32 = std::abs(length(32) - 2 * std::numbers::pi);
  const double e64 = std::abs(length(64) - 2 * std::numbers::pi);
  INFO("errors " << e16 << " " << e32 << " " << e64);
  CHECK(e32 < e16);
  CHECK(e64 < e32);
  CHECK(e64 < 1e-8);
}

TEST_CASE("density stencil reproduces polynomials in the grid index") {
  const int n = 20;
  for (double tau : {0.0, 0.013, 0.26, 0.5, 0.77, 0.999, 1.0}) {
    const Stencil st = density_stencil(tau, n);
    REQUIRE(st.size == kStencilSize);
    CHECK(st.first >= 0);
    CHECK(st.first + st.size <= n + 1);
    for (int deg = 0; deg < kStencilSize; ++deg) {
      double s = 0.0;
      for (int i = 0; i < st.size; ++i) s += st.weights[i] * std::pow((st.first + i) / double(n), deg);
      CHECK(s == doctest::Approx(std::pow(tau, deg)).epsilon(1e-10));
    }
  }
  CHECK(density_stencil(0.5, 3).size == 4);
}

TEST_CASE("interior rule integrates the area") {
  const InteriorRule sq = interior_rule(test::unit_square());
  CHECK(std::abs(sq.sum_weights() - 1.0) < 1e-14);
  CHECK(std::abs(interior_rule(test::l_hexagon()).sum_weights() - 3.0) < 1e-14);
}

TEST_CASE("interior rule on the reference triangle") {
  const InteriorRule rule = interior_rule(test::triangle());
  CHECK(std::abs(integrate(rule, [](const Point2& x) { return std::pow(x.x(), 5); }) - 1.0 / 42.0) < 1e-14);
}

TEST_CASE("interior rule on the L-hexagon") {
  // Three unit squares, each contributing 2/3.
  const InteriorRule rule = interior_rule(test::l_hexagon());
  CHECK(std::abs(integrate(rule, [](const Point2& x) { return x.squaredNorm(); }) - 2.0) < 1e-13);
}

TEST_CASE("interior rule is exact for monomials up to degree five") {
  std::vector<Element> shapes{test::triangle(), test::unit_square(), test::regular_polygon(6, 1.3),
                              polygon_from_vertices(std::vector<Point2>{{-0.2, -0.1}, {1.1, 0.2}, {0.9, 1.4}, {0.1, 0.8}}),
                              test::l_hexagon()};
  for (const auto& el : shapes) {
    for (auto [refine, grading] : {std::pair{1, 0}, std::pair{2, 0}, std::pair{1, 3}, std::pair{3, 5}}) {
      const InteriorRule rule = interior_rule(el, refine, 16, grading);
      for (int a = 0; a <= 5; ++a) {
        for (int b = 0; a + b <= 5; ++b) {
          const double q = integrate(rule, [&](const Point2& x) { return std::pow(x.x(), a) * std::pow(x.y(), b); });
          // Tolerance relative to the size of the summands.
          const double size = integrate(rule, [&](const Point2& x) { return std::abs(std::pow(x.x(), a) * std::pow(x.y(), b)); });
          CHECK(std::abs(q - green_monomial(el, a, b)) < 1e-13 * std::max(1.0, size));
        }
      }
    }
  }
}

TEST_CASE("interior rule on a curved sector") {
  const InteriorRule rule = interior_rule(test::circular_sector());
  CHECK(std::abs(rule.sum_weights() - 0.75 * std::numbers::pi) < 1e-12);
  // int r^2 cos^2(theta) r dr dtheta over the three-quarter disk.
  CHECK(std::abs(integrate(rule, [](const Point2& x) { return x.x() * x.x(); }) - 3.0 * std::numbers::pi / 16.0) <
        1e-12);
}

TEST_CASE("Gauss-Legendre rules") {
  for (int n : {1, 4, 8, 16, 32}) {
    const GaussRule& g = gauss_legendre(n);
    REQUIRE(g.nodes.size() == static_cast<std::size_t>(n));
    for (int d = 0; d < 2 * n; ++d) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += g.weights[k] * std::pow(g.nodes[k], d);
      const double exact = d % 2 ? 0.0 : 2.0 / (d + 1);
      CHECK(std::abs(s - exact) < 1e-13);
    }
  }
}
