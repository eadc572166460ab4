#include "nyfem/gauss.hpp"
#include "nyfem/interpolation.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace nyfem;

namespace {

constexpr double kPi = std::numbers::pi;

Target smooth_target() {
  Target v;
  v.name = "sin(x) exp(y)";
  v.value = [](const Point2& x) { return std::sin(x.x()) * std::exp(x.y()); };
  v.gradient = [](const Point2& x) {
    return Vec2(std::cos(x.x()) * std::exp(x.y()), std::sin(x.x()) * std::exp(x.y()));
  };
  return v;
}

Target harmonic_cubic() {
  Target v;
  v.value = [](const Point2& p) {
    const double x = p.x(), y = p.y();
    return x * x * x - 3 * x * y * y + 5 * (x * x - y * y);
  };
  v.gradient = [](const Point2& p) {
    const double x = p.x(), y = p.y();
    return Vec2(3 * x * x - 3 * y * y + 10 * x, -6 * x * y - 10 * y);
  };
  v.hessian = [](const Point2& p) {
    Eigen::Matrix2d H;
    H << 6 * p.x() + 10, -6 * p.y(), -6 * p.y(), -6 * p.x() - 10;
    return H;
  };
  return v;
}

Target exp_sum() {
  Target v;
  v.value = [](const Point2& p) { return std::exp(p.x()) + std::exp(p.y()); };
  v.gradient = [](const Point2& p) { return Vec2(std::exp(p.x()), std::exp(p.y())); };
  v.hessian = [](const Point2& p) {
    Eigen::Matrix2d H;
    H << std::exp(p.x()), 0, 0, std::exp(p.y());
    return H;
  };
  return v;
}

Target polynomial_target(const Poly2& p) {
  Target v;
  v.value = [p](const Point2& x) { return p(x); };
  v.gradient = [p](const Point2& x) { return p.gradient(x); };
  return v;
}

// Random member of the local space, as a target.
Target catalog_member(const LocalSpace& space, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> c(space.dim());
  for (auto& x : c) x = U(rng);
  Target v;
  v.value = [&space, c](const Point2& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) s += c[i] * eval_local(space.basis[i], x).value;
    return s;
  };
  v.gradient = [&space, c](const Point2& x) {
    Vec2 s = Vec2::Zero();
    for (std::size_t i = 0; i < c.size(); ++i) s += c[i] * eval_local(space.basis[i], x, true).gradient;
    return s;
  };
  return v;
}

std::vector<Point2> interior_samples(const Element& el, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<Point2> out;
  while (static_cast<int>(out.size()) < count) {
    const Point2 x(U(rng), U(rng));
    if (contains(el, x) && distance_to_boundary(el, x) > 0.05) out.push_back(x);
  }
  return out;
}

// Edge bubbles run from +1 at the start to -1 at the end of the edge.
double bubble(int j, double t) { return integrated_legendre(j, 1 - 2 * t).first; }

}  // namespace

TEST_CASE("edge interpolation recovers polynomial traces") {
  const Element el = test::l_hexagon();
  const EdgeGeometry& e = el.edge(2);
  for (int m = 1; m <= 5; ++m) {
    std::vector<double> c{0.0, 0.0, 0.8, -0.4, 0.3, 1.2};
    auto g = [&](double t) {
      double s = 1.5 * (1 - t) - 0.5 * t;
      for (int j = 2; j <= m; ++j) s += c[j] * bubble(j, t);
      return s;
    };
    const EdgeCoefficients ec = interpolate_edge(g, e, m);
    CHECK(ec.start_value == doctest::Approx(1.5));
    CHECK(ec.end_value == doctest::Approx(-0.5));
    REQUIRE(ec.interior.size() == static_cast<std::size_t>(m - 1));
    for (int j = 2; j <= m; ++j) CHECK(std::abs(ec.interior[j - 2] - c[j]) < 1e-12);
    const auto trace = edge_trace(e, m, CurvedTrace::type1, ec);
    for (double t : {0.1, 0.5, 0.77}) CHECK(std::abs(trace(t) - g(t)) < 1e-12);
  }
}

TEST_CASE("edge interpolation with m = 1 keeps only endpoint values") {
  const EdgeGeometry e = EdgeGeometry::straight({0, 0}, {2, 1});
  const EdgeCoefficients ec = interpolate_edge([](double t) { return std::cos(3 * t); }, e, 1);
  CHECK(ec.interior.empty());
  CHECK(ec.start_value == doctest::Approx(1.0));
  CHECK(ec.end_value == doctest::Approx(std::cos(3.0)));
}

TEST_CASE("edge interpolation of sin(pi s)") {
  // g(0) = g(1) = 0, int (c b_2 - g) = 0 with int b_2 = -1/3 and int g = 2/pi.
  const EdgeGeometry e = EdgeGeometry::straight({0, 0}, {1, 0});
  const EdgeCoefficients ec = interpolate_edge([](double t) { return std::sin(kPi * t); }, e, 2);
  REQUIRE(ec.interior.size() == 1);
  CHECK(std::abs(ec.start_value) < 1e-15);
  CHECK(std::abs(ec.end_value) < 1e-15);
  CHECK(std::abs(ec.interior[0] + 6.0 / kPi) < 1e-12);
}

TEST_CASE("reversed coefficients describe the same trace") {
  const EdgeGeometry e = EdgeGeometry::straight({0, 0}, {1, 2});
  auto g = [](double t) { return std::exp(t) * std::sin(4 * t); };
  const EdgeCoefficients ec = interpolate_edge(g, e, 4);
  const EdgeGeometry back = EdgeGeometry::straight({1, 2}, {0, 0});
  const auto fwd = edge_trace(e, 4, CurvedTrace::type1, ec);
  const auto rev = edge_trace(back, 4, CurvedTrace::type1, ec.reversed());
  for (double t : {0.0, 0.2, 0.6, 1.0}) CHECK(std::abs(fwd(t) - rev(1 - t)) < 1e-13);
}

TEST_CASE("interpolation is a projection onto the local space") {
  for (const Element& el : {test::l_hexagon(), test::octagon()}) {
    for (int m = 1; m <= 3; ++m) {
      InterpolationOptions opt;
      opt.n = 32;
      const LocalSpace space = local_basis(el, m, opt.n);
      const Target v = catalog_member(space, 17 + m);
      const LocalFunction f = interpolate_local(v, el, m, opt);
      for (const auto& x : interior_samples(el, 20, 4)) CHECK(std::abs(eval_local(f, x).value - v.value(x)) < 1e-8);
      const ErrorReport r = error_norms(v, f, el);
      CHECK(r.l2_abs <= 1e-7);
      CHECK(r.h1_abs <= 1e-7);
    }
  }
}

TEST_CASE("polynomials of degree m are reproduced") {
  const Element el = test::l_hexagon();
  const Point2 z(0.1, -0.3);
  for (int m = 1; m <= 3; ++m) {
    Poly2 p(z);
    for (int a = 0; a <= m; ++a) {
      for (int b = 0; a + b <= m; ++b) p.add_term(a, b, 0.3 * a - 0.7 * b + 0.5);
    }
    InterpolationOptions opt;
    opt.n = 64;
    const LocalFunction f = interpolate_local(polynomial_target(p), el, m, opt);
    for (const auto& x : interior_samples(el, 20, 8)) CHECK(std::abs(eval_local(f, x).value - p(x)) < 1e-8);
  }
}

TEST_CASE("xy is reproduced with m = 1 on the square") {
  const Element sq = test::unit_square();
  Target v;
  v.value = [](const Point2& x) { return x.x() * x.y(); };
  InterpolationOptions opt;
  opt.n = 64;
  const LocalFunction f = interpolate_local(v, sq, 1, opt);
  for (double x : {0.1, 0.5, 0.9}) {
    for (double y : {0.2, 0.6}) CHECK(std::abs(eval_local(f, {x, y}).value - x * y) < 1e-9);
  }
}

TEST_CASE("Dirichlet interpolation on the curved cell") {
  InterpolationOptions opt;
  opt.n = 64;
  {
    const Element el = curved_element(std::ldexp(1.0, -4));
    const Target v = harmonic_cubic();
    const LocalFunction f =
        interpolate_dirichlet(el, {true, false, false, false}, BoundaryData::from_function(v.value), v, 1, opt);
    const ErrorReport r = error_norms(v, f, el);
    const double e = r.l2_abs / r.h2_norm;
    CHECK(e >= 1.3546e-4 / 1.05);
    CHECK(e <= 1.3546e-4 * 1.05);
  }
  {
    const Element el = curved_element(std::ldexp(1.0, -3));
    const Target v = exp_sum();
    const LocalFunction f =
        interpolate_dirichlet(el, {true, false, false, false}, BoundaryData::from_function(v.value), v, 1, opt);
    const ErrorReport r = error_norms(v, f, el);
    const double e = r.l2_abs / r.h2_norm;
    CHECK(e >= 1.5157e-3 / 1.05);
    CHECK(e <= 1.5157e-3 * 1.05);
  }
}

TEST_CASE("Dirichlet interpolation matches the data on the marked edge") {
  const Element el = curved_element(0.25);
  const Target v = exp_sum();
  const LocalFunction f =
      interpolate_dirichlet(el, {true, false, false, false}, BoundaryData::from_function(v.value), v, 2);
  for (double t : {0.1, 0.35, 0.8}) {
    const Point2 x = el.edge(0).point(t);
    CHECK(std::abs(eval_local(f, x).value - v.value(x)) < 1e-12);
  }
}

TEST_CASE("zero data and zero target give the zero function") {
  const Element el = curved_element(0.5);
  Target zero;
  zero.value = [](const Point2&) { return 0.0; };
  const LocalFunction f = interpolate_dirichlet(el, {true, false, false, false}, BoundaryData::constant(0.0), zero, 2);
  for (const Point2& x : {Point2(0.25, 0.25), Point2(0.1, 0.4), Point2(0.4, 0.05)}) {
    CHECK(std::abs(eval_local(f, x).value) < 1e-14);
  }
}

TEST_CASE("edge moments of the interpolation error vanish") {
  const Element el = test::l_hexagon();
  const Target v = smooth_target();
  const GaussRule& g = gauss_legendre(48);
  for (int m = 2; m <= 4; ++m) {
    const LocalFunction f = interpolate_local(v, el, m);
    double vmax = 0.0;
    for (const auto& p : el.vertices()) vmax = std::max(vmax, std::abs(v.value(p)));
    for (std::size_t e = 0; e < el.size(); ++e) {
      const EdgeGeometry& edge = el.edge(e);
      for (int k = 0; k + 2 <= m; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
          const Point2 x = edge.point(0.5 * (g.nodes[i] + 1.0));
          const double q = std::pow(0.5 * (g.nodes[i] + 1.0), k);
          s += 0.5 * g.weights[i] * edge.length() * (eval_local(f, x).value - v.value(x)) * q;
        }
        CHECK(std::abs(s) <= 1e-9 * vmax * edge.length());
      }
    }
    for (const auto& p : el.vertices()) CHECK(std::abs(eval_local(f, p).value - v.value(p)) < 1e-14);
  }
}

TEST_CASE("interior system equals its Gram form and is negative definite") {
  for (const Element& el : {test::unit_square(), test::l_hexagon()}) {
    for (int m = 2; m <= 3; ++m) {
      InterpolationOptions opt;
      opt.n = 64;
      opt.interior_refine = 4;
      opt.vertex_grading = 10;
      const InteriorSystem sys = interior_system(el, m, opt);
      const auto k = static_cast<Eigen::Index>(binomial2(m));
      REQUIRE(sys.moments.rows() == k);
      const double scale = sys.moments.norm();
      CHECK((sys.moments - sys.gram).norm() <= 1e-6 * scale);
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (sys.gram + sys.gram.transpose()));
      CHECK(eig.eigenvalues().maxCoeff() < 0.0);
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig2(0.5 * (sys.moments + sys.moments.transpose()));
      CHECK(eig2.eigenvalues().maxCoeff() < 0.0);
    }
  }
}

TEST_CASE("vertex, edge and interior parts add up to the interpolant") {
  const Element el = test::l_hexagon();
  const int m = 3;
  InterpolationOptions opt;
  opt.n = 32;
  const Target v = smooth_target();
  const LocalFunction joint = interpolate_local(v, el, m, opt);
  const LocalSpace space = local_basis(el, m, opt.n);

  const auto edges = interpolate_edges(BoundaryData::from_function(v.value), el, m);
  std::vector<double> coef(space.dim(), 0.0);
  for (std::size_t i = 0; i < space.dim(); ++i) {
    const LocalFunction& f = space.basis[i];
    if (f.role == BasisRole::vertex) coef[i] = v.value(el.vertex(static_cast<std::size_t>(f.tag[0])));
    if (f.role == BasisRole::edge) coef[i] = edges[static_cast<std::size_t>(f.tag[0])].interior[f.tag[1] - 2];
  }
  // Interior part: moments of v minus the boundary parts against (x - c)^beta.
  const auto betas = multi_indices(m - 2);
  const InteriorRule rule = interior_rule(el, opt.interior_refine, 16, opt.vertex_grading);
  const auto nb = static_cast<Eigen::Index>(betas.size());
  Eigen::MatrixXd M(nb, nb);
  Eigen::VectorXd rhs(nb);
  const std::size_t first = space.vertex_count + space.edge_count;
  for (Eigen::Index r = 0; r < nb; ++r) {
    const Poly2 p = Poly2::monomial(space.center, betas[r].first, betas[r].second);
    rhs(r) = 0.0;
    for (Eigen::Index c = 0; c < nb; ++c) M(r, c) = 0.0;
    for (const auto& q : rule.nodes) {
      double boundary_part = 0.0;
      for (std::size_t i = 0; i < first; ++i) boundary_part += coef[i] * eval_local(space.basis[i], q.x).value;
      rhs(r) += q.w * (v.value(q.x) - boundary_part) * p(q.x);
      for (Eigen::Index c = 0; c < nb; ++c) {
        M(r, c) += q.w * eval_local(space.basis[first + static_cast<std::size_t>(c)], q.x).value * p(q.x);
      }
    }
  }
  const Eigen::VectorXd d = M.lu().solve(rhs);
  for (Eigen::Index c = 0; c < nb; ++c) coef[first + static_cast<std::size_t>(c)] = d(c);

  for (const auto& x : interior_samples(el, 20, 12)) {
    double parts = 0.0;
    for (std::size_t i = 0; i < space.dim(); ++i) parts += coef[i] * eval_local(space.basis[i], x).value;
    CHECK(std::abs(parts - eval_local(joint, x).value) < 1e-9);
  }
}

TEST_CASE("edge interpolant is the best H1 trace approximation") {
  const EdgeGeometry e = EdgeGeometry::straight({0, 0}, {1.5, 0.5});
  const double len = e.length();
  auto g = [](double t) { return std::sin(3 * t) + std::exp(t); };
  auto dg = [](double t) { return 3 * std::cos(3 * t) + std::exp(t); };
  const GaussRule& q = gauss_legendre(32);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int m : {2, 3, 4}) {
    const EdgeCoefficients ec = interpolate_edge(g, e, m);
    const auto tr = edge_trace(e, m, CurvedTrace::type1, ec);
    const double h = 1e-5;
    // |.|_{H1(e)}^2 in arc length: (1/len) int_0^1 (d/dt)^2 dt.
    auto seminorm = [&](const std::function<double(double)>& d) {
      double s = 0.0;
      for (std::size_t i = 0; i < q.nodes.size(); ++i) s += 0.5 * q.weights[i] * std::pow(d(0.5 * (q.nodes[i] + 1)), 2);
      return s / len;
    };
    const double best = seminorm([&](double t) { return dg(t) - (tr(t + h) - tr(t - h)) / (2 * h); });
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> c(static_cast<std::size_t>(m + 1));
      for (auto& x : c) x = U(rng);
      auto dp = [&](double t) {
        double s = 0.0;
        for (int k = 1; k <= m; ++k) s += k * c[static_cast<std::size_t>(k)] * std::pow(t, k - 1);
        return s;
      };
      CHECK(best <= seminorm([&](double t) { return dg(t) - dp(t); }) + 1e-12);
    }
  }
}

TEST_CASE("mesh interpolation is conforming and exact for harmonic bilinears") {
  const Mesh mesh = rectangle_grid(0, 0, 1, 1, 4, 4);
  Target v;
  v.value = [](const Point2& x) { return 1 + 2 * x.x() - x.y() + 3 * x.x() * x.y(); };
  v.gradient = [](const Point2& x) { return Vec2(2 + 3 * x.y(), -1 + 3 * x.x()); };
  InterpolationOptions opt;
  opt.n = 64;
  const MeshInterpolant mi = interpolate_mesh(v, mesh, 1, opt);
  CHECK(mi.dof == dof_map(mesh, 1).dim());
  const ErrorReport r = error_norms(v, mi, mesh);
  CHECK(r.l2_abs < 1e-9);
  CHECK(r.h1_abs < 1e-7);
}

TEST_CASE("neighbouring cells agree on their shared edge") {
  const Mesh mesh = rectangle_grid(0, 0, 1, 1, 3, 3);
  const Target v = smooth_target();
  const MeshInterpolant mi = interpolate_mesh(v, mesh, 3);
  for (const auto& edge : mesh.edges()) {
    if (edge.boundary()) continue;
    const Point2 a = mesh.vertices()[edge.v0], b = mesh.vertices()[edge.v1];
    for (double t : {0.2, 0.5, 0.9}) {
      const Point2 x = a + t * (b - a);
      const double left = eval_local(mi.cells[edge.cells[0].first], x).value;
      const double right = eval_local(mi.cells[edge.cells[1].first], x).value;
      CHECK(std::abs(left - right) < 1e-13);
    }
  }
}

TEST_CASE("second-order L2 convergence for m = 1 on refined squares") {
  Target v;
  v.value = [](const Point2& x) { return std::sin(2 * kPi * x.x()) * std::sin(2 * kPi * x.y()); };
  v.gradient = [](const Point2& x) {
    return Vec2(2 * kPi * std::cos(2 * kPi * x.x()) * std::sin(2 * kPi * x.y()),
                2 * kPi * std::sin(2 * kPi * x.x()) * std::cos(2 * kPi * x.y()));
  };
  std::vector<double> err, h;
  for (int level = 0; level <= 2; ++level) {
    const Mesh mesh = square_mesh_family(level);
    const ErrorReport r = error_norms(v, interpolate_mesh(v, mesh, 1), mesh);
    err.push_back(r.l2_rel);
    h.push_back(r.h_max);
  }
  const double order = std::log(err[2] / err[1]) / std::log(h[2] / h[1]);
  CHECK(order >= 1.85);
  CHECK(order <= 2.15);
}

TEST_CASE("relative errors are absolute errors over target norms") {
  const Element el = test::l_hexagon();
  const Target v = smooth_target();
  const ErrorReport r = error_norms(v, interpolate_local(v, el, 2), el);
  CHECK(r.l2_rel == doctest::Approx(r.l2_abs / r.l2_norm));
  CHECK(r.h1_rel == doctest::Approx(r.h1_abs / r.h1_norm));
  CHECK(r.l2_abs > 0.0);
}
