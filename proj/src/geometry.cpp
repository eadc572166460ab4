#include "nyfem/geometry.hpp"

#include "nyfem/gauss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace nyfem {

namespace {

constexpr double kPi = std::numbers::pi;

Vec2 left_normal(const Vec2& d) { return Vec2(-d.y(), d.x()); }

// Composite Gauss-Legendre over [a, b].
template <class F>
double integrate(F&& f, double a, double b, int panels, int points = 20) {
  const GaussRule& g = gauss_legendre(points);
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    for (std::size_t k = 0; k < g.nodes.size(); ++k) {
      sum += g.weights[k] * f(lo + 0.5 * h * (g.nodes[k] + 1.0));
    }
  }
  return 0.5 * h * sum;
}

int panels_for(const EdgeGeometry& e) {
  switch (e.kind()) {
    case EdgeKind::straight:
      return 1;
    case EdgeKind::circular_arc:
      return 4;
    case EdgeKind::sine:
      return 16 * std::max(1, e.periods());
    case EdgeKind::parametric:
      return 32;
  }
  return 32;
}

bool segments_intersect(const Point2& p1, const Point2& p2, const Point2& q1, const Point2& q2) {
  const double d1 = cross(q2 - q1, p1 - q1);
  const double d2 = cross(q2 - q1, p2 - q1);
  const double d3 = cross(p2 - p1, q1 - p1);
  const double d4 = cross(p2 - p1, q2 - p1);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  auto on_segment = [](const Point2& a, const Point2& b, const Point2& c) {
    return std::min(a.x(), b.x()) <= c.x() && c.x() <= std::max(a.x(), b.x()) &&
           std::min(a.y(), b.y()) <= c.y() && c.y() <= std::max(a.y(), b.y());
  };
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

// Boundary polyline: exact for straight edges, sampled on curved ones.
std::vector<Point2> boundary_polyline(const Element& el, int samples_per_curved_edge) {
  std::vector<Point2> pts;
  for (const auto& e : el.edges()) {
    const int s = e.is_straight() ? 1 : samples_per_curved_edge;
    for (int k = 0; k < s; ++k) pts.push_back(e.point(static_cast<double>(k) / s));
  }
  return pts;
}

}  // namespace

// ---------------------------------------------------------------- EdgeGeometry

EdgeGeometry EdgeGeometry::straight(const Point2& a, const Point2& b) {
  EdgeGeometry e;
  e.kind_ = EdgeKind::straight;
  e.a_ = a;
  e.b_ = b;
  return e;
}

EdgeGeometry EdgeGeometry::arc(const Point2& a, const Point2& center, double sweep) {
  EdgeGeometry e;
  e.kind_ = EdgeKind::circular_arc;
  e.a_ = a;
  e.center_ = center;
  e.radius_ = (a - center).norm();
  if (e.radius_ <= 0.0) throw GeometryError("arc edge: start point coincides with center");
  if (sweep == 0.0) throw GeometryError("arc edge: zero sweep");
  e.start_angle_ = std::atan2(a.y() - center.y(), a.x() - center.x());
  e.sweep_ = sweep;
  const double th = e.start_angle_ + sweep;
  e.b_ = center + e.radius_ * Vec2(std::cos(th), std::sin(th));
  return e;
}

EdgeGeometry EdgeGeometry::sine(const Point2& a, const Point2& b, double amplitude, int periods) {
  EdgeGeometry e;
  e.kind_ = EdgeKind::sine;
  e.a_ = a;
  e.b_ = b;
  e.amplitude_ = amplitude;
  e.periods_ = periods;
  if (periods < 1) throw GeometryError("sine edge: periods must be positive");
  return e;
}

EdgeGeometry EdgeGeometry::parametric(CurveMap x, CurveMap dx, CurveMap ddx) {
  EdgeGeometry e;
  e.kind_ = EdgeKind::parametric;
  e.a_ = x(0.0);
  e.b_ = x(1.0);
  e.x_ = std::move(x);
  e.dx_ = std::move(dx);
  e.ddx_ = std::move(ddx);
  return e;
}

EdgeSample EdgeGeometry::eval(double t) const {
  switch (kind_) {
    case EdgeKind::straight: {
      const Vec2 d = b_ - a_;
      return {a_ + t * d, d, Vec2::Zero()};
    }
    case EdgeKind::circular_arc: {
      const double th = start_angle_ + sweep_ * t;
      const Vec2 u(std::cos(th), std::sin(th));
      return {center_ + radius_ * u, radius_ * sweep_ * Vec2(-u.y(), u.x()),
              -radius_ * sweep_ * sweep_ * u};
    }
    case EdgeKind::sine: {
      const Vec2 d = b_ - a_;
      const Vec2 nu = left_normal(d) / d.norm();
      const double w = 2.0 * kPi * periods_;
      return {a_ + t * d + amplitude_ * std::sin(w * t) * nu,
              d + amplitude_ * w * std::cos(w * t) * nu,
              -amplitude_ * w * w * std::sin(w * t) * nu};
    }
    case EdgeKind::parametric:
      return {x_(t), dx_(t), ddx_(t)};
  }
  return {};
}

Vec2 EdgeGeometry::offset_from_start(double t) const {
  switch (kind_) {
    case EdgeKind::straight:
      return t * (b_ - a_);
    case EdgeKind::circular_arc: {
      const double half = 0.5 * sweep_ * t;
      const double mid = start_angle_ + half;
      const double s = 2.0 * radius_ * std::sin(half);
      return Vec2(-std::sin(mid) * s, std::cos(mid) * s);
    }
    case EdgeKind::sine: {
      const Vec2 d = b_ - a_;
      const Vec2 nu = left_normal(d) / d.norm();
      return t * d + amplitude_ * std::sin(2.0 * kPi * periods_ * t) * nu;
    }
    case EdgeKind::parametric:
      return x_(t) - a_;
  }
  return Vec2::Zero();
}

Vec2 EdgeGeometry::offset_from_end(double s) const {
  switch (kind_) {
    case EdgeKind::straight:
      return -s * (b_ - a_);
    case EdgeKind::circular_arc: {
      const double half = -0.5 * sweep_ * s;
      const double mid = start_angle_ + sweep_ + half;
      const double len = 2.0 * radius_ * std::sin(half);
      return Vec2(-std::sin(mid) * len, std::cos(mid) * len);
    }
    case EdgeKind::sine: {
      const Vec2 d = b_ - a_;
      const Vec2 nu = left_normal(d) / d.norm();
      return -s * d - amplitude_ * std::sin(2.0 * kPi * periods_ * s) * nu;
    }
    case EdgeKind::parametric:
      return x_(1.0 - s) - b_;
  }
  return Vec2::Zero();
}

double EdgeGeometry::curvature(double t) const {
  if (kind_ == EdgeKind::straight) return 0.0;
  if (kind_ == EdgeKind::circular_arc) return (sweep_ > 0 ? 1.0 : -1.0) / radius_;
  const EdgeSample s = eval(t);
  const double speed = s.dx.norm();
  return cross(s.dx, s.ddx) / (speed * speed * speed);
}

double EdgeGeometry::arc_length(double t) const {
  switch (kind_) {
    case EdgeKind::straight:
      return t * (b_ - a_).norm();
    case EdgeKind::circular_arc:
      return t * radius_ * std::abs(sweep_);
    default:
      break;
  }
  if (t <= 0.0) return 0.0;
  const int panels = std::max(1, static_cast<int>(std::ceil(panels_for(*this) * t)));
  return integrate([this](double u) { return eval(u).dx.norm(); }, 0.0, t, panels);
}

double EdgeGeometry::param_at_arc_length(double s) const {
  const double total = length();
  if (kind_ == EdgeKind::straight || kind_ == EdgeKind::circular_arc) return s / total;
  double lo = 0.0;
  double hi = 1.0;
  double t = s / total;
  for (int it = 0; it < 60; ++it) {
    const double f = arc_length(t) - s;
    if (std::abs(f) < 1e-15 * total) break;
    if (f > 0) hi = t; else lo = t;
    double next = t - f / eval(t).dx.norm();
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
  }
  return t;
}

std::pair<double, double> EdgeGeometry::closest(const Point2& x) const {
  if (kind_ == EdgeKind::straight) {
    const Vec2 d = b_ - a_;
    const double t = std::clamp((x - a_).dot(d) / d.squaredNorm(), 0.0, 1.0);
    return {t, (a_ + t * d - x).norm()};
  }
  if (kind_ == EdgeKind::circular_arc) {
    const double ang = std::atan2(x.y() - center_.y(), x.x() - center_.x());
    // Relative angle in the sweep direction, wrapped to [0, 2pi).
    double rel = (ang - start_angle_) * (sweep_ > 0 ? 1.0 : -1.0);
    rel = std::fmod(rel, 2.0 * kPi);
    if (rel < 0) rel += 2.0 * kPi;
    double t = rel / std::abs(sweep_);
    if (t > 1.0) {
      // Outside the arc: nearer endpoint.
      const double da = (x - a_).norm();
      const double db = (x - b_).norm();
      return da <= db ? std::pair{0.0, da} : std::pair{1.0, db};
    }
    return {t, (point(t) - x).norm()};
  }
  constexpr int kSamples = 256;
  double best_t = 0.0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kSamples; ++k) {
    const double t = static_cast<double>(k) / kSamples;
    const double d = (point(t) - x).norm();
    if (d < best_d) {
      best_d = d;
      best_t = t;
    }
  }
  double t = best_t;
  for (int it = 0; it < 30; ++it) {
    const EdgeSample s = eval(t);
    const Vec2 r = s.x - x;
    const double f = r.dot(s.dx);
    const double df = s.dx.squaredNorm() + r.dot(s.ddx);
    if (df <= 0) break;
    const double next = std::clamp(t - f / df, 0.0, 1.0);
    if (std::abs(next - t) < 1e-16) {
      t = next;
      break;
    }
    t = next;
  }
  const double d = (point(t) - x).norm();
  if (d < best_d) return {t, d};
  return {best_t, best_d};
}

EdgeGeometry EdgeGeometry::transformed(double scale, const Vec2& shift) const {
  switch (kind_) {
    case EdgeKind::straight:
      return straight(scale * a_ + shift, scale * b_ + shift);
    case EdgeKind::circular_arc:
      return arc(scale * a_ + shift, scale * center_ + shift, sweep_);
    case EdgeKind::sine:
      return sine(scale * a_ + shift, scale * b_ + shift, scale * amplitude_, periods_);
    case EdgeKind::parametric: {
      auto x = x_;
      auto dx = dx_;
      auto ddx = ddx_;
      return parametric([x, scale, shift](double t) -> Point2 { return scale * x(t) + shift; },
                        [dx, scale](double t) -> Point2 { return scale * dx(t); },
                        [ddx, scale](double t) -> Point2 { return scale * ddx(t); });
    }
  }
  return *this;
}

// --------------------------------------------------------------------- Element

Element::Element(std::vector<Point2> vertices, std::vector<EdgeGeometry> edges, std::string label)
    : vertices_(std::move(vertices)), edges_(std::move(edges)), label_(std::move(label)) {
  const std::size_t n = vertices_.size();
  if (n < 2 || edges_.size() != n) {
    throw GeometryError("element: need at least two vertices and one edge per vertex");
  }
  double scale = 0.0;
  for (const auto& v : vertices_) {
    if (!std::isfinite(v.x()) || !std::isfinite(v.y())) throw GeometryError("element: non-finite vertex");
    scale = std::max(scale, v.cwiseAbs().maxCoeff());
  }
  const double tol = 1e-10 * std::max(scale, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = edges_[i];
    if ((e.start() - vertices_[i]).norm() > tol || (e.end() - vertices_[(i + 1) % n]).norm() > tol) {
      throw GeometryError("element: edge " + std::to_string(i) + " does not join its vertices");
    }
    if (e.length() <= 0.0) throw GeometryError("element: degenerate edge " + std::to_string(i));
  }
  if (!(area() > 0.0)) throw GeometryError("element: orientation must be counter-clockwise");
  for (std::size_t i = 0; i < n; ++i) interior_angle(*this, i);
}

bool Element::is_straight() const {
  return std::all_of(edges_.begin(), edges_.end(), [](const EdgeGeometry& e) { return e.is_straight(); });
}

double Element::area() const {
  double a = 0.0;
  for (const auto& e : edges_) {
    if (e.is_straight()) {
      a += 0.5 * cross(e.start(), e.end());
    } else {
      a += integrate([&e](double t) {
        const EdgeSample s = e.eval(t);
        return 0.5 * cross(s.x, s.dx);
      }, 0.0, 1.0, panels_for(e));
    }
  }
  return a;
}

double Element::perimeter() const {
  double p = 0.0;
  for (const auto& e : edges_) p += e.length();
  return p;
}

Point2 Element::centroid() const {
  // Moments relative to vertex 0 to limit cancellation.
  const Point2 o = vertices_[0];
  double a = 0.0;
  double mx = 0.0;
  double my = 0.0;
  for (const auto& e : edges_) {
    const int panels = panels_for(e);
    a += integrate([&](double t) {
      const EdgeSample s = e.eval(t);
      return 0.5 * cross(s.x - o, s.dx);
    }, 0.0, 1.0, panels, 8);
    mx += integrate([&](double t) {
      const EdgeSample s = e.eval(t);
      const double x = s.x.x() - o.x();
      return 0.5 * x * x * s.dx.y();
    }, 0.0, 1.0, panels, 8);
    my -= integrate([&](double t) {
      const EdgeSample s = e.eval(t);
      const double y = s.x.y() - o.y();
      return 0.5 * y * y * s.dx.x();
    }, 0.0, 1.0, panels, 8);
  }
  return o + Vec2(mx / a, my / a);
}

Point2 Element::vertex_centroid() const {
  Point2 c = Point2::Zero();
  for (const auto& v : vertices_) c += v;
  return c / static_cast<double>(vertices_.size());
}

double Element::diameter() const {
  const auto pts = is_straight() ? vertices_ : boundary_polyline(*this, 128);
  double d = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, (pts[i] - pts[j]).norm());
  return d;
}

// ------------------------------------------------------------------ operations

Element polygon_from_vertices(std::span<const Point2> points, std::string label) {
  const std::size_t n = points.size();
  if (n < 3) throw GeometryError("polygon: need at least three points");
  for (std::size_t i = 0; i < n; ++i) {
    if ((points[i] - points[(i + 1) % n]).norm() == 0.0) {
      throw GeometryError("polygon: repeated consecutive point " + std::to_string(i));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(points[i], points[(i + 1) % n], points[j], points[(j + 1) % n])) {
        throw GeometryError("polygon: self-intersecting boundary");
      }
    }
  }
  double twice_area = 0.0;
  for (std::size_t i = 0; i < n; ++i) twice_area += cross(points[i], points[(i + 1) % n]);
  std::vector<Point2> ring(points.begin(), points.end());
  if (twice_area < 0.0) std::reverse(ring.begin(), ring.end());
  std::vector<EdgeGeometry> edges;
  edges.reserve(n);
  for (std::size_t i = 0; i < n; ++i) edges.push_back(EdgeGeometry::straight(ring[i], ring[(i + 1) % n]));
  return Element(std::move(ring), std::move(edges), std::move(label));
}

double interior_angle(const Element& el, std::size_t vertex_index) {
  const std::size_t n = el.size();
  if (vertex_index >= n) throw std::out_of_range("interior_angle: vertex index");
  const Vec2 t_in = el.edge(vertex_index + n - 1).eval(1.0).dx.normalized();
  const Vec2 t_out = el.edge(vertex_index).eval(0.0).dx.normalized();
  const double turn = std::atan2(cross(t_in, t_out), t_in.dot(t_out));
  const double alpha = 1.0 - turn / kPi;
  if (alpha < 1e-12 || alpha > 2.0 - 1e-12) {
    throw GeometryError("zero interior angle (slit) at vertex " + std::to_string(vertex_index));
  }
  return alpha;
}

std::pair<Point2, double> star_center(const Element& el, int samples_per_curved_edge) {
  // Half-planes n . z + r <= n . a, one per straight edge / curved-edge sample.
  struct Line {
    Vec2 n;
    double c;
  };
  std::vector<Line> lines;
  for (const auto& e : el.edges()) {
    const int s = e.is_straight() ? 1 : samples_per_curved_edge;
    for (int k = 0; k < s; ++k) {
      const double t = e.is_straight() ? 0.0 : (k + 0.5) / s;
      const EdgeSample p = e.eval(t);
      const Vec2 n = Vec2(p.dx.y(), -p.dx.x()).normalized();
      lines.push_back({n, n.dot(p.x)});
    }
  }
  const double h = el.diameter();
  Point2 best_z = el.vertex_centroid();
  double best_r = -1.0;
  const std::size_t m = lines.size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      for (std::size_t k = j + 1; k < m; ++k) {
        Eigen::Matrix3d A;
        A << lines[i].n.x(), lines[i].n.y(), 1.0, lines[j].n.x(), lines[j].n.y(), 1.0, lines[k].n.x(),
            lines[k].n.y(), 1.0;
        const double det = A.determinant();
        if (std::abs(det) < 1e-12) continue;
        const Eigen::Vector3d sol = A.partialPivLu().solve(Eigen::Vector3d(lines[i].c, lines[j].c, lines[k].c));
        const double r = sol.z();
        if (r <= best_r + 1e-14 * h) continue;
        const Point2 z = sol.head<2>();
        bool feasible = true;
        for (const auto& l : lines) {
          if (l.n.dot(z) + r > l.c + 1e-12 * h) {
            feasible = false;
            break;
          }
        }
        if (feasible) {
          best_r = r;
          best_z = z;
        }
      }
    }
  }
  return {best_z, best_r};
}

bool is_star_shaped_wrt(const Element& el, const Point2& c, double margin) {
  for (const auto& e : el.edges()) {
    const int s = e.is_straight() ? 1 : 128;
    for (int k = 0; k <= s; ++k) {
      const double t = static_cast<double>(k) / s;
      const EdgeSample p = e.eval(t);
      const Vec2 n = Vec2(p.dx.y(), -p.dx.x()).normalized();
      if (n.dot(p.x - c) <= margin) return false;
    }
  }
  return true;
}

ShapeReport shape_report(const Element& el) {
  ShapeReport r;
  r.h_K = el.diameter();
  r.h_e_min = std::numeric_limits<double>::infinity();
  for (const auto& e : el.edges()) r.h_e_min = std::min(r.h_e_min, e.length());
  r.c = r.h_K / r.h_e_min;
  if (!el.is_straight()) return r;
  const auto [z, rho] = star_center(el);
  if (rho <= 1e-14 * r.h_K) {
    r.star_shaped = false;
    return r;
  }
  r.rho_K = rho;
  r.z_K = z;
  r.sigma = r.h_K / rho;
  return r;
}

std::optional<BoundaryLocation> locate_on_boundary(const Element& el, const Point2& x) {
  const double tol = kOnBoundaryTolerance * el.diameter();
  double best = std::numeric_limits<double>::infinity();
  BoundaryLocation loc;
  double arc_before = 0.0;
  for (std::size_t i = 0; i < el.size(); ++i) {
    const auto& e = el.edge(i);
    const auto [t, d] = e.closest(x);
    if (d < best) {
      best = d;
      loc.edge = i;
      loc.t = t;
      loc.arc = arc_before + e.arc_length(t);
    }
    arc_before += e.length();
  }
  if (best > tol) return std::nullopt;
  return loc;
}

double boundary_distance(const Element& el, const Point2& a, const Point2& b) {
  const auto la = locate_on_boundary(el, a);
  const auto lb = locate_on_boundary(el, b);
  if (!la || !lb) throw GeometryError("boundary_distance: point not on the boundary");
  const double d = std::abs(la->arc - lb->arc);
  return std::min(d, el.perimeter() - d);
}

double distance_to_boundary(const Element& el, const Point2& x) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : el.edges()) best = std::min(best, e.closest(x).second);
  return best;
}

bool contains(const Element& el, const Point2& x) {
  const auto poly = boundary_polyline(el, 256);
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2& a = poly[i];
    const Point2& b = poly[j];
    if ((a.y() > x.y()) != (b.y() > x.y())) {
      const double xi = (b.x() - a.x()) * (x.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (x.x() < xi) inside = !inside;
    }
  }
  return inside;
}

}  // namespace nyfem
