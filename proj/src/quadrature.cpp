#include "nyfem/quadrature.hpp"

#include "nyfem/gauss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nyfem {

SigmoidValue sigmoid(double tau, int p) {
  if (p < 2) throw std::invalid_argument("sigmoid: grading order p must be >= 2");
  const double s = 2.0 * tau - 1.0;
  const double a = 0.5 - 1.0 / p;
  const double c = a * s * s * s + s / p + 0.5;
  const double dc = 6.0 * a * s * s + 2.0 / p;
  const double cp = std::pow(c, p);
  const double dp = std::pow(1.0 - c, p);
  const double denom = cp + dp;
  SigmoidValue v;
  v.eta = cp / denom;
  v.eta_prime = p * std::pow(c, p - 1) * std::pow(1.0 - c, p - 1) * dc / (denom * denom);
  return v;
}

Vec2 KressRule::difference(std::size_t i, std::size_t j) const {
  const KressNode& a = nodes[i];
  const KressNode& b = nodes[j];
  return (a.anchor - b.anchor) + (a.offset - b.offset);
}

Stencil density_stencil(double tau, int n) {
  Stencil st;
  st.size = std::min(kStencilSize, n + 1);
  const double s = tau * n;
  st.first = std::clamp(static_cast<int>(std::floor(s)) - (st.size - 2) / 2, 0, n + 1 - st.size);
  for (int i = 0; i < st.size; ++i) {
    double l = 1.0;
    for (int k = 0; k < st.size; ++k) {
      if (k != i) l *= (s - (st.first + k)) / static_cast<double>(i - k);
    }
    st.weights[static_cast<std::size_t>(i)] = l;
  }
  return st;
}

const std::vector<PanelPoint>& KressRule::panel_points() const {
  std::call_once(panels_->once, [this] {
    std::vector<PanelPoint>& out = panels_->points;
    out.reserve(num_edges * static_cast<std::size_t>(n) * (kPanelCoarsePoints + kPanelFinePoints));
    for (std::size_t e = 0; e < num_edges; ++e) {
      for (int k = 0; k < n; ++k) {
        for (int g : {kPanelCoarsePoints, kPanelFinePoints}) {
          const GaussRule& rule = gauss_legendre(g);
          for (int i = 0; i < g; ++i) {
            const double tau = (k + 0.5 * (1.0 + rule.nodes[static_cast<std::size_t>(i)])) / n;
            PanelPoint pt{kress_point(edges[e], e, tau, p), density_stencil(tau, n)};
            pt.node.weight *= 0.5 * rule.weights[static_cast<std::size_t>(i)] / n;
            out.push_back(pt);
          }
        }
      }
    }
  });
  return panels_->points;
}

bool KressRule::share_straight_edge(std::size_t i, std::size_t j) const {
  const KressNode& a = nodes[i];
  const KressNode& b = nodes[j];
  // A vertex node also ends the previous edge.
  auto on_edge = [this](const KressNode& node, std::size_t e) {
    return node.edge == e || (node.is_vertex && (node.edge + num_edges - 1) % num_edges == e);
  };
  if (straight_edges[a.edge] && on_edge(b, a.edge)) return true;
  const std::size_t prev = (a.edge + num_edges - 1) % num_edges;
  return a.is_vertex && straight_edges[prev] && on_edge(b, prev);
}

KressNode kress_point(const EdgeGeometry& e, std::size_t edge, double tau, int p) {
  const SigmoidValue fwd = sigmoid(tau, p);
  KressNode node;
  node.edge = edge;
  node.t = fwd.eta;
  const EdgeSample s = e.eval(fwd.eta);
  if (tau <= 0.5) {
    node.anchor = e.start();
    node.offset = e.offset_from_start(fwd.eta);
  } else {
    node.anchor = e.end();
    node.offset = e.offset_from_end(sigmoid(1.0 - tau, p).eta);
  }
  node.x = node.anchor + node.offset;
  const double speed = s.dx.norm();
  node.normal = Vec2(s.dx.y(), -s.dx.x()) / speed;
  node.weight = fwd.eta_prime * speed;
  node.curvature = e.curvature(fwd.eta);
  return node;
}

KressRule kress_rule(const Element& el, int n, int p) {
  if (n < 2) throw std::invalid_argument("kress_rule: n must be >= 2");
  if (p < 2) throw std::invalid_argument("kress_rule: p must be >= 2");
  KressRule rule;
  rule.p = p;
  rule.n = n;
  rule.num_edges = el.size();
  rule.label = el.label();
  const std::size_t N = el.size();
  rule.nodes.reserve(N * n);
  for (std::size_t e = 0; e < N; ++e) {
    const EdgeGeometry& edge = el.edge(e);
    rule.straight_edges.push_back(edge.is_straight());
    rule.edges.push_back(edge);
    if (edge.length() <= 0.0) throw GeometryError("kress_rule: degenerate edge");
  }
  for (std::size_t e = 0; e < N; ++e) {
    const EdgeGeometry& edge = el.edge(e);
    const double len = edge.length();
    const std::size_t start_node = e * n;
    const std::size_t end_node = ((e + 1) % N) * n;
    for (int k = 0; k < n; ++k) {
      KressNode node;
      node.edge = e;
      if (k == 0) {
        const EdgeSample s = edge.eval(0.0);
        node.x = el.vertex(e);
        node.anchor = node.x;
        node.offset = Vec2::Zero();
        node.normal = Vec2(s.dx.y(), -s.dx.x()).normalized();
        node.t = 0.0;
        node.is_vertex = true;
        node.weight = 0.0;
        node.curvature = edge.curvature(0.0);
        node.nearest_vertex = start_node;
        rule.nodes.push_back(node);
        continue;
      }
      node = kress_point(edge, e, static_cast<double>(k) / n, p);
      node.weight /= n;
      const double t = node.t;
      const double t_rev = sigmoid(static_cast<double>(n - k) / n, p).eta;
      // Boundary distance to each endpoint; exact midpoints go to the start.
      double to_start = 0.0;
      double to_end = 0.0;
      if (edge.is_straight()) {
        to_start = t * len;
        to_end = t_rev * len;
      } else {
        to_start = edge.arc_length(t);
        to_end = len - to_start;
      }
      node.nearest_vertex = (to_end < to_start - 1e-12 * len) ? end_node : start_node;
      rule.nodes.push_back(node);
    }
  }
  return rule;
}

double InteriorRule::sum_weights() const {
  double s = 0.0;
  for (const auto& q : nodes) s += q.w;
  return s;
}

void append_triangle_rule(const Point2& a, const Point2& b, const Point2& c, std::vector<QuadPoint>& out) {
  static const double sq15 = std::sqrt(15.0);
  static const double a1 = (6.0 - sq15) / 21.0;
  static const double a2 = (6.0 + sq15) / 21.0;
  static const double w1 = (155.0 - sq15) / 1200.0;
  static const double w2 = (155.0 + sq15) / 1200.0;
  const double area = 0.5 * cross(b - a, c - a);
  auto push = [&](double l0, double l1, double l2, double w) {
    out.push_back({l0 * a + l1 * b + l2 * c, w * area});
  };
  push(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 9.0 / 40.0);
  push(a1, a1, 1.0 - 2.0 * a1, w1);
  push(a1, 1.0 - 2.0 * a1, a1, w1);
  push(1.0 - 2.0 * a1, a1, a1, w1);
  push(a2, a2, 1.0 - 2.0 * a2, w2);
  push(a2, 1.0 - 2.0 * a2, a2, w2);
  push(1.0 - 2.0 * a2, a2, a2, w2);
}

namespace {

void append_uniform(const Point2& a, const Point2& b, const Point2& c, int refine, std::vector<QuadPoint>& out) {
  if (refine <= 1) {
    append_triangle_rule(a, b, c, out);
    return;
  }
  const Vec2 u = (b - a) / refine;
  const Vec2 v = (c - a) / refine;
  for (int i = 0; i < refine; ++i) {
    for (int j = 0; i + j < refine; ++j) {
      const Point2 p = a + i * u + j * v;
      append_triangle_rule(p, p + u, p + v, out);
      if (i + j + 1 < refine) append_triangle_rule(p + u, p + u + v, p + v, out);
    }
  }
}

// Triangle whose first vertex is singular: split at the edge midpoints and
// recurse into the corner child.
void append_graded(const Point2& corner, const Point2& q1, const Point2& q2, int levels, int refine,
                   std::vector<QuadPoint>& out) {
  if (levels <= 0) {
    append_uniform(corner, q1, q2, refine, out);
    return;
  }
  const Point2 m1 = 0.5 * (corner + q1);
  const Point2 m2 = 0.5 * (corner + q2);
  const Point2 m12 = 0.5 * (q1 + q2);
  append_graded(corner, m1, m2, levels - 1, refine, out);
  append_uniform(m1, q1, m12, refine, out);
  append_uniform(m1, m12, m2, refine, out);
  append_uniform(m2, m12, q2, refine, out);
}

// Fan triangle (a, b, c) with a the center; b and c are element vertices and
// get `grading` levels of geometric refinement.
void append_fan_triangle(const Point2& a, const Point2& b, const Point2& c, int refine, int grading,
                         std::vector<QuadPoint>& out) {
  if (grading <= 0) {
    append_uniform(a, b, c, refine, out);
    return;
  }
  const Point2 mab = 0.5 * (a + b), mac = 0.5 * (a + c), mbc = 0.5 * (b + c);
  append_uniform(a, mab, mac, refine, out);
  append_uniform(mab, mbc, mac, refine, out);
  append_graded(b, mbc, mab, grading - 1, refine, out);
  append_graded(c, mac, mbc, grading - 1, refine, out);
}

}  // namespace

InteriorRule interior_rule(const Element& el, int refine, int curved_points, int vertex_grading) {
  InteriorRule rule;
  rule.label = el.label();
  const double h = el.diameter();
  Point2 c = el.centroid();
  if (!is_star_shaped_wrt(el, c, 1e-10 * h)) {
    const auto [z, r] = star_center(el);
    if (r <= 0.0) throw GeometryError("interior_rule: element is not star-shaped");
    c = z;
  }
  rule.center = c;
  const GaussRule& g = gauss_legendre(curved_points);
  for (const auto& e : el.edges()) {
    if (e.is_straight()) {
      append_fan_triangle(c, e.start(), e.end(), refine, vertex_grading, rule.nodes);
      continue;
    }
    const int panels = refine * (e.kind() == EdgeKind::sine ? e.periods() : 1);
    for (int pt = 0; pt < panels; ++pt) {
      for (int pu = 0; pu < refine; ++pu) {
        for (std::size_t i = 0; i < g.nodes.size(); ++i) {
          const double t = (pt + 0.5 * (g.nodes[i] + 1.0)) / panels;
          const EdgeSample s = e.eval(t);
          const double jac_t = cross(s.x - c, s.dx);
          for (std::size_t j = 0; j < g.nodes.size(); ++j) {
            const double u = (pu + 0.5 * (g.nodes[j] + 1.0)) / refine;
            const double w = 0.25 * g.weights[i] * g.weights[j] / (panels * refine);
            rule.nodes.push_back({c + u * (s.x - c), w * u * jac_t});
          }
        }
      }
    }
  }
  return rule;
}

}  // namespace nyfem
