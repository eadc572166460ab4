#include "nyfem/layer_potential.hpp"

#include "nyfem/gauss.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

namespace nyfem {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Translation/scale-normalized description of an element's boundary, or
// nullopt for edges that cannot be described by parameters.
std::optional<std::string> shape_key(const Element& el, int n, int p) {
  const Point2 origin = el.vertex(0);
  const double scale = (el.vertex(1) - origin).norm();
  std::string key = std::to_string(n) + "/" + std::to_string(p);
  char buf[64];
  auto put = [&](double v) {
    if (std::abs(v) < 1e-12) v = 0.0;
    std::snprintf(buf, sizeof buf, " %.9e", v + 0.0);
    key += buf;
  };
  for (std::size_t i = 0; i < el.size(); ++i) {
    const EdgeGeometry& e = el.edge(i);
    const Vec2 a = (e.start() - origin) / scale;
    key += " |" + std::to_string(static_cast<int>(e.kind()));
    put(a.x());
    put(a.y());
    switch (e.kind()) {
      case EdgeKind::straight:
        break;
      case EdgeKind::circular_arc: {
        const Vec2 c = (e.center() - origin) / scale;
        put(c.x());
        put(c.y());
        put(e.sweep());
        break;
      }
      case EdgeKind::sine:
        put(e.amplitude() / scale);
        put(e.periods());
        break;
      case EdgeKind::parametric:
        return std::nullopt;
    }
  }
  return key;
}

}  // namespace

IllConditionedError::IllConditionedError(double estimate)
    : std::runtime_error("Nystrom matrix ill-conditioned (condition estimate " + std::to_string(estimate) + ")"),
      estimate_(estimate) {}

BoundaryData BoundaryData::from_function(std::function<double(const Point2&)> f) {
  BoundaryData g;
  g.value = [f = std::move(f)](const BoundaryPoint& b) { return f(b.x); };
  return g;
}

BoundaryData BoundaryData::constant(double c) {
  BoundaryData g;
  g.value = [c](const BoundaryPoint&) { return c; };
  g.tangential = [](const BoundaryPoint&) { return 0.0; };
  return g;
}

double vertex_continuity_defect(const Element& el, const BoundaryData& g) {
  double defect = 0.0;
  const std::size_t N = el.size();
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t prev = (i + N - 1) % N;
    const double from_prev = g({prev, 1.0, el.vertex(i)});
    const double from_next = g({i, 0.0, el.vertex(i)});
    defect = std::max(defect, std::abs(from_prev - from_next));
  }
  return defect;
}

double double_layer_kernel(const Point2& x, const Point2& y, const Vec2& n_y) {
  const Vec2 d = x - y;
  const double r2 = d.squaredNorm();
  if (r2 == 0.0) throw DomainError("double_layer_kernel: coincident points");
  return -d.dot(n_y) / (kTwoPi * r2);
}

double double_layer_diagonal(double curvature) { return curvature / (2.0 * kTwoPi); }

Vec2 kernel_gradient(const Point2& x, const Point2& y, const Vec2& n_y) {
  const Vec2 d = x - y;
  const double r2 = d.squaredNorm();
  if (r2 == 0.0) throw DomainError("kernel_gradient: coincident points");
  return (-n_y * r2 + 2.0 * d.dot(n_y) * d) / (kTwoPi * r2 * r2);
}

std::size_t nearest_vertex(const KressRule& rule, std::size_t node_index) {
  return rule.nodes.at(node_index).nearest_vertex;
}

// ------------------------------------------------------------------ assembly

NystromFactorization::NystromFactorization(const KressRule& rule) {
  const std::size_t M = rule.size();
  matrix_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M));
  for (std::size_t i = 0; i < M; ++i) {
    const KressNode& xi = rule.nodes[i];
    double row_sum = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      const KressNode& yj = rule.nodes[j];
      if (yj.weight == 0.0) continue;
      double F = 0.0;
      if (i == j) {
        F = rule.straight_edges[yj.edge] ? 0.0 : double_layer_diagonal(yj.curvature);
      } else if (!rule.share_straight_edge(i, j)) {
        const Vec2 d = rule.difference(i, j);
        F = -d.dot(yj.normal) / (kTwoPi * d.squaredNorm());
      }
      const double a = F * yj.weight;
      matrix_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += a;
      row_sum += a;
    }
    const auto ii = static_cast<Eigen::Index>(i);
    const auto kk = static_cast<Eigen::Index>(xi.nearest_vertex);
    matrix_(ii, ii) += 0.5;
    matrix_(ii, kk) += 0.5 - row_sum;
  }
  lu_.compute(matrix_);
  const double rc = lu_.rcond();
  condition_ = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
  if (!(condition_ <= kMaxCondition)) throw IllConditionedError(condition_);
}

std::shared_ptr<const NystromFactorization> FactorizationCache::get(const Element& el, const KressRule& rule) {
  const auto key = shape_key(el, rule.n, rule.p);
  if (!key) return std::make_shared<NystromFactorization>(rule);
  {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(*key);
    if (it != entries_.end()) return it->second;
  }
  auto fact = std::make_shared<const NystromFactorization>(rule);
  std::lock_guard lock(mutex_);
  return entries_.emplace(*key, std::move(fact)).first->second;
}

std::size_t FactorizationCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

NystromSolver::NystromSolver(const Element& el, int n, int p, FactorizationCache* cache)
    : rule_(std::make_shared<const KressRule>(kress_rule(el, n, p))), label_(el.label()) {
  factorization_ = cache ? cache->get(el, *rule_) : std::make_shared<const NystromFactorization>(*rule_);
}

Eigen::VectorXd NystromSolver::sample(const BoundaryData& g) const {
  const std::size_t M = rule_->size();
  Eigen::VectorXd values(static_cast<Eigen::Index>(M));
  for (std::size_t i = 0; i < M; ++i) {
    const KressNode& node = rule_->nodes[i];
    values(static_cast<Eigen::Index>(i)) = g({node.edge, node.t, node.x});
  }
  return values;
}

HarmonicSolution NystromSolver::solve(const BoundaryData& g) const { return solve_values(sample(g)); }

HarmonicSolution NystromSolver::solve_values(const Eigen::VectorXd& g_at_nodes) const {
  if (g_at_nodes.size() != static_cast<Eigen::Index>(rule_->size())) {
    throw std::invalid_argument("solve_values: data size does not match the rule");
  }
  HarmonicSolution sol;
  sol.rule = rule_;
  sol.label = label_;
  sol.g_at_nodes = g_at_nodes;
  sol.phi = factorization_->solve(-g_at_nodes);
  sol.residual = (factorization_->matrix() * sol.phi + g_at_nodes).lpNorm<Eigen::Infinity>();
  return sol;
}

void NystromSolver::write_matrix(std::ostream& out) const {
  const Eigen::MatrixXd& A = factorization_->matrix();
  char buf[32];
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%s%.17g", j ? " " : "", A(i, j));
      out << buf;
    }
    out << '\n';
  }
}

HarmonicSolution solve_dirichlet(const Element& el, const BoundaryData& g, int n, int p) {
  return NystromSolver(el, n, p).solve(g);
}

// ---------------------------------------------------------------- evaluation

double gauss_integral(const KressRule& rule, const Point2& x) {
  double s = 0.0;
  for (const auto& node : rule.nodes) {
    if (node.weight == 0.0) continue;
    const Vec2 d = (x - node.anchor) - node.offset;
    s += -d.dot(node.normal) / (kTwoPi * d.squaredNorm()) * node.weight;
  }
  return s;
}

namespace {

// Density value subtracted from the integrand before summation. Near a corner
// (or far inside) this is the density at the nearest vertex; near the middle of
// an edge it is the density at the nearest node. Since the double-layer
// integral of a constant density c is -c inside K, subtracting it changes
// nothing analytically but removes the near-singular part of the integrand.
double point_segment_distance(const Point2& x, const Point2& a, const Point2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((x - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (x - (a + t * ab)).norm();
}

struct Accumulated {
  double value = 0.0;
  Vec2 grad = Vec2::Zero();
  double gauss = 0.0;
};

double stencil_density(const HarmonicSolution& sol, std::size_t e, const Stencil& st) {
  const KressRule& rule = *sol.rule;
  const int n = rule.n;
  double out = 0.0;
  for (int i = 0; i < st.size; ++i) {
    const int k = st.first + i;
    const std::size_t idx = (k == n) ? ((e + 1) % rule.num_edges) * n : e * n + static_cast<std::size_t>(k);
    out += st.weights[static_cast<std::size_t>(i)] * sol.phi(static_cast<Eigen::Index>(idx));
  }
  return out;
}

void add_node(const Point2& x, const KressNode& node, double w, double dphi, bool want_gradient, Accumulated& acc) {
  const Vec2 d = (x - node.anchor) - node.offset;
  const double r2 = d.squaredNorm();
  const double dn = d.dot(node.normal);
  const double Fw = -dn / (kTwoPi * r2) * w;
  acc.gauss += Fw;
  if (want_gradient) {
    acc.grad -= (-node.normal * r2 + 2.0 * dn * d) / (kTwoPi * r2 * r2) * (w * dphi);
  } else {
    acc.value -= Fw * dphi;
  }
}

// Gauss-Legendre on the tau-interval [a, b] of edge e, bisected until the
// panel is short compared with its distance to x.
void add_panel(const HarmonicSolution& sol, std::size_t e, const Point2& x, double a, double b, double phi_star,
               bool want_gradient, int depth, Accumulated& acc) {
  const KressRule& rule = *sol.rule;
  const KressNode pa = kress_point(rule.edges[e], e, a, rule.p);
  const KressNode pb = kress_point(rule.edges[e], e, b, rule.p);
  const double len = (pb.x - pa.x).norm();
  const double dist = point_segment_distance(x, pa.x, pb.x);
  if (dist < len && depth < kMaxPanelDepth) {
    const double mid = 0.5 * (a + b);
    add_panel(sol, e, x, a, mid, phi_star, want_gradient, depth + 1, acc);
    add_panel(sol, e, x, mid, b, phi_star, want_gradient, depth + 1, acc);
    return;
  }
  const GaussRule& g = gauss_legendre(kPanelFinePoints);
  const double half = 0.5 * (b - a);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const double tau = a + half * (1.0 + g.nodes[i]);
    const KressNode node = kress_point(rule.edges[e], e, tau, rule.p);
    const double dphi = stencil_density(sol, e, density_stencil(tau, rule.n)) - phi_star;
    add_node(x, node, node.weight * half * g.weights[i], dphi, want_gradient, acc);
  }
}

// Cell k of edge e: precomputed Gauss points when the cell is well separated
// from x, otherwise adaptive bisection.
void add_cell(const HarmonicSolution& sol, std::size_t e, int k, const Point2& x, double phi_star, bool want_gradient,
              Accumulated& acc) {
  const KressRule& rule = *sol.rule;
  const int n = rule.n;
  const Point2& xa = rule.nodes[e * n + static_cast<std::size_t>(k)].x;
  const Point2& xb = rule.nodes[(k + 1 == n) ? ((e + 1) % rule.num_edges) * n : e * n + static_cast<std::size_t>(k + 1)].x;
  const double len = (xb - xa).norm();
  const double dist = point_segment_distance(x, xa, xb);
  if (dist < len) {
    add_panel(sol, e, x, static_cast<double>(k) / n, static_cast<double>(k + 1) / n, phi_star, want_gradient, 1, acc);
    return;
  }
  const bool coarse = dist >= 4.0 * len;
  const std::size_t per_cell = kPanelCoarsePoints + kPanelFinePoints;
  const std::size_t first = (e * n + static_cast<std::size_t>(k)) * per_cell + (coarse ? 0 : kPanelCoarsePoints);
  const std::size_t count = coarse ? kPanelCoarsePoints : kPanelFinePoints;
  const auto& points = rule.panel_points();
  for (std::size_t i = first; i < first + count; ++i) {
    const PanelPoint& pt = points[i];
    add_node(x, pt.node, pt.node.weight, stencil_density(sol, e, pt.stencil) - phi_star, want_gradient, acc);
  }
}

// Sum of F(x, y_j) (phi_j - phi*) w_j over the boundary. Edges closer to x
// than kCloseRatio node spacings are integrated by adaptive Gauss panels on
// the interpolated density.
Accumulated accumulate(const HarmonicSolution& sol, const Point2& x, bool want_gradient) {
  const KressRule& rule = *sol.rule;
  const std::size_t N = rule.num_edges;
  const int n = rule.n;
  double node_dist = std::numeric_limits<double>::infinity();
  double vertex_dist = std::numeric_limits<double>::infinity();
  std::size_t nearest = 0;
  std::size_t vertex = 0;
  std::vector<std::size_t> edge_nearest(N, 0);
  std::vector<double> edge_dist(N, std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < rule.size(); ++j) {
    const KressNode& nd = rule.nodes[j];
    const double d = ((x - nd.anchor) - nd.offset).squaredNorm();
    if (d == 0.0) throw DomainError("eval: point lies on the boundary");
    if (d < node_dist) {
      node_dist = d;
      nearest = j;
    }
    if (nd.is_vertex && d < vertex_dist) {
      vertex_dist = d;
      vertex = j;
    }
    if (d < edge_dist[nd.edge]) {
      edge_dist[nd.edge] = d;
      edge_nearest[nd.edge] = j;
    }
  }
  const std::size_t pick =
      vertex_dist <= kVertexSubtractionRatio * kVertexSubtractionRatio * node_dist ? vertex : nearest;
  const double phi_star = sol.phi(static_cast<Eigen::Index>(pick));

  Accumulated acc;
  for (std::size_t e = 0; e < N; ++e) {
    // Distance to the chords next to the nearest node, and the local spacing.
    const std::size_t j = edge_nearest[e];
    const int k = static_cast<int>(j - e * n);
    const Point2& xk = rule.nodes[j].x;
    const Point2& prev = rule.nodes[e * n + static_cast<std::size_t>(std::max(k - 1, 0))].x;
    const Point2& next = (k + 1 == n) ? rule.nodes[((e + 1) % N) * n].x : rule.nodes[j + 1].x;
    const double dist = std::min(point_segment_distance(x, prev, xk), point_segment_distance(x, xk, next));
    const double spacing = std::max((xk - prev).norm(), (next - xk).norm());
    const double ratio = kCloseRatio * spacing / dist;
    if (ratio <= 1.0) {
      for (int i = 1; i < n; ++i) {
        const std::size_t idx = e * n + static_cast<std::size_t>(i);
        const KressNode& node = rule.nodes[idx];
        add_node(x, node, node.weight, sol.phi(static_cast<Eigen::Index>(idx)) - phi_star, want_gradient, acc);
      }
      continue;
    }
    for (int i = 0; i < n; ++i) add_cell(sol, e, i, x, phi_star, want_gradient, acc);
  }
  acc.value -= phi_star;
  return acc;
}

}  // namespace

double eval(const HarmonicSolution& sol, const Point2& x) {
  const Accumulated acc = accumulate(sol, x, false);
  if (acc.gauss < 0.5) throw DomainError("eval: point outside the element");
  return acc.value;
}

Vec2 eval_gradient(const HarmonicSolution& sol, const Point2& x) {
  const Accumulated acc = accumulate(sol, x, true);
  if (acc.gauss < 0.5) throw DomainError("eval_gradient: point outside the element");
  return acc.grad;
}

bool near_boundary(const KressRule& rule, const Point2& x) {
  // Local spacing ~ weight of the nearest node.
  double best = std::numeric_limits<double>::infinity();
  double spacing = 0.0;
  for (const auto& node : rule.nodes) {
    if (node.weight == 0.0) continue;
    const double d = ((x - node.anchor) - node.offset).norm();
    if (d < best) {
      best = d;
      spacing = node.weight;
    }
  }
  return best < 2.0 * spacing;
}

std::optional<double> fit_corner_exponent(const HarmonicSolution& sol, std::size_t vertex, double r_min,
                                          double r_max) {
  const KressRule& rule = *sol.rule;
  const std::size_t vnode = rule.vertex_node(vertex);
  const double phi_z = sol.phi(static_cast<Eigen::Index>(vnode));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t j = 0; j < rule.size(); ++j) {
    const KressNode& node = rule.nodes[j];
    if (node.is_vertex || node.nearest_vertex != vnode) continue;
    const double r = node.offset.norm();
    const double dphi = std::abs(sol.phi(static_cast<Eigen::Index>(j)) - phi_z);
    if (r < r_min || r > r_max || dphi == 0.0) continue;
    const double lx = std::log(r);
    const double ly = std::log(dphi);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++count;
  }
  if (count < 3) return std::nullopt;
  const double denom = count * sxx - sx * sx;
  if (denom == 0.0) return std::nullopt;
  return (count * sxy - sx * sy) / denom;
}

}  // namespace nyfem
