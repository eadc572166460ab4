#include "nyfem/poisson_space.hpp"

#include "nyfem/gauss.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace nyfem {

// ---------------------------------------------------------------------- Poly2

Poly2 Poly2::monomial(const Point2& center, int a, int b, double coeff) {
  Poly2 p(center);
  p.add_term(a, b, coeff);
  return p;
}

double Poly2::coefficient(int a, int b) const {
  auto it = terms_.find({a, b});
  return it == terms_.end() ? 0.0 : it->second;
}

void Poly2::add_term(int a, int b, double coeff) {
  if (a < 0 || b < 0) throw std::invalid_argument("Poly2: negative exponent");
  if (coeff == 0.0) return;
  auto [it, fresh] = terms_.emplace(Exponent{a, b}, coeff);
  if (!fresh) {
    it->second += coeff;
    if (it->second == 0.0) terms_.erase(it);
  }
}

int Poly2::degree() const {
  int d = -1;
  for (const auto& [e, c] : terms_) d = std::max(d, e.first + e.second);
  return d;
}

Poly2 Poly2::homogeneous_part(int degree) const {
  Poly2 out(center_);
  for (const auto& [e, c] : terms_) {
    if (e.first + e.second == degree) out.terms_.emplace(e, c);
  }
  return out;
}

Poly2 Poly2::derivative(int axis) const {
  Poly2 out(center_);
  for (const auto& [e, c] : terms_) {
    const int k = axis == 0 ? e.first : e.second;
    if (k == 0) continue;
    if (axis == 0) {
      out.add_term(e.first - 1, e.second, c * k);
    } else {
      out.add_term(e.first, e.second - 1, c * k);
    }
  }
  return out;
}

Poly2 Poly2::laplacian() const {
  Poly2 out(center_);
  for (const auto& [e, c] : terms_) {
    const auto [a, b] = e;
    if (a >= 2) out.add_term(a - 2, b, c * a * (a - 1));
    if (b >= 2) out.add_term(a, b - 2, c * b * (b - 1));
  }
  return out;
}

Poly2 Poly2::times_r2() const {
  Poly2 out(center_);
  for (const auto& [e, c] : terms_) {
    out.add_term(e.first + 2, e.second, c);
    out.add_term(e.first, e.second + 2, c);
  }
  return out;
}

namespace {

// Powers d^0..d^k.
void powers(double d, int k, std::vector<double>& out) {
  out.resize(static_cast<std::size_t>(k) + 1);
  out[0] = 1.0;
  for (int i = 1; i <= k; ++i) out[i] = out[i - 1] * d;
}

}  // namespace

double Poly2::operator()(const Point2& x) const {
  if (terms_.empty()) return 0.0;
  const int d = degree();
  std::vector<double> px, py;
  powers(x.x() - center_.x(), d, px);
  powers(x.y() - center_.y(), d, py);
  double s = 0.0;
  for (const auto& [e, c] : terms_) s += c * px[e.first] * py[e.second];
  return s;
}

Vec2 Poly2::gradient(const Point2& x) const {
  Vec2 g = Vec2::Zero();
  if (terms_.empty()) return g;
  const int d = degree();
  std::vector<double> px, py;
  powers(x.x() - center_.x(), d, px);
  powers(x.y() - center_.y(), d, py);
  for (const auto& [e, c] : terms_) {
    const auto [a, b] = e;
    if (a > 0) g.x() += c * a * px[a - 1] * py[b];
    if (b > 0) g.y() += c * b * px[a] * py[b - 1];
  }
  return g;
}

Eigen::Matrix2d Poly2::hessian(const Point2& x) const {
  Eigen::Matrix2d H = Eigen::Matrix2d::Zero();
  if (terms_.empty()) return H;
  const int d = degree();
  std::vector<double> px, py;
  powers(x.x() - center_.x(), d, px);
  powers(x.y() - center_.y(), d, py);
  for (const auto& [e, c] : terms_) {
    const auto [a, b] = e;
    if (a > 1) H(0, 0) += c * a * (a - 1) * px[a - 2] * py[b];
    if (b > 1) H(1, 1) += c * b * (b - 1) * px[a] * py[b - 2];
    if (a > 0 && b > 0) H(0, 1) += c * a * b * px[a - 1] * py[b - 1];
  }
  H(1, 0) = H(0, 1);
  return H;
}

Poly2& Poly2::operator+=(const Poly2& other) {
  if (other.terms_.empty()) return *this;
  if (terms_.empty()) {
    center_ = other.center_;
  } else if ((center_ - other.center_).norm() > 0.0) {
    throw std::invalid_argument("Poly2: adding polynomials with different centers");
  }
  for (const auto& [e, c] : other.terms_) add_term(e.first, e.second, c);
  return *this;
}

Poly2& Poly2::operator-=(const Poly2& other) { return *this += -1.0 * other; }

Poly2& Poly2::operator*=(double s) {
  for (auto& [e, c] : terms_) c *= s;
  prune();
  return *this;
}

void Poly2::prune() {
  std::erase_if(terms_, [](const auto& kv) { return kv.second == 0.0; });
}

Poly2 particular_solution(const Poly2& p) {
  Poly2 q(p.center());
  for (int j = 0; j <= p.degree(); ++j) {
    Poly2 lap = p.homogeneous_part(j);
    if (lap.is_zero()) continue;
    // (j-k)! / ((j+1)! (k+1)!) (|x|^2/4)^(k+1) Lap^k p_j, alternating in k.
    for (int k = 0; 2 * k <= j && !lap.is_zero(); ++k) {
      const double coeff = std::tgamma(j - k + 1.0) / (std::tgamma(j + 2.0) * std::tgamma(k + 2.0)) *
                           std::pow(0.25, k + 1) * (k % 2 ? -1.0 : 1.0);
      Poly2 term = lap;
      for (int r = 0; r <= k; ++r) term = term.times_r2();
      q += coeff * term;
      lap = lap.laplacian();
    }
  }
  return q;
}

std::pair<double, double> integrated_legendre(int j, double t) {
  if (j < 2) throw std::invalid_argument("integrated_legendre: j must be >= 2");
  const auto L = legendre_values(j, t);
  return {(L[j] - L[j - 2]) / (2.0 * j - 1.0), L[j - 1]};
}

// -------------------------------------------------------------- edge traces

double edge_arc_fraction(const EdgeGeometry& e, double t) {
  if (e.is_straight()) return t;
  return e.arc_length(t) / e.length();
}

double edge_param_at_fraction(const EdgeGeometry& e, double s) {
  if (e.is_straight()) return s;
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return e.param_at_arc_length(s * e.length());
}

namespace {

int cartesian_count(int m) { return (m + 2) * (m + 1) / 2; }

bool uses_nodal(const EdgeGeometry& e, CurvedTrace variant) {
  return !e.is_straight() && variant == CurvedTrace::type2;
}

std::vector<EdgeTrace> nodal_basis(const EdgeGeometry& e, std::size_t edge, int m) {
  const int K = cartesian_count(m);
  const auto betas = multi_indices(m);
  const Point2 mid = e.point(edge_param_at_fraction(e, 0.5));
  const double scale = e.length();
  Eigen::MatrixXd V(K, K);
  for (int k = 0; k < K; ++k) {
    const Point2 x = e.point(edge_param_at_fraction(e, static_cast<double>(k) / (K - 1)));
    for (int b = 0; b < K; ++b) {
      const auto [a1, a2] = betas[b];
      V(k, b) = std::pow((x.x() - mid.x()) / scale, a1) * std::pow((x.y() - mid.y()) / scale, a2);
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(V);
  if (lu.rank() < K || lu.rcond() < 1e-12) {
    throw GeometryError("edge_basis: nodal matrix of the cartesian trace space is singular on edge " +
                        std::to_string(edge));
  }
  const Eigen::MatrixXd inv = lu.inverse();
  std::vector<EdgeTrace> out;
  auto make = [&](int node) {
    Poly2 poly(mid);
    for (int b = 0; b < K; ++b) {
      const auto [a1, a2] = betas[b];
      poly.add_term(a1, a2, inv(b, node) / std::pow(scale, a1 + a2));
    }
    EdgeTrace tr;
    tr.edge = edge;
    tr.kind = TraceKind::cart_poly;
    tr.index = node;
    tr.poly = poly;
    tr.value = [e, poly](double t) { return poly(e.point(t)); };
    return tr;
  };
  EdgeTrace first = make(0);
  first.role = TraceRole::vertex;
  first.at_start = true;
  out.push_back(first);
  EdgeTrace last = make(K - 1);
  last.role = TraceRole::vertex;
  last.at_start = false;
  out.push_back(last);
  for (int k = 1; k + 1 < K; ++k) {
    EdgeTrace tr = make(k);
    tr.role = TraceRole::edge;
    out.push_back(tr);
  }
  return out;
}

}  // namespace

int edge_function_count(const EdgeGeometry& e, int m, CurvedTrace variant) {
  if (m < 1) throw std::invalid_argument("edge_function_count: m must be >= 1");
  return uses_nodal(e, variant) ? cartesian_count(m) - 2 : m - 1;
}

std::vector<EdgeTrace> edge_basis(const Element& el, std::size_t edge, int m, CurvedTrace variant) {
  if (edge >= el.size()) throw std::out_of_range("edge_basis: edge index");
  return edge_basis(el.edge(edge), edge, m, variant);
}

std::vector<EdgeTrace> edge_basis(const EdgeGeometry& e, std::size_t edge, int m, CurvedTrace variant) {
  if (m < 1) throw std::invalid_argument("edge_basis: m must be >= 1");
  if (uses_nodal(e, variant)) return nodal_basis(e, edge, m);

  const bool straight = e.is_straight();
  std::vector<EdgeTrace> out;
  for (bool start : {true, false}) {
    EdgeTrace tr;
    tr.edge = edge;
    tr.kind = straight ? TraceKind::vertex_hat : TraceKind::arc_poly;
    tr.role = TraceRole::vertex;
    tr.at_start = start;
    tr.value = [e, start](double t) {
      const double s = edge_arc_fraction(e, t);
      return start ? 1.0 - s : s;
    };
    out.push_back(tr);
  }
  for (int j = 2; j <= m; ++j) {
    EdgeTrace tr;
    tr.edge = edge;
    tr.kind = straight ? TraceKind::bubble : TraceKind::arc_poly;
    tr.role = TraceRole::edge;
    tr.index = j;
    tr.value = [e, j](double t) { return integrated_legendre(j, 1.0 - 2.0 * edge_arc_fraction(e, t)).first; };
    out.push_back(tr);
  }
  return out;
}

BoundaryData edgewise_data(std::vector<std::function<double(double)>> per_edge) {
  BoundaryData g;
  g.value = [f = std::move(per_edge)](const BoundaryPoint& b) {
    const auto& fe = f.at(b.edge);
    return fe ? fe(b.t) : 0.0;
  };
  return g;
}

// ------------------------------------------------------------- local space

LocalValue eval_local(const LocalFunction& f, const Point2& x, bool want_gradient) {
  LocalValue out;
  out.value = f.poly(x);
  if (want_gradient) out.gradient = f.poly.gradient(x);
  if (!f.harmonic) return out;
  const HarmonicSolution& h = *f.harmonic;
  if (!want_gradient && f.element && near_boundary(*h.rule, x)) {
    if (const auto loc = locate_on_boundary(*f.element, x)) {
      out.value += f.trace({loc->edge, loc->t, x});
      return out;
    }
  }
  out.value += eval(h, x);
  if (want_gradient) out.gradient += eval_gradient(h, x);
  return out;
}

Point2 monomial_center(const Element& el) {
  const Point2 c = el.vertex_centroid();
  if (is_star_shaped_wrt(el, c, 1e-10 * el.diameter())) return c;
  const auto [z, r] = star_center(el);
  if (r <= 0.0) throw GeometryError("monomial_center: element is not star-shaped");
  return z;
}

std::vector<Poly2::Exponent> multi_indices(int d) {
  std::vector<Poly2::Exponent> out;
  for (int k = 0; k <= d; ++k) {
    for (int b = 0; b <= k; ++b) out.push_back({k - b, b});
  }
  return out;
}

LocalFunction interior_function(const NystromSolver& solver, const Element& el, const Point2& center,
                                Poly2::Exponent beta, int m) {
  LocalFunction f;
  f.poly = particular_solution(Poly2::monomial(center, beta.first, beta.second));
  f.trace = BoundaryData::from_function([q = f.poly](const Point2& x) { return -q(x); });
  f.harmonic = solver.solve(f.trace);
  f.label = el.label();
  f.m = m;
  f.role = BasisRole::interior;
  f.tag = {beta.first, beta.second};
  return f;
}

LocalSpace local_basis(const Element& el, int m, int n, int p, CurvedTrace variant, FactorizationCache* cache) {
  if (m < 1) throw std::invalid_argument("local_basis: m must be >= 1");
  LocalSpace space;
  space.element = std::make_shared<const Element>(el);
  space.solver = std::make_shared<const NystromSolver>(el, n, p, cache);
  space.m = m;
  space.variant = variant;
  space.center = monomial_center(el);
  const std::size_t N = el.size();

  std::vector<std::vector<EdgeTrace>> traces;
  for (std::size_t e = 0; e < N; ++e) traces.push_back(edge_basis(el, e, m, variant));

  auto harmonic = [&](std::vector<std::function<double(double)>> per_edge, BasisRole role, std::vector<int> tag) {
    LocalFunction f;
    f.trace = edgewise_data(std::move(per_edge));
    f.harmonic = space.solver->solve(f.trace);
    f.element = space.element;
    f.label = el.label();
    f.m = m;
    f.role = role;
    f.tag = std::move(tag);
    return f;
  };

  for (std::size_t v = 0; v < N; ++v) {
    std::vector<std::function<double(double)>> per_edge(N);
    const std::size_t prev = (v + N - 1) % N;
    per_edge[v] = traces[v][0].value;
    per_edge[prev] = traces[prev][1].value;
    space.basis.push_back(harmonic(std::move(per_edge), BasisRole::vertex, {static_cast<int>(v)}));
  }
  space.vertex_count = N;
  for (std::size_t e = 0; e < N; ++e) {
    for (std::size_t k = 2; k < traces[e].size(); ++k) {
      std::vector<std::function<double(double)>> per_edge(N);
      per_edge[e] = traces[e][k].value;
      space.basis.push_back(harmonic(std::move(per_edge), BasisRole::edge,
                                     {static_cast<int>(e), traces[e][k].index}));
      ++space.edge_count;
    }
  }
  if (m >= 2) {
    for (const auto& beta : multi_indices(m - 2)) {
      LocalFunction f = interior_function(*space.solver, el, space.center, beta, m);
      f.element = space.element;
      space.basis.push_back(std::move(f));
      ++space.interior_count;
    }
  }
  return space;
}

void write_grid_csv(std::ostream& out, const LocalFunction& f, const Element& el, int nx, int ny) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("write_grid_csv: need at least 2 samples per axis");
  Eigen::AlignedBox2d box;
  for (const auto& e : el.edges()) {
    for (int k = 0; k <= 64; ++k) box.extend(e.point(k / 64.0));
  }
  const double tol = 1e-9 * el.diameter();
  char buf[96];
  out << "x,y,value\n";
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Point2 x(box.min().x() + (box.max().x() - box.min().x()) * i / (nx - 1),
                     box.min().y() + (box.max().y() - box.min().y()) * j / (ny - 1));
      if (!contains(el, x) || distance_to_boundary(el, x) < tol) continue;
      std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.12g\n", x.x(), x.y(), eval_local(f, x).value);
      out << buf;
    }
  }
}

}  // namespace nyfem
