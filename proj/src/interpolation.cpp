#include "nyfem/interpolation.hpp"

#include "nyfem/gauss.hpp"
#include "nyfem/quadrature.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nyfem {

EdgeCoefficients EdgeCoefficients::reversed() const {
  EdgeCoefficients r = *this;
  std::swap(r.start_value, r.end_value);
  if (nodal) {
    std::reverse(r.interior.begin(), r.interior.end());
  } else {
    // b_j(1 - s) = (-1)^j b_j(s) and interior[k] holds c_{k+2}.
    for (std::size_t k = 1; k < r.interior.size(); k += 2) r.interior[k] = -r.interior[k];
  }
  return r;
}

EdgeCoefficients interpolate_edge(const std::function<double(double)>& g, const EdgeGeometry& e, int m,
                                  CurvedTrace variant, std::optional<std::pair<double, double>> endpoint_values) {
  if (m < 1) throw std::invalid_argument("interpolate_edge: m must be >= 1");
  EdgeCoefficients c;
  if (endpoint_values) {
    c.start_value = endpoint_values->first;
    c.end_value = endpoint_values->second;
  } else {
    c.start_value = g(0.0);
    c.end_value = g(1.0);
  }
  if (m == 1) return c;

  if (!e.is_straight() && variant == CurvedTrace::type2) {
    const int K = (m + 2) * (m + 1) / 2;
    c.nodal = true;
    for (int k = 1; k + 1 < K; ++k) c.interior.push_back(g(edge_param_at_fraction(e, static_cast<double>(k) / (K - 1))));
    return c;
  }

  const int size = m - 1;
  const double len = e.length();
  const GaussRule& gr = gauss_legendre(kEdgeMomentPoints);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
  for (std::size_t q = 0; q < gr.nodes.size(); ++q) {
    const double xi = gr.nodes[q];
    const double s = 0.5 * (1.0 - xi);
    const double r = g(edge_param_at_fraction(e, s)) - c.start_value * (1.0 - s) - c.end_value * s;
    const auto L = legendre_values(size - 1, xi);
    for (int i = 0; i < size; ++i) rhs(i) += 0.5 * len * gr.weights[q] * r * L[i];
  }
  // int_e b_j L_i ds is nonzero only for i = j and i = j - 2.
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(size, size);
  for (int j = 2; j <= m; ++j) {
    const int col = j - 2;
    if (j <= m - 2) B(j, col) = len / ((2.0 * j + 1.0) * (2.0 * j - 1.0));
    B(col, col) = -len / ((2.0 * col + 1.0) * (2.0 * j - 1.0));
  }
  const Eigen::VectorXd sol = B.triangularView<Eigen::Lower>().solve(rhs);
  c.interior.assign(sol.data(), sol.data() + size);
  return c;
}

std::vector<EdgeCoefficients> interpolate_edges(const BoundaryData& g, const Element& el, int m, CurvedTrace variant) {
  std::vector<EdgeCoefficients> out;
  for (std::size_t e = 0; e < el.size(); ++e) {
    const EdgeGeometry& edge = el.edge(e);
    out.push_back(interpolate_edge([&](double t) { return g({e, t, edge.point(t)}); }, edge, m, variant));
  }
  return out;
}

std::function<double(double)> edge_trace(const EdgeGeometry& e, int m, CurvedTrace variant, const EdgeCoefficients& c) {
  auto basis = edge_basis(e, 0, m, variant);
  if (basis.size() != c.interior.size() + 2) throw std::invalid_argument("edge_trace: coefficient count mismatch");
  return [basis = std::move(basis), c](double t) {
    double s = c.start_value * basis[0](t) + c.end_value * basis[1](t);
    for (std::size_t k = 0; k < c.interior.size(); ++k) s += c.interior[k] * basis[k + 2](t);
    return s;
  };
}

namespace {

Eigen::VectorXd monomial_values(const std::vector<Poly2::Exponent>& betas, const Point2& center, const Point2& x) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(betas.size()));
  for (std::size_t b = 0; b < betas.size(); ++b) {
    out(static_cast<Eigen::Index>(b)) =
        std::pow(x.x() - center.x(), betas[b].first) * std::pow(x.y() - center.y(), betas[b].second);
  }
  return out;
}

std::vector<LocalFunction> interior_functions(const NystromSolver& solver, const Element& el,
                                              const std::shared_ptr<const Element>& el_ptr, const Point2& center,
                                              int m) {
  std::vector<LocalFunction> out;
  for (const auto& beta : multi_indices(m - 2)) {
    out.push_back(interior_function(solver, el, center, beta, m));
    out.back().element = el_ptr;
  }
  return out;
}

// Adds the interior part to a function holding the boundary interpolant.
void add_interior(LocalFunction& f, const Target& v, const Element& el, int m, const NystromSolver& solver,
                  const InterpolationOptions& opt) {
  const Point2 center = monomial_center(el);
  const auto betas = multi_indices(m - 2);
  const auto phis = interior_functions(solver, el, f.element, center, m);
  const auto B = static_cast<Eigen::Index>(phis.size());
  const InteriorRule Q = interior_rule(el, opt.interior_refine, 16, opt.vertex_grading);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(B, B);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(B);
  Eigen::VectorXd phi_vals(B);
  for (const auto& q : Q.nodes) {
    const Eigen::VectorXd p = monomial_values(betas, center, q.x);
    for (Eigen::Index b = 0; b < B; ++b) phi_vals(b) = eval_local(phis[b], q.x).value;
    const double r = v.value(q.x) - eval_local(f, q.x).value;
    A.noalias() += q.w * p * phi_vals.transpose();
    rhs += q.w * r * p;
  }
  const Eigen::VectorXd c = A.partialPivLu().solve(rhs);

  HarmonicSolution& h = *f.harmonic;
  std::vector<BoundaryData> traces{f.trace};
  for (Eigen::Index b = 0; b < B; ++b) {
    f.poly += c(b) * phis[b].poly;
    h.phi += c(b) * phis[b].harmonic->phi;
    h.g_at_nodes += c(b) * phis[b].harmonic->g_at_nodes;
    h.residual = std::max(h.residual, std::abs(c(b)) * phis[b].harmonic->residual);
    BoundaryData scaled = phis[b].trace;
    const double cb = c(b);
    scaled.value = [g = phis[b].trace.value, cb](const BoundaryPoint& bp) { return cb * g(bp); };
    traces.push_back(std::move(scaled));
  }
  f.trace.value = [traces](const BoundaryPoint& bp) {
    double s = 0.0;
    for (const auto& t : traces) s += t(bp);
    return s;
  };
  f.trace.tangential = nullptr;
}

LocalFunction boundary_interpolant(std::vector<std::function<double(double)>> per_edge, const Element& el, int m,
                                   const NystromSolver& solver) {
  LocalFunction f;
  f.trace = edgewise_data(std::move(per_edge));
  f.harmonic = solver.solve(f.trace);
  f.element = std::make_shared<const Element>(el);
  f.label = el.label();
  f.m = m;
  return f;
}

}  // namespace

LocalFunction interpolate_local(const Target& v, const Element& el, int m, const InterpolationOptions& opt,
                                const std::vector<EdgeCoefficients>* edges) {
  if (m < 1) throw std::invalid_argument("interpolate_local: m must be >= 1");
  const NystromSolver solver(el, opt.n, opt.p, opt.cache);
  std::vector<EdgeCoefficients> own;
  if (!edges) {
    own = interpolate_edges(BoundaryData::from_function(v.value), el, m, opt.variant);
    edges = &own;
  }
  if (edges->size() != el.size()) throw std::invalid_argument("interpolate_local: one coefficient set per edge expected");
  std::vector<std::function<double(double)>> per_edge;
  for (std::size_t e = 0; e < el.size(); ++e) per_edge.push_back(edge_trace(el.edge(e), m, opt.variant, (*edges)[e]));
  LocalFunction f = boundary_interpolant(std::move(per_edge), el, m, solver);
  if (m >= 2) add_interior(f, v, el, m, solver, opt);
  return f;
}

LocalFunction interpolate_dirichlet(const Element& el, const std::vector<bool>& dirichlet_edges, const BoundaryData& g,
                                    const Target& v, int m, const InterpolationOptions& opt) {
  const std::size_t N = el.size();
  if (dirichlet_edges.size() != N) throw std::invalid_argument("interpolate_dirichlet: one marker per edge expected");
  if (std::none_of(dirichlet_edges.begin(), dirichlet_edges.end(), [](bool b) { return b; })) {
    throw std::invalid_argument("interpolate_dirichlet: no Dirichlet edge marked");
  }
  auto marked = [&](std::size_t e) { return static_cast<bool>(dirichlet_edges[e % N]); };
  auto on_dirichlet = [&](std::size_t vtx) { return marked(vtx) || marked(vtx + N - 1); };
  auto g_vertex = [&](std::size_t vtx) {
    vtx %= N;
    if (marked(vtx)) return g({vtx, 0.0, el.vertex(vtx)});
    if (marked(vtx + N - 1)) return g({(vtx + N - 1) % N, 1.0, el.vertex(vtx)});
    return 0.0;
  };

  std::vector<std::function<double(double)>> per_edge(N);
  for (std::size_t e = 0; e < N; ++e) {
    const EdgeGeometry& edge = el.edge(e);
    if (marked(e)) {
      per_edge[e] = [g, e, edge](double t) { return g({e, t, edge.point(t)}); };
      continue;
    }
    if (!edge.is_straight()) throw std::invalid_argument("interpolate_dirichlet: curved edges must be Dirichlet edges");
    const double a = g_vertex(e);
    const double b = g_vertex(e + 1);
    auto g_lin = [a, b](double t) { return a * (1.0 - t) + b * t; };
    const double wa = on_dirichlet(e) ? 0.0 : v.value(edge.start()) - a;
    const double wb = on_dirichlet(e + 1) ? 0.0 : v.value(edge.end()) - b;
    const auto w = interpolate_edge([&](double t) { return v.value(edge.point(t)) - g_lin(t); }, edge, m, opt.variant,
                                    std::pair{wa, wb});
    per_edge[e] = [g_lin, wt = edge_trace(edge, m, opt.variant, w)](double t) { return g_lin(t) + wt(t); };
  }
  const NystromSolver solver(el, opt.n, opt.p, opt.cache);
  LocalFunction f = boundary_interpolant(std::move(per_edge), el, m, solver);
  if (m >= 2) add_interior(f, v, el, m, solver, opt);
  return f;
}

InteriorSystem interior_system(const Element& el, int m, const InterpolationOptions& opt) {
  if (m < 2) throw std::invalid_argument("interior_system: needs m >= 2");
  const NystromSolver solver(el, opt.n, opt.p, opt.cache);
  const Point2 center = monomial_center(el);
  const auto betas = multi_indices(m - 2);
  InteriorSystem sys;
  sys.functions = interior_functions(solver, el, std::make_shared<const Element>(el), center, m);
  const auto B = static_cast<Eigen::Index>(betas.size());
  sys.moments = Eigen::MatrixXd::Zero(B, B);
  sys.gram = Eigen::MatrixXd::Zero(B, B);
  const InteriorRule Q = interior_rule(el, opt.interior_refine, 16, opt.vertex_grading);
  Eigen::VectorXd vals(B);
  Eigen::MatrixXd grads(2, B);
  for (const auto& q : Q.nodes) {
    const Eigen::VectorXd p = monomial_values(betas, center, q.x);
    for (Eigen::Index b = 0; b < B; ++b) {
      const LocalValue lv = eval_local(sys.functions[b], q.x, true);
      vals(b) = lv.value;
      grads.col(b) = lv.gradient;
    }
    sys.moments.noalias() += q.w * p * vals.transpose();
    sys.gram.noalias() -= q.w * grads.transpose() * grads;
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.moments);
  sys.condition = 1.0 / lu.rcond();
  return sys;
}

void accumulate_errors(const Target& v, const LocalFunction& f, const Element& el, int refine, ErrorReport& report) {
  const bool grad = static_cast<bool>(v.gradient);
  const bool hess = static_cast<bool>(v.hessian);
  const InteriorRule Q = interior_rule(el, refine);
  double l2 = 0.0, h1 = 0.0, nl2 = 0.0, nh1 = 0.0, nh2 = 0.0;
  for (const auto& q : Q.nodes) {
    const LocalValue lv = eval_local(f, q.x, grad);
    const double vx = v.value(q.x);
    l2 += q.w * (vx - lv.value) * (vx - lv.value);
    nl2 += q.w * vx * vx;
    if (grad) {
      const Vec2 gv = v.gradient(q.x);
      h1 += q.w * (gv - lv.gradient).squaredNorm();
      nh1 += q.w * gv.squaredNorm();
    }
    if (hess) nh2 += q.w * v.hessian(q.x).squaredNorm();
  }
  // Running sums of squares live in the norm fields until finish_errors().
  report.l2_abs += l2;
  report.l2_norm += nl2;
  report.cell_l2_sq.push_back(l2);
  if (grad) {
    report.h1_abs = (std::isnan(report.h1_abs) ? 0.0 : report.h1_abs) + h1;
    report.h1_norm = (std::isnan(report.h1_norm) ? 0.0 : report.h1_norm) + nh1;
    report.cell_h1_sq.push_back(h1);
  }
  if (hess) report.h2_norm = (std::isnan(report.h2_norm) ? 0.0 : report.h2_norm) + nh2;
  report.h_max = std::max(report.h_max, el.diameter());
}

void finish_errors(ErrorReport& r) {
  r.l2_abs = std::sqrt(r.l2_abs);
  r.l2_norm = std::sqrt(r.l2_norm);
  r.l2_rel = r.l2_abs / r.l2_norm;
  r.h1_abs = std::sqrt(r.h1_abs);
  r.h1_norm = std::sqrt(r.h1_norm);
  r.h1_rel = r.h1_abs / r.h1_norm;
  r.h2_norm = std::sqrt(r.h2_norm);
}

ErrorReport error_norms(const Target& v, const LocalFunction& f, const Element& el, int refine) {
  ErrorReport r;
  accumulate_errors(v, f, el, refine, r);
  finish_errors(r);
  return r;
}

MeshInterpolant interpolate_mesh(const Target& v, const Mesh& mesh, int m, const InterpolationOptions& opt) {
  MeshInterpolant out;
  out.m = m;
  const auto& V = mesh.vertices();
  for (const auto& edge : mesh.edges()) {
    const auto [c, s] = edge.cells.front();
    const EdgeGeometry& local = mesh.element(c).edge(s);
    const std::pair ends{v.value(V[edge.v0]), v.value(V[edge.v1])};
    if (local.is_straight()) {
      const EdgeGeometry global = EdgeGeometry::straight(V[edge.v0], V[edge.v1]);
      out.edges.push_back(interpolate_edge([&](double t) { return v.value(global.point(t)); }, global, m, opt.variant, ends));
    } else {
      const bool rev = mesh.side_reversed(c, s);
      const auto coeffs = interpolate_edge([&](double t) { return v.value(local.point(t)); }, local, m, opt.variant,
                                           rev ? std::pair{ends.second, ends.first} : ends);
      out.edges.push_back(rev ? coeffs.reversed() : coeffs);
    }
  }
  out.cells.resize(mesh.num_cells());
  detail::parallel_for(mesh.num_cells(), opt.threads, [&](std::size_t c) {
    const Element& el = mesh.element(c);
    std::vector<EdgeCoefficients> local;
    for (std::size_t s = 0; s < el.size(); ++s) {
      const auto& g = out.edges[mesh.cell_edge(c, s)];
      local.push_back(mesh.side_reversed(c, s) ? g.reversed() : g);
    }
    out.cells[c] = interpolate_local(v, el, m, opt, &local);
  });
  out.dof = dof_map(mesh, m).dim();
  return out;
}

ErrorReport error_norms(const Target& v, const MeshInterpolant& interp, const Mesh& mesh, int refine, int threads) {
  std::vector<ErrorReport> cells(mesh.num_cells());
  detail::parallel_for(mesh.num_cells(), threads, [&](std::size_t c) {
    accumulate_errors(v, interp.cells[c], mesh.element(c), refine, cells[c]);
  });
  // Summed in cell order so the result does not depend on scheduling.
  ErrorReport r;
  for (const auto& cell : cells) {
    r.l2_abs += cell.l2_abs;
    r.l2_norm += cell.l2_norm;
    r.cell_l2_sq.push_back(cell.l2_abs);
    if (!std::isnan(cell.h1_abs)) {
      r.h1_abs = (std::isnan(r.h1_abs) ? 0.0 : r.h1_abs) + cell.h1_abs;
      r.h1_norm = (std::isnan(r.h1_norm) ? 0.0 : r.h1_norm) + cell.h1_norm;
      r.cell_h1_sq.push_back(cell.h1_abs);
    }
    if (!std::isnan(cell.h2_norm)) r.h2_norm = (std::isnan(r.h2_norm) ? 0.0 : r.h2_norm) + cell.h2_norm;
    r.h_max = std::max(r.h_max, cell.h_max);
  }
  finish_errors(r);
  r.dof = interp.dof;
  return r;
}

}  // namespace nyfem
