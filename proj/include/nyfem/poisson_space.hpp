#pragma once

#include "nyfem/geometry.hpp"
#include "nyfem/layer_potential.hpp"

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nyfem {

/// Polynomial in translated monomials (x - c)^a (y - c)^b.
class Poly2 {
 public:
  using Exponent = std::pair<int, int>;

  Poly2() = default;
  explicit Poly2(const Point2& center) : center_(center) {}
  static Poly2 monomial(const Point2& center, int a, int b, double coeff = 1.0);

  const Point2& center() const { return center_; }
  const std::map<Exponent, double>& terms() const { return terms_; }
  double coefficient(int a, int b) const;
  void add_term(int a, int b, double coeff);

  /// Total degree; -1 for the zero polynomial.
  int degree() const;
  bool is_zero() const { return terms_.empty(); }

  Poly2 homogeneous_part(int degree) const;
  Poly2 derivative(int axis) const;
  Poly2 laplacian() const;
  /// Product with |x - c|^2.
  Poly2 times_r2() const;

  double operator()(const Point2& x) const;
  Vec2 gradient(const Point2& x) const;
  Eigen::Matrix2d hessian(const Point2& x) const;

  Poly2& operator+=(const Poly2& other);
  Poly2& operator-=(const Poly2& other);
  Poly2& operator*=(double s);

  friend Poly2 operator+(Poly2 a, const Poly2& b) { return a += b; }
  friend Poly2 operator-(Poly2 a, const Poly2& b) { return a -= b; }
  friend Poly2 operator*(double s, Poly2 a) { return a *= s; }
  friend Poly2 operator*(Poly2 a, double s) { return a *= s; }

 private:
  void prune();

  Point2 center_ = Point2::Zero();
  std::map<Exponent, double> terms_;
};

/// q with Laplacian(q) = p, built per homogeneous part of p by the
/// Karachik-Antropova formula in two dimensions.
Poly2 particular_solution(const Poly2& p);

/// Integrated Legendre polynomial (L_j - L_{j-2}) / (2j - 1) and its
/// derivative L_{j-1}.
std::pair<double, double> integrated_legendre(int j, double t);

/// How polynomial traces are understood on a curved edge: in arc length
/// (type1) or as restrictions of bivariate polynomials (type2).
enum class CurvedTrace { type1, type2 };

enum class TraceRole { vertex, edge };
enum class TraceKind { vertex_hat, bubble, arc_poly, cart_poly };

/// One trace function living on a single edge, as a function of the edge
/// parameter t in [0, 1].
struct EdgeTrace {
  std::size_t edge = 0;
  TraceKind kind = TraceKind::vertex_hat;
  TraceRole role = TraceRole::vertex;
  /// Bubble order j, or nodal index for cartesian traces.
  int index = 0;
  /// For vertex roles: true at the start vertex.
  bool at_start = true;
  std::function<double(double)> value;
  /// Set for cartesian traces.
  std::optional<Poly2> poly;

  double operator()(double t) const { return value(t); }
};

/// Normalized arc length s(t) in [0,1] along an edge, and its inverse.
double edge_arc_fraction(const EdgeGeometry& e, double t);
double edge_param_at_fraction(const EdgeGeometry& e, double s);

/// Number of edge-interior trace functions of degree m on an edge.
int edge_function_count(const EdgeGeometry& e, int m, CurvedTrace variant);

/// Trace basis on one edge: start hat, end hat, then the edge functions.
/// Straight edges and type1 curved edges get integrated Legendre bubbles in
/// (normalized arc length); type2 curved edges get nodal traces of bivariate
/// polynomials at equispaced arc-length points.
std::vector<EdgeTrace> edge_basis(const Element& el, std::size_t edge, int m, CurvedTrace variant = CurvedTrace::type1);
/// Same for a free-standing edge; `edge` only labels the result.
std::vector<EdgeTrace> edge_basis(const EdgeGeometry& e, std::size_t edge, int m, CurvedTrace variant = CurvedTrace::type1);

/// Boundary data given edge by edge as functions of the edge parameter.
BoundaryData edgewise_data(std::vector<std::function<double(double)>> per_edge);

enum class BasisRole { vertex, edge, interior, none };

/// A member of the local space: polynomial part plus harmonic part.
struct LocalFunction {
  Poly2 poly;
  std::optional<HarmonicSolution> harmonic;
  /// Dirichlet trace of the harmonic part.
  BoundaryData trace;
  /// Needed to evaluate on the boundary through the trace; may be null.
  std::shared_ptr<const Element> element;
  std::string label;
  int m = 1;
  BasisRole role = BasisRole::none;
  /// Vertex, edge or multi-index identifying a basis function.
  std::vector<int> tag;
};

struct LocalValue {
  double value = 0.0;
  Vec2 gradient = Vec2::Zero();
};

/// Value (and optionally gradient) of a local function. Boundary points are
/// evaluated through the trace; gradients need interior points.
LocalValue eval_local(const LocalFunction& f, const Point2& x, bool want_gradient = false);

/// Vertex centroid, or the star center if the element is not star-shaped
/// with respect to it.
Point2 monomial_center(const Element& el);

/// Multi-indices with |beta| <= d in graded order.
std::vector<Poly2::Exponent> multi_indices(int d);

inline int binomial2(int m) { return m * (m - 1) / 2; }

/// Interior function: q_beta plus the harmonic function with trace -q_beta.
LocalFunction interior_function(const NystromSolver& solver, const Element& el, const Point2& center,
                                Poly2::Exponent beta, int m);

struct LocalSpace {
  std::shared_ptr<const Element> element;
  std::shared_ptr<const NystromSolver> solver;
  Point2 center;
  int m = 1;
  CurvedTrace variant = CurvedTrace::type1;
  std::vector<LocalFunction> basis;
  std::size_t vertex_count = 0;
  std::size_t edge_count = 0;
  std::size_t interior_count = 0;

  std::size_t dim() const { return basis.size(); }
};

/// Local space catalog: vertex, edge and interior basis functions. Every
/// harmonic part is a Nystrom solve against one shared factorization.
LocalSpace local_basis(const Element& el, int m, int n, int p = kDefaultGrading,
                       CurvedTrace variant = CurvedTrace::type1, FactorizationCache* cache = nullptr);

/// dim V_m(K) for a straight-edged N-gon.
inline int local_dimension(int num_edges, int m) { return binomial2(m) + num_edges * m; }

/// Samples f on an nx-by-ny lattice over the bounding box of el and writes
/// the points strictly inside as CSV rows "x,y,value".
void write_grid_csv(std::ostream& out, const LocalFunction& f, const Element& el, int nx, int ny);

}  // namespace nyfem
