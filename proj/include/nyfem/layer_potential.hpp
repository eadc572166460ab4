#pragma once

#include "nyfem/geometry.hpp"
#include "nyfem/quadrature.hpp"

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

namespace nyfem {

/// Raised for evaluation points outside the element or on its boundary.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the Nystrom matrix is numerically singular.
class IllConditionedError : public std::runtime_error {
 public:
  explicit IllConditionedError(double estimate);
  double condition_estimate() const { return estimate_; }

 private:
  double estimate_;
};

/// A point on the boundary in both intrinsic (edge, t) and Cartesian form.
struct BoundaryPoint {
  std::size_t edge = 0;
  double t = 0.0;
  Point2 x;
};

/// Dirichlet data on the element boundary.
struct BoundaryData {
  std::function<double(const BoundaryPoint&)> value;
  /// Derivative with respect to arc length along the edge direction, if known.
  std::function<double(const BoundaryPoint&)> tangential;

  double operator()(const BoundaryPoint& b) const { return value(b); }

  /// Trace of a function defined on the plane.
  static BoundaryData from_function(std::function<double(const Point2&)> f);
  static BoundaryData constant(double c);
};

/// Largest mismatch of g between the two edges meeting at each vertex.
double vertex_continuity_defect(const Element& el, const BoundaryData& g);

/// F(x, y) = -(x - y) . n(y) / (2 pi |x - y|^2).
double double_layer_kernel(const Point2& x, const Point2& y, const Vec2& n_y);
/// Limit of F(x, y) as x -> y along a smooth edge with signed curvature kappa.
double double_layer_diagonal(double curvature);
/// Gradient of F with respect to x.
Vec2 kernel_gradient(const Point2& x, const Point2& y, const Vec2& n_y);

/// Vertex node nearest (along the boundary) to a node; ties at an exact edge
/// midpoint resolve to the edge's start vertex.
std::size_t nearest_vertex(const KressRule& rule, std::size_t node_index);

/// Density of the corner-subtracted second-kind equation together with the
/// rule it lives on.
struct HarmonicSolution {
  std::shared_ptr<const KressRule> rule;
  Eigen::VectorXd phi;
  Eigen::VectorXd g_at_nodes;
  std::string label;
  double residual = 0.0;
};

/// Assembled and factorized Nystrom matrix. Depends only on the shape of the
/// element up to translation and scaling.
class NystromFactorization {
 public:
  explicit NystromFactorization(const KressRule& rule);

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  double condition_estimate() const { return condition_; }
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return lu_.solve(rhs); }

 private:
  Eigen::MatrixXd matrix_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double condition_ = 0.0;
};

/// Shares factorizations between congruent (translated/scaled) elements.
class FactorizationCache {
 public:
  std::shared_ptr<const NystromFactorization> get(const Element& el, const KressRule& rule);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const NystromFactorization>> entries_;
};

inline constexpr double kMaxCondition = 1e12;

/// Nystrom solver bound to one element: one factorization, many right-hand sides.
class NystromSolver {
 public:
  NystromSolver(const Element& el, int n, int p = kDefaultGrading, FactorizationCache* cache = nullptr);

  const KressRule& rule() const { return *rule_; }
  std::shared_ptr<const KressRule> shared_rule() const { return rule_; }
  const NystromFactorization& factorization() const { return *factorization_; }

  /// Samples g at the nodes and solves.
  HarmonicSolution solve(const BoundaryData& g) const;
  HarmonicSolution solve_values(const Eigen::VectorXd& g_at_nodes) const;
  Eigen::VectorXd sample(const BoundaryData& g) const;

  /// Plain-text dense dump, one matrix row per line.
  void write_matrix(std::ostream& out) const;

 private:
  std::shared_ptr<const KressRule> rule_;
  std::shared_ptr<const NystromFactorization> factorization_;
  std::string label_;
};

HarmonicSolution solve_dirichlet(const Element& el, const BoundaryData& g, int n, int p = kDefaultGrading);

/// sum_j F(x, x_j) w_j; tends to 1 inside the element and 0 outside.
double gauss_integral(const KressRule& rule, const Point2& x);

/// Vertex subtraction is used when the nearest vertex is within this factor of
/// the nearest node.
inline constexpr double kVertexSubtractionRatio = 1.5;

/// Edges closer than this many node spacings are integrated cell by cell with
/// Gauss panels (bisected at most kMaxPanelDepth times), the density being
/// interpolated by local polynomials in the grading parameter.
inline constexpr double kCloseRatio = 5.0;
inline constexpr int kMaxPanelDepth = 40;

/// Value of the double-layer representation at an interior point, evaluated in
/// density-subtracted form.
double eval(const HarmonicSolution& sol, const Point2& x);
Vec2 eval_gradient(const HarmonicSolution& sol, const Point2& x);

/// True when x is closer to the boundary than two local node spacings, where
/// the evaluation formula loses accuracy.
bool near_boundary(const KressRule& rule, const Point2& x);

/// Fitted exponent gamma in phi(x) - phi(z) ~ |x - z|^gamma from the nodes on
/// both sides of a vertex. Diagnostic only.
std::optional<double> fit_corner_exponent(const HarmonicSolution& sol, std::size_t vertex,
                                          double r_min, double r_max);

}  // namespace nyfem
