#pragma once

#include "nyfem/mesh.hpp"
#include "nyfem/poisson_space.hpp"

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace nyfem {

/// Function to interpolate. The gradient is needed for H1 errors and the
/// Hessian for the H2 seminorm; either may be left empty.
struct Target {
  std::function<double(const Point2&)> value;
  std::function<Vec2(const Point2&)> gradient;
  std::function<Eigen::Matrix2d(const Point2&)> hessian;
  std::string name;
};

/// Trace interpolant on one edge: endpoint values plus either bubble
/// coefficients c_2..c_m or, for cartesian traces, the interior nodal values.
struct EdgeCoefficients {
  double start_value = 0.0;
  double end_value = 0.0;
  std::vector<double> interior;
  bool nodal = false;

  /// Same trace seen from the other end of the edge.
  EdgeCoefficients reversed() const;
};

inline constexpr int kEdgeMomentPoints = 32;

/// Edge part of the interpolant: vertex values, then moments against
/// polynomials of degree m-2 (Legendre test functions, Gauss quadrature).
/// `endpoint_values` replaces g at the two ends when given.
EdgeCoefficients interpolate_edge(const std::function<double(double)>& g, const EdgeGeometry& e, int m,
                                  CurvedTrace variant = CurvedTrace::type1,
                                  std::optional<std::pair<double, double>> endpoint_values = std::nullopt);

/// interpolate_edge on every edge of an element.
std::vector<EdgeCoefficients> interpolate_edges(const BoundaryData& g, const Element& el, int m,
                                                CurvedTrace variant = CurvedTrace::type1);

/// The edge trace described by the coefficients, as a function of t.
std::function<double(double)> edge_trace(const EdgeGeometry& e, int m, CurvedTrace variant,
                                         const EdgeCoefficients& c);

struct InterpolationOptions {
  int n = 32;
  int p = kDefaultGrading;
  CurvedTrace variant = CurvedTrace::type1;
  FactorizationCache* cache = nullptr;
  /// Subdivision of the fan triangles used for the interior moment system.
  int interior_refine = 1;
  /// Geometric refinement of that rule toward the vertices.
  int vertex_grading = 0;
  /// Worker threads for mesh-wide loops; 0 uses the hardware concurrency.
  int threads = 0;
};

/// Local interpolant: edge traces, one harmonic solve, then the interior
/// moment system for m >= 2. `edges` supplies precomputed edge coefficients in
/// the element's own orientation.
LocalFunction interpolate_local(const Target& v, const Element& el, int m, const InterpolationOptions& opt = {},
                                const std::vector<EdgeCoefficients>* edges = nullptr);

/// Interpolant in the affine space with Dirichlet data g on the marked edges.
/// Unmarked edges must be straight.
LocalFunction interpolate_dirichlet(const Element& el, const std::vector<bool>& dirichlet_edges, const BoundaryData& g,
                                    const Target& v, int m, const InterpolationOptions& opt = {});

/// Interior moment matrix int phi_beta p_beta' and its gradient form
/// -int grad phi_beta . grad phi_beta', both by interior quadrature.
struct InteriorSystem {
  Eigen::MatrixXd moments;
  Eigen::MatrixXd gram;
  std::vector<LocalFunction> functions;
  double condition = 0.0;
};

InteriorSystem interior_system(const Element& el, int m, const InterpolationOptions& opt = {});

struct ErrorReport {
  double l2_abs = 0.0;
  double l2_rel = 0.0;
  double h1_abs = std::numeric_limits<double>::quiet_NaN();
  double h1_rel = std::numeric_limits<double>::quiet_NaN();
  double l2_norm = 0.0;
  double h1_norm = std::numeric_limits<double>::quiet_NaN();
  /// |v|_{H^2}, when the target has a Hessian.
  double h2_norm = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> cell_l2_sq;
  std::vector<double> cell_h1_sq;
  std::size_t dof = 0;
  double h_max = 0.0;
};

/// Squared error integrals on one element; adds into `report` (call finish()).
void accumulate_errors(const Target& v, const LocalFunction& f, const Element& el, int refine, ErrorReport& report);

/// Turns accumulated squares into norms and relative errors.
void finish_errors(ErrorReport& report);

/// L2 and H1-seminorm errors of a local interpolant.
ErrorReport error_norms(const Target& v, const LocalFunction& f, const Element& el, int refine = 2);

struct MeshInterpolant {
  int m = 1;
  std::vector<LocalFunction> cells;
  std::vector<EdgeCoefficients> edges;
  std::size_t dof = 0;
};

/// Interpolates on every cell. Edge coefficients are computed once per mesh
/// edge in its global orientation (lower vertex id first) and handed to both
/// neighbors.
MeshInterpolant interpolate_mesh(const Target& v, const Mesh& mesh, int m, const InterpolationOptions& opt = {});

/// Mesh-wide errors; cells are processed on `threads` workers (0: hardware
/// concurrency) and summed in cell order.
ErrorReport error_norms(const Target& v, const MeshInterpolant& interp, const Mesh& mesh, int refine = 2,
                        int threads = 0);

}  // namespace nyfem
