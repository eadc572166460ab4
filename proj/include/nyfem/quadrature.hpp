#pragma once

#include "nyfem/geometry.hpp"

#include <array>
#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace nyfem {

inline constexpr int kDefaultGrading = 6;

struct SigmoidValue {
  double eta = 0.0;
  double eta_prime = 0.0;
};

/// Kress sigmoidal change of variables on [0,1]; eta has roots of order p at
/// both ends.
SigmoidValue sigmoid(double tau, int p);

/// One Nystrom node. Vertex nodes carry weight 0 and exist so the density can
/// be sampled at corners.
struct KressNode {
  Point2 x;
  /// Nearest edge endpoint and the offset x - anchor, kept separately so that
  /// differences between nodes crowded at a corner stay accurate.
  Point2 anchor;
  Vec2 offset;
  Vec2 normal;
  double weight = 0.0;
  double curvature = 0.0;
  std::size_t edge = 0;
  /// Edge parameter eta(k/n).
  double t = 0.0;
  bool is_vertex = false;
  /// Index of the vertex node nearest along the boundary.
  std::size_t nearest_vertex = 0;
};

inline constexpr int kStencilSize = 8;

/// Lagrange weights that interpolate edge-nodal values k = first..first+size-1
/// (k = n being the next edge's vertex) at a parameter tau.
struct Stencil {
  int first = 0;
  int size = 0;
  std::array<double, kStencilSize> weights{};
};

Stencil density_stencil(double tau, int n);

/// Gauss point of one cell [k/n, (k+1)/n] of an edge. The node weight includes
/// the Gauss weight and the cell length.
struct PanelPoint {
  KressNode node;
  Stencil stencil;
};

inline constexpr int kPanelCoarsePoints = 8;
inline constexpr int kPanelFinePoints = 16;

/// Graded trapezoid rule on every edge of an element, n nodes per edge
/// (node k = 0 is the edge's start vertex).
struct KressRule {
  int p = kDefaultGrading;
  int n = 0;
  std::size_t num_edges = 0;
  std::vector<KressNode> nodes;
  std::vector<bool> straight_edges;
  /// Edge geometry, kept for refined evaluation near the boundary.
  std::vector<EdgeGeometry> edges;
  std::string label;

  std::size_t size() const { return nodes.size(); }
  std::size_t vertex_node(std::size_t vertex) const { return vertex * static_cast<std::size_t>(n); }
  /// x_i - x_j using the anchored representation.
  Vec2 difference(std::size_t i, std::size_t j) const;
  /// True when nodes i and j lie on a common straight edge.
  bool share_straight_edge(std::size_t i, std::size_t j) const;

  /// Gauss points of every cell, built on first use: for cell k of edge e,
  /// kPanelCoarsePoints then kPanelFinePoints entries starting at
  /// (e n + k)(kPanelCoarsePoints + kPanelFinePoints).
  const std::vector<PanelPoint>& panel_points() const;

 private:
  struct PanelCache {
    std::once_flag once;
    std::vector<PanelPoint> points;
  };
  std::shared_ptr<PanelCache> panels_ = std::make_shared<PanelCache>();
};

KressRule kress_rule(const Element& el, int n, int p = kDefaultGrading);

/// Graded point at tau in (0,1) on one edge. The weight is eta'(tau)|x'|,
/// i.e. per unit tau; divide by the number of subdivisions.
KressNode kress_point(const EdgeGeometry& e, std::size_t edge, double tau, int p);

struct QuadPoint {
  Point2 x;
  double w = 0.0;
};

/// Quadrature over the element interior.
struct InteriorRule {
  std::vector<QuadPoint> nodes;
  Point2 center;
  std::string label;

  double sum_weights() const;
};

/// Fan rule: triangles from a center to each straight edge with the 7-point
/// degree-5 Gauss rule; curved edges become polar patches c + u (x(t) - c) with
/// a tensor Gauss rule. The center is the centroid when the element is
/// star-shaped with respect to it, otherwise the star center.
/// `refine` splits every fan triangle uniformly into refine^2 sub-triangles.
/// With `vertex_grading` > 0 the fan triangles of straight edges are first
/// halved that many times toward both of their element vertices, and every
/// piece is then refined uniformly.
InteriorRule interior_rule(const Element& el, int refine = 1, int curved_points = 16, int vertex_grading = 0);

/// 7-point degree-5 rule on a triangle.
void append_triangle_rule(const Point2& a, const Point2& b, const Point2& c, std::vector<QuadPoint>& out);

}  // namespace nyfem
