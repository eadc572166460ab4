#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nyfem {

using Point2 = Eigen::Vector2d;
using Vec2 = Eigen::Vector2d;

/// Thrown for malformed or unsupported geometry (slits, self-intersections, ...).
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

enum class EdgeKind { straight, circular_arc, sine, parametric };

/// Position, first and second derivative of an edge map at parameter t in [0,1].
struct EdgeSample {
  Point2 x;
  Vec2 dx;
  Vec2 ddx;
};

/// One edge of a curvilinear polygon, parametrized over t in [0,1] from its
/// start vertex to its end vertex.
///
/// Besides plain evaluation, an edge can report the offset of x(t) from either
/// endpoint without forming x(t) first. Quadrature nodes graded toward corners
/// sit within 1e-14 of a vertex, and the kernel needs their separation from the
/// vertex to full relative precision.
class EdgeGeometry {
 public:
  using CurveMap = std::function<Point2(double)>;

  static EdgeGeometry straight(const Point2& a, const Point2& b);
  /// Circular arc around `center` starting at `a`, sweeping `sweep` radians
  /// (positive = counter-clockwise).
  static EdgeGeometry arc(const Point2& a, const Point2& center, double sweep);
  /// Chord from a to b displaced by amplitude*sin(2*pi*periods*t) along the
  /// chord's left normal.
  static EdgeGeometry sine(const Point2& a, const Point2& b, double amplitude, int periods);
  /// General curve with explicit derivative maps.
  static EdgeGeometry parametric(CurveMap x, CurveMap dx, CurveMap ddx);

  EdgeKind kind() const { return kind_; }
  bool is_straight() const { return kind_ == EdgeKind::straight; }
  const Point2& start() const { return a_; }
  const Point2& end() const { return b_; }

  EdgeSample eval(double t) const;
  Point2 point(double t) const { return eval(t).x; }
  /// x(t) - start(), accurate for small t.
  Vec2 offset_from_start(double t) const;
  /// x(1 - s) - end(), accurate for small s.
  Vec2 offset_from_end(double s) const;
  /// Signed curvature (positive when turning left).
  double curvature(double t) const;

  double length() const { return arc_length(1.0); }
  /// Arc length from the start vertex to parameter t.
  double arc_length(double t) const;
  /// Parameter at which the arc length from the start equals s.
  double param_at_arc_length(double s) const;

  /// Parameter of the point of the edge closest to x, with its distance.
  std::pair<double, double> closest(const Point2& x) const;

  // Only meaningful for the matching kinds.
  const Point2& center() const { return center_; }
  double sweep() const { return sweep_; }
  double amplitude() const { return amplitude_; }
  int periods() const { return periods_; }

  /// Copy of this edge shifted by `shift` and scaled by `scale` about the origin.
  EdgeGeometry transformed(double scale, const Vec2& shift) const;

 private:
  EdgeKind kind_ = EdgeKind::straight;
  Point2 a_ = Point2::Zero();
  Point2 b_ = Point2::Zero();
  Point2 center_ = Point2::Zero();
  double radius_ = 0.0;
  double start_angle_ = 0.0;
  double sweep_ = 0.0;
  double amplitude_ = 0.0;
  int periods_ = 0;
  CurveMap x_, dx_, ddx_;
};

/// A curvilinear polygon with counter-clockwise vertex ring. Edge i joins
/// vertex i to vertex i+1.
class Element {
 public:
  Element(std::vector<Point2> vertices, std::vector<EdgeGeometry> edges, std::string label = {});

  std::size_t size() const { return vertices_.size(); }
  const std::vector<Point2>& vertices() const { return vertices_; }
  const Point2& vertex(std::size_t i) const { return vertices_[i % vertices_.size()]; }
  const std::vector<EdgeGeometry>& edges() const { return edges_; }
  const EdgeGeometry& edge(std::size_t i) const { return edges_[i % edges_.size()]; }
  const std::string& label() const { return label_; }
  bool is_straight() const;

  /// Signed area (Green's theorem along the true edges).
  double area() const;
  double perimeter() const;
  /// Center of mass.
  Point2 centroid() const;
  /// Average of the vertices.
  Point2 vertex_centroid() const;
  /// Diameter (max distance between boundary samples; exact for polygons).
  double diameter() const;

 private:
  std::vector<Point2> vertices_;
  std::vector<EdgeGeometry> edges_;
  std::string label_;
};

/// Builds a straight-edged element, flipping to counter-clockwise if needed.
Element polygon_from_vertices(std::span<const Point2> points, std::string label = {});

/// Interior angle at a vertex in units of pi, from one-sided tangents.
double interior_angle(const Element& el, std::size_t vertex_index);

struct ShapeReport {
  double h_K = 0.0;
  double h_e_min = 0.0;
  /// Absent for curved elements, or when the kernel is empty.
  std::optional<double> rho_K;
  std::optional<Point2> z_K;
  std::optional<double> sigma;
  double c = 0.0;
  bool star_shaped = true;
};

ShapeReport shape_report(const Element& el);

/// Center and radius of the largest disk inside the set of points that see
/// every boundary point of `el`. Curved edges enter through sampled tangent
/// lines. Radius is negative when that set is empty.
std::pair<Point2, double> star_center(const Element& el, int samples_per_curved_edge = 64);

/// True if every boundary point is visible from c (sampled on curved edges).
bool is_star_shaped_wrt(const Element& el, const Point2& c, double margin = 0.0);

/// Position of a boundary point: edge index, edge parameter and arc length from vertex 0.
struct BoundaryLocation {
  std::size_t edge = 0;
  double t = 0.0;
  double arc = 0.0;
};

/// Relative on-boundary tolerance, multiplied by h_K.
inline constexpr double kOnBoundaryTolerance = 1e-10;

std::optional<BoundaryLocation> locate_on_boundary(const Element& el, const Point2& x);

/// Shortest distance along the boundary between two boundary points.
double boundary_distance(const Element& el, const Point2& a, const Point2& b);

/// Minimal distance from x to the boundary.
double distance_to_boundary(const Element& el, const Point2& x);

/// Point-in-element test (winding number over densely sampled boundary).
bool contains(const Element& el, const Point2& x);

}  // namespace nyfem
