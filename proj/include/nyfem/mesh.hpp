#pragma once

#include "nyfem/geometry.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nyfem {

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cell description: vertex ids in counter-clockwise order and optional edge
/// geometry (empty means all edges straight).
struct Cell {
  std::vector<std::size_t> vertices;
  std::vector<EdgeGeometry> edges;
};

/// Globally oriented edge, v0 < v1.
struct MeshEdge {
  std::size_t v0 = 0;
  std::size_t v1 = 0;
  /// (cell, local side) incidences.
  std::vector<std::pair<std::size_t, std::size_t>> cells;

  bool boundary() const { return cells.size() == 1; }
};

class Mesh {
 public:
  Mesh(std::vector<Point2> vertices, std::vector<Cell> cells, std::string id = {});

  const std::string& id() const { return id_; }
  const std::vector<Point2>& vertices() const { return vertices_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<Element>& elements() const { return elements_; }
  const Element& element(std::size_t c) const { return elements_.at(c); }
  const std::vector<MeshEdge>& edges() const { return edges_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t num_cells() const { return cells_.size(); }

  /// Global edge id of local side s of cell c.
  std::size_t cell_edge(std::size_t c, std::size_t s) const { return cell_edges_.at(c).at(s); }
  /// True when cell c traverses its side s from the higher to the lower vertex id.
  bool side_reversed(std::size_t c, std::size_t s) const;
  std::vector<bool> boundary_vertices() const;

  double h_max() const;
  /// V - E + F; 1 for a simply connected mesh.
  long euler_characteristic() const;

 private:
  std::string id_;
  std::vector<Point2> vertices_;
  std::vector<Cell> cells_;
  std::vector<Element> elements_;
  std::vector<MeshEdge> edges_;
  std::vector<std::vector<std::size_t>> cell_edges_;
};

/// Global enumeration: vertex dofs first, then m-1 moment dofs per edge, then
/// C(m,2) interior dofs per cell.
struct DofMap {
  int m = 1;
  std::size_t num_vertices = 0;
  std::size_t num_edges = 0;
  std::size_t num_cells = 0;
  std::size_t per_edge = 0;
  std::size_t per_cell = 0;

  std::size_t vertex_dof(std::size_t v) const { return v; }
  std::size_t edge_dof(std::size_t e, std::size_t k) const { return num_vertices + e * per_edge + k; }
  std::size_t cell_dof(std::size_t c, std::size_t k) const {
    return num_vertices + num_edges * per_edge + c * per_cell + k;
  }
  std::size_t dim() const { return num_vertices + num_edges * per_edge + num_cells * per_cell; }
};

DofMap dof_map(const Mesh& mesh, int m);

/// Uniform kx-by-ky squares (rectangles) on [x0,x1] x [y0,y1].
Mesh rectangle_grid(double x0, double y0, double x1, double y1, std::size_t kx, std::size_t ky, std::string id = {});

/// Unit square split into (base * 2^level)^2 squares.
Mesh square_mesh_family(int level, std::size_t base = 4);

enum class LShapeVariant { with_L_element, all_squares };

/// Squares per unit length k for the all-squares mesh whose vertex count
/// (k+1)(3k+1) is closest to (2n+1)(12n+1)+1.
std::size_t closest_square_count(int n);

/// Meshes of (-1,1)^2 minus [0,1]^2. with_L_element: one L-shaped cell
/// (-1/3,1/3)^2 minus [0,1/3]^2 carrying the neighbors' vertices on its outer
/// sides, plus 24 n^2 squares of side 1/(3n). all_squares: squares of side
/// 1/k with k from closest_square_count(n), or `k_override` when nonzero.
Mesh lshape_family(int n, LShapeVariant variant, std::size_t k_override = 0);

/// Cell with corners (0,0), (h,0), (h,h), (0,h) whose bottom side is the
/// curve x2 = (h/4) sin(2 pi x1 / h).
Element curved_element(double h);

}  // namespace nyfem
