#include "nyfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <string>

namespace nyfem {

namespace {

double shoelace(const std::vector<Point2>& v, const std::vector<std::size_t>& ids) {
  double a = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i) a += cross(v[ids[i]], v[ids[(i + 1) % ids.size()]]);
  return 0.5 * a;
}

}  // namespace

Mesh::Mesh(std::vector<Point2> vertices, std::vector<Cell> cells, std::string id)
    : id_(std::move(id)), vertices_(std::move(vertices)), cells_(std::move(cells)) {
  std::vector<bool> used(vertices_.size(), false);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> lookup;
  elements_.reserve(cells_.size());
  cell_edges_.resize(cells_.size());
  for (std::size_t c = 0; c < cells_.size(); ++c) {
    Cell& cell = cells_[c];
    const std::size_t N = cell.vertices.size();
    if (N < 2 || (N < 3 && cell.edges.empty())) throw MeshError("mesh: cell " + std::to_string(c) + " has too few vertices");
    for (auto v : cell.vertices) {
      if (v >= vertices_.size()) throw MeshError("mesh: cell " + std::to_string(c) + " references a missing vertex");
      used[v] = true;
    }
    if (cell.edges.empty()) {
      if (shoelace(vertices_, cell.vertices) < 0.0) std::reverse(cell.vertices.begin(), cell.vertices.end());
      for (std::size_t i = 0; i < N; ++i) {
        cell.edges.push_back(EdgeGeometry::straight(vertices_[cell.vertices[i]], vertices_[cell.vertices[(i + 1) % N]]));
      }
    } else if (cell.edges.size() != N) {
      throw MeshError("mesh: cell " + std::to_string(c) + " has mismatched edge list");
    }
    std::vector<Point2> pts;
    for (auto v : cell.vertices) pts.push_back(vertices_[v]);
    try {
      elements_.emplace_back(std::move(pts), cell.edges, id_ + "#" + std::to_string(c));
    } catch (const GeometryError& e) {
      throw MeshError("mesh: cell " + std::to_string(c) + ": " + e.what());
    }

    for (std::size_t s = 0; s < N; ++s) {
      const std::size_t a = cell.vertices[s];
      const std::size_t b = cell.vertices[(s + 1) % N];
      if (a == b) throw MeshError("mesh: cell " + std::to_string(c) + " repeats a vertex");
      const auto key = std::minmax(a, b);
      auto [it, fresh] = lookup.emplace(std::pair{key.first, key.second}, edges_.size());
      if (fresh) {
        edges_.push_back({key.first, key.second, {}});
      } else {
        MeshEdge& edge = edges_[it->second];
        if (edge.cells.size() >= 2) {
          throw MeshError("mesh: edge (" + std::to_string(a) + "," + std::to_string(b) + ") shared by more than two cells");
        }
        const auto [oc, os] = edge.cells.front();
        if (cells_[oc].vertices[os] != b) {
          throw MeshError("mesh: cells " + std::to_string(oc) + " and " + std::to_string(c) +
                          " traverse a shared edge in the same direction");
        }
      }
      edges_[it->second].cells.push_back({c, s});
      cell_edges_[c].push_back(it->second);
    }
  }
  for (std::size_t v = 0; v < used.size(); ++v) {
    if (!used[v]) throw MeshError("mesh: vertex " + std::to_string(v) + " belongs to no cell");
  }
}

bool Mesh::side_reversed(std::size_t c, std::size_t s) const {
  const auto& ids = cells_.at(c).vertices;
  return ids[s] > ids[(s + 1) % ids.size()];
}

std::vector<bool> Mesh::boundary_vertices() const {
  std::vector<bool> out(vertices_.size(), false);
  for (const auto& e : edges_) {
    if (e.boundary()) out[e.v0] = out[e.v1] = true;
  }
  return out;
}

double Mesh::h_max() const {
  double h = 0.0;
  for (const auto& el : elements_) h = std::max(h, el.diameter());
  return h;
}

long Mesh::euler_characteristic() const {
  return static_cast<long>(vertices_.size()) - static_cast<long>(edges_.size()) + static_cast<long>(cells_.size());
}

DofMap dof_map(const Mesh& mesh, int m) {
  if (m < 1) throw std::invalid_argument("dof_map: m must be >= 1");
  for (const auto& e : mesh.edges()) {
    if (e.cells.empty() || e.cells.size() > 2) throw MeshError("dof_map: non-conforming mesh");
  }
  DofMap d;
  d.m = m;
  d.num_vertices = mesh.num_vertices();
  d.num_edges = mesh.num_edges();
  d.num_cells = mesh.num_cells();
  d.per_edge = static_cast<std::size_t>(m - 1);
  d.per_cell = static_cast<std::size_t>(m * (m - 1) / 2);
  return d;
}

Mesh rectangle_grid(double x0, double y0, double x1, double y1, std::size_t kx, std::size_t ky, std::string id) {
  if (kx == 0 || ky == 0) throw std::invalid_argument("rectangle_grid: need at least one cell per axis");
  std::vector<Point2> v;
  for (std::size_t j = 0; j <= ky; ++j) {
    for (std::size_t i = 0; i <= kx; ++i) {
      v.emplace_back(x0 + (x1 - x0) * static_cast<double>(i) / kx, y0 + (y1 - y0) * static_cast<double>(j) / ky);
    }
  }
  auto at = [kx](std::size_t i, std::size_t j) { return j * (kx + 1) + i; };
  std::vector<Cell> cells;
  for (std::size_t j = 0; j < ky; ++j) {
    for (std::size_t i = 0; i < kx; ++i) {
      cells.push_back({{at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)}, {}});
    }
  }
  return Mesh(std::move(v), std::move(cells), std::move(id));
}

Mesh square_mesh_family(int level, std::size_t base) {
  if (level < 0) throw std::invalid_argument("square_mesh_family: level must be >= 0");
  const std::size_t k = base << level;
  return rectangle_grid(0.0, 0.0, 1.0, 1.0, k, k, "square-" + std::to_string(level));
}

std::size_t closest_square_count(int n) {
  if (n < 1) throw std::invalid_argument("closest_square_count: n must be >= 1");
  const long target = (2L * n + 1) * (12L * n + 1) + 1;
  std::size_t best = 1;
  long best_gap = -1;
  for (long k = 1; (k + 1) * (3 * k + 1) < 4 * target; ++k) {
    const long gap = std::labs((k + 1) * (3 * k + 1) - target);
    if (best_gap < 0 || gap < best_gap) {
      best_gap = gap;
      best = static_cast<std::size_t>(k);
    }
  }
  return best;
}

Mesh lshape_family(int n, LShapeVariant variant, std::size_t k_override) {
  if (n < 1) throw std::invalid_argument("lshape_family: n must be >= 1");
  const bool with_L = variant == LShapeVariant::with_L_element;
  const long k = with_L ? 3L * n : static_cast<long>(k_override ? k_override : closest_square_count(n));
  const double H = 1.0 / static_cast<double>(k);
  const long L = with_L ? n : 0;  // L-cell half-width in lattice units

  // Lattice cell (i, j) has lower-left corner (i H, j H), i, j in [-k, k).
  auto in_domain = [](long i, long j) { return !(i >= 0 && j >= 0); };
  auto in_L = [&](long i, long j) { return with_L && i >= -L && i < L && j >= -L && j < L && in_domain(i, j); };

  std::vector<std::vector<std::size_t>> cell_nodes;
  std::map<std::pair<long, long>, std::size_t> ids;  // (j, i) -> provisional order
  auto node = [&](long i, long j) {
    ids.emplace(std::pair{j, i}, 0);
    return std::pair{i, j};
  };
  std::vector<std::vector<std::pair<long, long>>> raw;
  for (long j = -k; j < k; ++j) {
    for (long i = -k; i < k; ++i) {
      if (!in_domain(i, j) || in_L(i, j)) continue;
      raw.push_back({node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)});
    }
  }
  if (with_L) {
    std::vector<std::pair<long, long>> ring;
    for (long i = -L; i <= L; ++i) ring.push_back(node(i, -L));
    for (long j = -L + 1; j <= 0; ++j) ring.push_back(node(L, j));
    ring.push_back(node(0, 0));
    ring.push_back(node(0, L));
    for (long i = -1; i >= -L; --i) ring.push_back(node(i, L));
    for (long j = L - 1; j > -L; --j) ring.push_back(node(-L, j));
    raw.push_back(std::move(ring));
  }
  std::vector<Point2> vertices;
  for (auto& [key, id] : ids) {
    id = vertices.size();
    vertices.emplace_back(key.second * H, key.first * H);
  }
  std::vector<Cell> cells;
  for (const auto& r : raw) {
    Cell c;
    for (const auto& [i, j] : r) c.vertices.push_back(ids.at({j, i}));
    cells.push_back(std::move(c));
  }
  const std::string id = (with_L ? "lshape-L-" : "lshape-sq-") + std::to_string(n);
  return Mesh(std::move(vertices), std::move(cells), id);
}

Element curved_element(double h) {
  if (!(h > 0.0)) throw std::invalid_argument("curved_element: h must be positive");
  const Point2 a(0, 0), b(h, 0), c(h, h), d(0, h);
  return Element({a, b, c, d},
                 {EdgeGeometry::sine(a, b, h / 4.0, 1), EdgeGeometry::straight(b, c), EdgeGeometry::straight(c, d),
                  EdgeGeometry::straight(d, a)},
                 "K_h");
}

}  // namespace nyfem
