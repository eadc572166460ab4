#include "nyfem/json_io.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nyfem {

using nlohmann::json;

namespace {

Point2 point(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("json: point must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

EdgeGeometry edge_from_json(const json& j, const Point2& a, const Point2& b) {
  const std::string kind = j.value("kind", "straight");
  if (kind == "straight") return EdgeGeometry::straight(a, b);
  if (kind == "arc") return EdgeGeometry::arc(a, point(j.at("center")), j.at("sweep").get<double>());
  if (kind == "sine") return EdgeGeometry::sine(a, b, j.at("amplitude").get<double>(), j.at("periods").get<int>());
  throw std::invalid_argument("json: unknown edge kind '" + kind + "'");
}

json edge_to_json(const EdgeGeometry& e) {
  switch (e.kind()) {
    case EdgeKind::straight:
      return {{"kind", "straight"}};
    case EdgeKind::circular_arc:
      return {{"kind", "arc"}, {"center", {e.center().x(), e.center().y()}}, {"sweep", e.sweep()}};
    case EdgeKind::sine:
      return {{"kind", "sine"}, {"amplitude", e.amplitude()}, {"periods", e.periods()}};
    case EdgeKind::parametric:
      break;
  }
  throw std::invalid_argument("json: parametric edges cannot be serialized");
}

std::vector<EdgeGeometry> edges_for(const json& edges, const std::vector<Point2>& pts) {
  std::vector<EdgeGeometry> out;
  if (edges.size() != pts.size()) throw std::invalid_argument("json: need one edge per vertex");
  for (std::size_t i = 0; i < pts.size(); ++i) out.push_back(edge_from_json(edges[i], pts[i], pts[(i + 1) % pts.size()]));
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Element element_from_json(const std::string& text) {
  const json j = json::parse(text);
  std::vector<Point2> pts;
  for (const auto& p : j.at("vertices")) pts.push_back(point(p));
  const std::string label = j.value("label", "");
  if (!j.contains("edges")) return polygon_from_vertices(pts, label);
  return Element(pts, edges_for(j.at("edges"), pts), label);
}

Mesh mesh_from_json(const std::string& text) {
  const json j = json::parse(text);
  std::vector<Point2> vertices;
  for (const auto& p : j.at("vertices")) vertices.push_back(point(p));
  std::vector<Cell> cells;
  for (const auto& c : j.at("cells")) {
    Cell cell;
    const json& ids = c.is_array() ? c : c.at("vertices");
    for (const auto& id : ids) cell.vertices.push_back(id.get<std::size_t>());
    if (c.is_object() && c.contains("edges")) {
      std::vector<Point2> pts;
      for (auto id : cell.vertices) pts.push_back(vertices.at(id));
      cell.edges = edges_for(c.at("edges"), pts);
    }
    cells.push_back(std::move(cell));
  }
  return Mesh(std::move(vertices), std::move(cells), j.value("id", ""));
}

std::string element_to_json(const Element& el) {
  json j;
  j["label"] = el.label();
  j["vertices"] = json::array();
  for (const auto& v : el.vertices()) j["vertices"].push_back({v.x(), v.y()});
  j["edges"] = json::array();
  for (const auto& e : el.edges()) j["edges"].push_back(edge_to_json(e));
  return j.dump(2);
}

std::string mesh_to_json(const Mesh& mesh) {
  json j;
  j["id"] = mesh.id();
  j["vertices"] = json::array();
  for (const auto& v : mesh.vertices()) j["vertices"].push_back({v.x(), v.y()});
  j["cells"] = json::array();
  for (const auto& c : mesh.cells()) {
    const bool straight = std::all_of(c.edges.begin(), c.edges.end(), [](const auto& e) { return e.is_straight(); });
    if (straight) {
      j["cells"].push_back(c.vertices);
    } else {
      json cj{{"vertices", c.vertices}, {"edges", json::array()}};
      for (const auto& e : c.edges) cj["edges"].push_back(edge_to_json(e));
      j["cells"].push_back(cj);
    }
  }
  return j.dump(1);
}

Element load_element(const std::string& path) { return element_from_json(slurp(path)); }
Mesh load_mesh(const std::string& path) { return mesh_from_json(slurp(path)); }

}  // namespace nyfem
