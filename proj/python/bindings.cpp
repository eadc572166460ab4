#include "nyfem/experiments.hpp"
#include "nyfem/interpolation.hpp"
#include "nyfem/json_io.hpp"
#include "nyfem/layer_potential.hpp"
#include "nyfem/mesh.hpp"
#include "nyfem/poisson_space.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

namespace py = pybind11;
using namespace nyfem;

namespace {

using ScalarField = std::function<double(double, double)>;

BoundaryData boundary_data(const ScalarField& f) {
  return BoundaryData::from_function([f](const Point2& x) { return f(x.x(), x.y()); });
}

Target target(const ScalarField& f) {
  Target v;
  v.value = [f](const Point2& x) { return f(x.x(), x.y()); };
  return v;
}

py::object to_python(const Value& v) {
  return std::visit(
      [](const auto& x) -> py::object {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return py::none();
        } else {
          return py::cast(x);
        }
      },
      v);
}

py::dict result_dict(const ExperimentResult& r) {
  py::dict out;
  out["experiment"] = r.experiment;
  out["pass"] = r.pass();
  out["wall_seconds"] = r.wall_seconds;
  py::dict tables;
  for (const auto& t : r.tables) {
    py::list columns, rows;
    for (const auto& c : t.columns) columns.append(c.name);
    for (const auto& row : t.rows) {
      py::list cells;
      for (const auto& v : row) cells.append(to_python(v));
      rows.append(cells);
    }
    tables[py::str(t.name)] = py::dict(py::arg("columns") = columns, py::arg("rows") = rows);
  }
  out["tables"] = tables;
  py::list checks;
  for (const auto& c : r.checks) {
    checks.append(py::dict(py::arg("name") = c.name, py::arg("pass") = c.pass, py::arg("detail") = c.detail));
  }
  out["checks"] = checks;
  out["files"] = r.files;
  return out;
}

}  // namespace

PYBIND11_MODULE(_nyfem, m) {
  m.doc() = "Curvilinear polygon elements, Nystrom solves and local Poisson spaces";
  m.attr("__version__") = "0.1.0";

  py::register_exception<GeometryError>(m, "GeometryError", PyExc_ValueError);
  py::register_exception<MeshError>(m, "MeshError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

  py::class_<EdgeGeometry>(m, "Edge")
      .def_static("straight", &EdgeGeometry::straight, py::arg("a"), py::arg("b"))
      .def_static("arc", &EdgeGeometry::arc, py::arg("a"), py::arg("center"), py::arg("sweep"))
      .def_static("sine", &EdgeGeometry::sine, py::arg("a"), py::arg("b"), py::arg("amplitude"), py::arg("periods"))
      .def("point", &EdgeGeometry::point, py::arg("t"))
      .def_property_readonly("length", &EdgeGeometry::length);

  py::class_<Element, std::shared_ptr<Element>>(m, "Element")
      .def(py::init<std::vector<Point2>, std::vector<EdgeGeometry>, std::string>(), py::arg("vertices"),
           py::arg("edges"), py::arg("label") = "")
      .def_static(
          "polygon", [](const std::vector<Point2>& v, const std::string& label) { return polygon_from_vertices(v, label); },
          py::arg("vertices"), py::arg("label") = "")
      .def_static("from_json", &element_from_json, py::arg("text"))
      .def("to_json", &element_to_json)
      .def("__len__", &Element::size)
      .def_property_readonly("vertices", &Element::vertices)
      .def_property_readonly("label", &Element::label)
      .def_property_readonly("area", &Element::area)
      .def_property_readonly("diameter", &Element::diameter)
      .def("interior_angle", &interior_angle, py::arg("vertex"))
      .def("contains", [](const Element& el, const Point2& x) { return contains(el, x); }, py::arg("x"));

  m.def(
      "sigmoid", [](double tau, int p) { const auto s = sigmoid(tau, p); return py::make_tuple(s.eta, s.eta_prime); },
      py::arg("tau"), py::arg("p") = kDefaultGrading, "Kress change of variables: (eta, eta').");
  m.def("integrated_legendre", &integrated_legendre, py::arg("j"), py::arg("t"),
        "Integrated Legendre polynomial and its derivative at t in [-1, 1].");
  m.def(
      "double_layer_kernel", [](const Point2& x, const Point2& y, const Vec2& n) { return double_layer_kernel(x, y, n); },
      py::arg("x"), py::arg("y"), py::arg("normal"));

  py::class_<HarmonicSolution>(m, "HarmonicSolution")
      .def_readonly("density", &HarmonicSolution::phi)
      .def_readonly("residual", &HarmonicSolution::residual)
      .def("__call__", [](const HarmonicSolution& s, double x, double y) { return eval(s, Point2(x, y)); })
      .def("gradient", [](const HarmonicSolution& s, double x, double y) { return eval_gradient(s, Point2(x, y)); });

  py::class_<NystromSolver, std::shared_ptr<NystromSolver>>(m, "NystromSolver")
      .def(py::init([](const Element& el, int n, int p) { return std::make_shared<NystromSolver>(el, n, p); }),
           py::arg("element"), py::arg("n"), py::arg("p") = kDefaultGrading)
      .def("solve", [](const NystromSolver& s, const ScalarField& g) { return s.solve(boundary_data(g)); }, py::arg("g"))
      .def_property_readonly("condition_estimate",
                             [](const NystromSolver& s) { return s.factorization().condition_estimate(); })
      .def_property_readonly("size", [](const NystromSolver& s) { return s.rule().size(); });

  m.def(
      "solve_dirichlet",
      [](const Element& el, const ScalarField& g, int n, int p) { return solve_dirichlet(el, boundary_data(g), n, p); },
      py::arg("element"), py::arg("g"), py::arg("n"), py::arg("p") = kDefaultGrading,
      "Harmonic function with Dirichlet data g(x, y).");

  py::class_<Poly2>(m, "Poly2")
      .def(py::init<const Point2&>(), py::arg("center") = Point2(0, 0))
      .def("add_term", &Poly2::add_term, py::arg("a"), py::arg("b"), py::arg("coeff"))
      .def("coefficient", &Poly2::coefficient)
      .def_property_readonly("terms", &Poly2::terms)
      .def_property_readonly("degree", &Poly2::degree)
      .def("laplacian", &Poly2::laplacian)
      .def("__call__", [](const Poly2& p, double x, double y) { return p(Point2(x, y)); });
  m.def("particular_solution", &particular_solution, py::arg("p"), "Polynomial q with Laplacian(q) = p.");

  py::enum_<BasisRole>(m, "BasisRole")
      .value("vertex", BasisRole::vertex)
      .value("edge", BasisRole::edge)
      .value("interior", BasisRole::interior)
      .value("none", BasisRole::none);

  py::class_<LocalFunction>(m, "LocalFunction")
      .def_readonly("label", &LocalFunction::label)
      .def_readonly("role", &LocalFunction::role)
      .def_readonly("tag", &LocalFunction::tag)
      .def("__call__", [](const LocalFunction& f, double x, double y) { return eval_local(f, Point2(x, y)).value; })
      .def("gradient",
           [](const LocalFunction& f, double x, double y) { return eval_local(f, Point2(x, y), true).gradient; });

  m.def(
      "local_basis",
      [](const Element& el, int degree, int n, int p) { return local_basis(el, degree, n, p).basis; },
      py::arg("element"), py::arg("m"), py::arg("n") = 32, py::arg("p") = kDefaultGrading,
      "Vertex, edge and interior basis functions of the local space of degree m.");
  m.def("local_dimension", &local_dimension, py::arg("num_edges"), py::arg("m"));
  m.def(
      "interpolate",
      [](const ScalarField& f, const Element& el, int degree, int n) {
        InterpolationOptions opt;
        opt.n = n;
        return interpolate_local(target(f), el, degree, opt);
      },
      py::arg("f"), py::arg("element"), py::arg("m"), py::arg("n") = 32, "Local interpolant of f(x, y).");

  py::class_<Mesh>(m, "Mesh")
      .def_static("from_json", &mesh_from_json, py::arg("text"))
      .def("to_json", &mesh_to_json)
      .def_property_readonly("num_vertices", &Mesh::num_vertices)
      .def_property_readonly("num_edges", &Mesh::num_edges)
      .def_property_readonly("num_cells", &Mesh::num_cells)
      .def_property_readonly("h_max", &Mesh::h_max)
      .def("dimension", [](const Mesh& mesh, int degree) { return dof_map(mesh, degree).dim(); }, py::arg("m"));
  m.def("square_mesh", [](int level) { return square_mesh_family(level); }, py::arg("level"));
  m.def(
      "lshape_mesh",
      [](int n, bool with_l_cell) {
        return lshape_family(n, with_l_cell ? LShapeVariant::with_L_element : LShapeVariant::all_squares);
      },
      py::arg("n"), py::arg("with_l_cell") = true);
  m.def("curved_element", &curved_element, py::arg("h"));

  m.def("experiment_ids", &experiment_ids);
  m.def(
      "noc",
      [](const std::vector<double>& e, const std::vector<double>& s, const std::string& mode) {
        if (mode != "dof" && mode != "h") throw py::value_error("mode must be 'dof' or 'h'");
        return noc(e, s, mode == "dof" ? NocMode::dof : NocMode::h);
      },
      py::arg("errors"), py::arg("sizes"), py::arg("mode") = "dof");
  m.def(
      "run_experiment",
      [](const std::string& id, std::vector<int> n, std::vector<int> degrees, int levels, const std::string& out_dir,
         std::uint64_t seed) {
        ExperimentConfig cfg;
        cfg.experiment = id;
        cfg.n = std::move(n);
        cfg.m = std::move(degrees);
        cfg.levels = levels;
        cfg.out_dir = out_dir;
        cfg.seed = seed;
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(cfg);
        }
        return result_dict(r);
      },
      py::arg("experiment"), py::arg("n") = std::vector<int>{}, py::arg("m") = std::vector<int>{},
      py::arg("levels") = 0, py::arg("out_dir") = "", py::arg("seed") = 0,
      "Runs a named experiment; returns its tables and checks.");
}
