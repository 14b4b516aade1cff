#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "gist/cli.hpp"
#include "gist/datagen.hpp"
#include "gist/error.hpp"
#include "gist/spectral.hpp"
#include "gist/workflow.hpp"

namespace py = pybind11;
using namespace gist;

namespace {

MapPoint map_point(const std::string& name) {
  for (const auto& mp : default_map_points())
    if (mp.name == name) return mp;
  throw py::value_error("unknown map point: " + name);
}

RowMatrix vertex_array(const SurfaceMesh& m) {
  RowMatrix v(static_cast<Eigen::Index>(m.vertex_count()), 3);
  for (std::size_t i = 0; i < m.vertex_count(); ++i) v.row(static_cast<Eigen::Index>(i)) = m.vertices[i].transpose();
  return v;
}

Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor> face_array(const SurfaceMesh& m) {
  Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor> f(static_cast<Eigen::Index>(m.face_count()), 3);
  for (std::size_t i = 0; i < m.face_count(); ++i)
    for (int k = 0; k < 3; ++k) f(static_cast<Eigen::Index>(i), k) = m.faces[i][k];
  return f;
}

py::dict coefficient_dict(const Coefficients& c) {
  py::dict d;
  for (int i = 0; i < 6; ++i) d[kCoefficientNames[i]] = c.values[i];
  return d;
}

FilterSpec filter_of(const std::vector<double>& c) {
  FilterSpec f{c};
  f.validate();
  return f;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectral graph operator surrogate: meshes, embeddings, loads, model";

  py::register_exception<Error>(m, "GistError", PyExc_RuntimeError);

  py::class_<SurfaceMesh>(m, "Mesh")
      .def_property_readonly("vertices", &vertex_array)
      .def_property_readonly("faces", &face_array)
      .def_readonly("face_pids", &SurfaceMesh::face_pids)
      .def_readonly("closed", &SurfaceMesh::closed)
      .def("vertex_count", &SurfaceMesh::vertex_count)
      .def("face_count", &SurfaceMesh::face_count)
      .def("pids", &SurfaceMesh::pids)
      .def("to_obj", [](const SurfaceMesh& s) { return save_mesh(s); });

  m.def("load_mesh", [](const std::string& text) { return load_mesh(text); }, py::arg("obj_text"));
  m.def("gen_icosphere", &gen_icosphere, py::arg("level"));
  m.def("gen_cube", &gen_cube, py::arg("divisions"));
  m.def("gen_thin_plate", &gen_thin_plate, py::arg("gap"), py::arg("nx"), py::arg("ny"));
  m.def("gen_wing_flap", &gen_wing_flap, py::arg("alpha_deg"), py::arg("resolution"));

  m.def(
      "spectral_embed",
      [](const SurfaceMesh& mesh, int r, std::uint64_t seed, const std::vector<double>& filter) {
        return spectral_embed(random_walk_matrix(build_graph(mesh)), filter_of(filter), r, seed).phi;
      },
      py::arg("mesh"), py::arg("r"), py::arg("seed") = 0, py::arg("filter") = std::vector<double>{0.25, 0.5, 0.25});
  m.def(
      "exact_kernel",
      [](const SurfaceMesh& mesh, const std::vector<double>& filter) {
        return exact_kernel(random_walk_matrix(build_graph(mesh)), filter_of(filter));
      },
      py::arg("mesh"), py::arg("filter") = std::vector<double>{0.25, 0.5, 0.25});

  m.def("map_point_names", [] {
    std::vector<std::string> names;
    for (const auto& mp : default_map_points()) names.push_back(mp.name);
    return names;
  });
  m.def(
      "manufactured_fields",
      [](const SurfaceMesh& mesh, const std::string& mp) {
        const auto p = map_point(mp);
        return manufactured_fields(mesh, p, map_constants(p));
      },
      py::arg("mesh"), py::arg("map_point") = "straight_nominal");
  m.def(
      "integrate_fields",
      [](const SurfaceMesh& mesh, const RowMatrix& fields, const std::string& mp) {
        const auto c = integrate_fields(mesh, fields, map_constants(map_point(mp)));
        py::dict by_pid;
        for (const auto& [pid, v] : c.by_pid) by_pid[py::str(pid)] = coefficient_dict(v);
        py::dict out;
        out["total"] = coefficient_dict(c.total);
        out["by_pid"] = by_pid;
        return out;
      },
      py::arg("mesh"), py::arg("fields"), py::arg("map_point") = "straight_nominal");
  m.def(
      "analytic_coefficients",
      [](double alpha, const std::string& mp, int resolution) {
        return coefficient_dict(analytic_coefficients(alpha, map_point(mp), resolution));
      },
      py::arg("alpha_deg"), py::arg("map_point") = "straight_nominal", py::arg("resolution") = kDefaultResolution);
  m.def(
      "predict_fields",
      [](const std::string& checkpoint, const SurfaceMesh& mesh, const std::string& mp) {
        return predict_fields(load_checkpoint(checkpoint), mesh, map_point(mp));
      },
      py::arg("checkpoint"), py::arg("mesh"), py::arg("map_point") = "straight_nominal");
  m.def(
      "verify",
      [](const std::string& suite) {
        py::list out;
        for (const auto& c : run_verify_suite(suite)) {
          py::dict d;
          d["suite"] = c.suite;
          d["name"] = c.name;
          d["pass"] = c.pass;
          d["value"] = c.value;
          d["bound"] = c.bound;
          d["detail"] = c.detail;
          out.append(d);
        }
        return out;
      },
      py::arg("suite"));
  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "gist");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
