// Python module _csim. Structured results cross the boundary as JSON text;
// the csim package decodes them.

#include "csim/config.hpp"
#include "csim/geometry.hpp"
#include "csim/measurement.hpp"
#include "csim/report.hpp"
#include "csim/scenarios.hpp"
#include "csim/verify.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace csim;

namespace {

std::pair<double, double> to_alt(double t, double x, double a) {
  const auto q = geometry::to_alt({t, x}, geometry::ChartParams(a));
  return {q.eta, q.xi};
}

std::pair<double, double> from_alt(double eta, double xi, double a) {
  const auto p = geometry::from_alt({eta, xi}, geometry::ChartParams(a));
  return {p.t, p.x};
}

std::string scenario_json(const std::string& text) {
  return report::to_json(config::parse_scenario(text)).dump();
}

py::tuple compare_frames(const std::string& text) {
  const auto cfg = config::parse_scenario(text);
  scenarios::ConsistencyReport rep;
  {
    py::gil_scoped_release unlock;
    const auto rt = scenarios::run_one_frame(cfg, Frame::T, true);
    const auto re = scenarios::run_one_frame(cfg, Frame::Eta, true);
    rep = scenarios::compare_frames(rt, re, cfg);
  }
  return py::make_tuple(report::to_json(rep).dump(), rep.corr_t, rep.corr_eta, rep.labels);
}

Matrix collapse(const Matrix& sigma, int n_detectors, int n_sites, int detector, double g) {
  gaussian::CovarianceState st;
  st.layout = gaussian::PhaseSpaceLayout::standard(n_detectors, n_sites);
  if (sigma.rows() != st.layout.dim() || sigma.cols() != st.layout.dim())
    throw ConfigError("covariance shape does not match the phase-space layout");
  st.sigma = sigma;
  st.mean = Vector::Zero(st.layout.dim());
  return measurement::collapse_paper(st, {detector, g, Frame::T, 0.0}).first.sigma;
}

std::string run_verify(std::uint64_t seed, bool inject_fault) {
  py::gil_scoped_release unlock;
  return verify::run_all(seed, inject_fault ? verify::Fault::SigmaScale : verify::Fault::None).to_json().dump();
}

}  // namespace

PYBIND11_MODULE(_csim, m) {
  m.doc() = "Detector collapses on a lattice field in two time slicings";
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<UnsupportedError>(m, "UnsupportedError", PyExc_NotImplementedError);

  m.def("version", &config::version_string);
  m.def("to_alt", &to_alt, py::arg("t"), py::arg("x"), py::arg("A"));
  m.def("from_alt", &from_alt, py::arg("eta"), py::arg("xi"), py::arg("A"));
  m.def("conformal_factor", [](double t, double x, double a) {
    return geometry::conformal_factor({t, x}, geometry::ChartParams(a));
  }, py::arg("t"), py::arg("x"), py::arg("A"));
  m.def("scenario_json", &scenario_json, py::arg("text"));
  m.def("compare_frames", &compare_frames, py::arg("text"));
  m.def("collapse", &collapse, py::arg("sigma"), py::arg("n_detectors"), py::arg("n_sites"),
        py::arg("detector"), py::arg("g"));
  m.def("verify_json", &run_verify, py::arg("seed") = 20240101, py::arg("inject_fault") = false);
}
