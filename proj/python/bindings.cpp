#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "snmap/errors.hpp"
#include "snmap/fluctuation.hpp"
#include "snmap/gain.hpp"
#include "snmap/model_io.hpp"
#include "snmap/optimal_stopping.hpp"
#include "snmap/simulator.hpp"
#include "snmap/spectral.hpp"

namespace py = pybind11;
using namespace snmap;

namespace {

py::object extended(const ExtendedReal& v) { return py::float_(v.as_double()); }

py::dict estimate_dict(const PathEstimate& e) {
  py::dict d;
  d["value"] = e.value;
  d["std_error"] = e.std_error;
  d["n_effective"] = e.n_effective;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Scale matrices, exit identities and drawdown stopping for spectrally negative MAPs";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  // the most specific registration wins, so subclasses come after the base
  py::register_exception<ModelParseError>(m, "ModelParseError", base.ptr());
  py::register_exception<ModelShapeMismatch>(m, "ModelShapeMismatch", base.ptr());
  py::register_exception<InvalidConfig>(m, "InvalidConfig", base.ptr());
  py::register_exception<Unbounded>(m, "Unbounded", base.ptr());
  py::register_exception<SingularScaleMatrix>(m, "SingularScaleMatrix", base.ptr());
  py::register_exception<DegenerateRoots>(m, "DegenerateRoots", base.ptr());
  py::register_exception<HorizonTooShort>(m, "HorizonTooShort", base.ptr());
  py::register_exception<BoundaryMissing>(m, "BoundaryMissing", base.ptr());

  py::class_<MapModel>(m, "MapModel")
      .def_property_readonly("states", &MapModel::states)
      .def_property_readonly("generator", &MapModel::generator)
      .def("dump", [](const MapModel& model) { return dump_model(model); })
      .def("violations", [](const MapModel& model) {
        std::vector<std::string> codes;
        for (const auto& v : validate(model).violations) codes.push_back(v.code + ": " + v.message);
        return codes;
      });

  m.def("load_model", [](const std::filesystem::path& p) { return load_model(p); }, py::arg("path"));
  m.def("parse_model", [](const std::string& text) { return parse_model(text); }, py::arg("text"));

  m.def("kappa", &kappa, py::arg("model"), py::arg("theta"));
  m.def("phi", &phi, py::arg("model"), py::arg("q"), py::arg("theta_max") = 1e3);
  m.def("psi", py::overload_cast<const MapModel&, double>(&big_psi), py::arg("model"), py::arg("beta"));
  m.def("perron_vector", &perron_vector, py::arg("model"), py::arg("theta"));
  m.def("stationary_distribution", &stationary_distribution, py::arg("model"));

  py::class_<SpectralRep>(m, "SpectralRep")
      .def_readonly("q", &SpectralRep::q)
      .def_readonly("phi_q", &SpectralRep::phi_q)
      .def_readonly("roots", &SpectralRep::roots)
      .def("up_roots", &SpectralRep::up_roots)
      .def("w", &eval_w, py::arg("x"))
      .def("z", &eval_z, py::arg("x"))
      .def("w_prime", &eval_w_prime, py::arg("x"));
  m.def("spectral_decompose", &spectral_decompose, py::arg("model"), py::arg("q"));

  py::class_<ScaleTable>(m, "ScaleTable")
      .def(py::init([](const SpectralRep& rep, double x_max, double h) { return ScaleTable(rep, x_max, h); }),
           py::arg("rep"), py::arg("x_max") = 5.0, py::arg("h") = 1e-3)
      .def_property_readonly("q", &ScaleTable::q)
      .def_property_readonly("grid", &ScaleTable::grid)
      .def("w", &ScaleTable::w, py::arg("x"))
      .def("z", &ScaleTable::z, py::arg("x"))
      .def("w_row", &ScaleTable::w_row, py::arg("j"), py::arg("x"))
      .def("z_row", &ScaleTable::z_row, py::arg("j"), py::arg("x"))
      .def("u", [](const ScaleTable& t, int j, double x) { return u_fn(t, j, x); }, py::arg("j"), py::arg("x"))
      .def("a_threshold", [](const ScaleTable& t, int j) { return extended(a_threshold(t, j)); }, py::arg("j"));

  m.def("w_zero_plus", &w_zero_plus, py::arg("model"), py::arg("q"));
  m.def("talbot_w", &talbot_invert, py::arg("model"), py::arg("q"), py::arg("x"), py::arg("terms") = 24);

  m.def("one_sided_up", py::overload_cast<const MapModel&, double, double, double>(&one_sided_up), py::arg("model"),
        py::arg("q"), py::arg("x"), py::arg("a"));
  m.def("two_sided_up", &two_sided_up, py::arg("rep"), py::arg("x"), py::arg("a"));
  m.def("two_sided_down", &two_sided_down, py::arg("rep"), py::arg("x"), py::arg("a"));

  py::class_<GainSpec>(m, "GainSpec")
      .def_static("shepp", &GainSpec::shepp, py::arg("h"))
      .def_static("capped", &GainSpec::capped, py::arg("h"), py::arg("K"), py::arg("eps"))
      .def("f", &GainSpec::f, py::arg("s"), py::arg("j"))
      .def("df", &GainSpec::df, py::arg("s"), py::arg("j"));

  py::class_<StopSolution>(m, "StopSolution")
      .def_property_readonly("q", &StopSolution::q)
      .def_property_readonly("kappa1", &StopSolution::kappa1)
      .def("complete", &StopSolution::complete)
      .def("boundaries", &StopSolution::boundaries)
      .def("regimes",
           [](const StopSolution& s) {
             std::vector<std::string> out;
             for (const auto& st : s.states()) out.emplace_back(to_string(st.regime));
             return out;
           })
      .def("value", &StopSolution::value, py::arg("x"), py::arg("s"), py::arg("i"), py::arg("j"));
  m.def("solve_shepp", &solve_shepp, py::arg("model"), py::arg("q"), py::arg("h"), py::arg("x_max") = 5.0,
        py::arg("step") = 1e-3);

  m.def(
      "solve_boundary_ode",
      [](const MapModel& model, double q, const GainSpec& gain, double s0, double s1, const std::vector<double>& init) {
        py::list out;
        for (const auto& c : solve_boundary_ode(model, q, gain, s0, s1, init)) {
          py::dict d;
          d["s"] = c.s;
          d["g"] = c.g;
          d["status"] = to_string(c.status);
          d["message"] = c.message;
          out.append(d);
        }
        return out;
      },
      py::arg("model"), py::arg("q"), py::arg("gain"), py::arg("s0"), py::arg("s1"), py::arg("init"));

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("dt", &SimConfig::dt)
      .def_readwrite("horizon", &SimConfig::horizon)
      .def_readwrite("n_paths", &SimConfig::n_paths)
      .def_readwrite("master_seed", &SimConfig::master_seed)
      .def_readwrite("threads", &SimConfig::threads)
      .def_readwrite("bridge", &SimConfig::bridge);

  m.def(
      "estimate_exit",
      [](const MapModel& model, const SimConfig& cfg, double q, double x, double a) {
        ExitEstimates e;
        {
          py::gil_scoped_release release;
          e = estimate_exit(model, cfg, q, x, a);
        }
        py::dict d;
        d["id0"] = estimate_dict(e.id0);
        d["id1"] = estimate_dict(e.id1);
        d["id2"] = estimate_dict(e.id2);
        return d;
      },
      py::arg("model"), py::arg("config"), py::arg("q"), py::arg("x"), py::arg("a"));

  m.def(
      "estimate_stopped_gain",
      [](const MapModel& model, const SimConfig& cfg, double q, const GainSpec& gain, const std::vector<double>& c,
         double x, double s, int i, int j) {
        PathEstimate e;
        {
          py::gil_scoped_release release;
          e = estimate_stopped_gain(model, cfg, q, gain, c, x, s, i, j);
        }
        return estimate_dict(e);
      },
      py::arg("model"), py::arg("config"), py::arg("q"), py::arg("gain"), py::arg("c"), py::arg("x"), py::arg("s"),
      py::arg("i"), py::arg("j"));
}
