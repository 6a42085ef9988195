#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sgdmlab/cli.hpp"
#include "sgdmlab/errors.hpp"
#include "sgdmlab/experiment.hpp"
#include "sgdmlab/lyapunov.hpp"
#include "sgdmlab/stopping.hpp"

namespace py = pybind11;
using namespace sgdmlab;

namespace {

NoiseKind noise_kind(const std::string& name) {
  if (name == "none") return NoiseKind::None;
  if (name == "gaussian") return NoiseKind::GaussianIsotropic;
  if (name == "sphere") return NoiseKind::BoundedSphere;
  throw ConfigError("unknown noise kind '" + name + "'");
}

Matrix stack(const std::vector<Vector>& rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stochastic gradient descent with momentum: trajectories, Lyapunov checks and envelopes";
  m.attr("__version__") = kSoftwareVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

  py::class_<Objective>(m, "Objective")
      .def_static("quadratic", py::overload_cast<Vector, Vector>(&Objective::quadratic), py::arg("diag"),
                  py::arg("center"))
      .def_static("quadratic", py::overload_cast<Vector>(&Objective::quadratic), py::arg("diag"))
      .def_static("least_squares", &Objective::least_squares, py::arg("A"), py::arg("b"))
      .def_static("huberized_abs", py::overload_cast<Eigen::Index, double>(&Objective::huberized_abs),
                  py::arg("dim"), py::arg("delta") = 1.0)
      .def_property_readonly("dim", &Objective::dim)
      .def_property_readonly("smoothness", &Objective::smoothness)
      .def_property_readonly("minimizer", &Objective::minimizer)
      .def_property_readonly("min_value", &Objective::min_value)
      .def("eval", &Objective::eval)
      .def("grad", &Objective::grad)
      .def("gap", &Objective::gap)
      .def("__repr__", &Objective::describe);

  py::class_<NoiseModel>(m, "NoiseModel")
      .def_property_readonly("kind", [](const NoiseModel& n) { return to_string(n.kind); })
      .def_readonly("dim", &NoiseModel::dim)
      .def_readonly("sigma", &NoiseModel::sigma_certificate)
      .def_readonly("scale", &NoiseModel::scale);
  m.def(
      "calibrate", [](const std::string& kind, Eigen::Index dim, double sigma) { return calibrate(noise_kind(kind), dim, sigma); },
      py::arg("kind"), py::arg("dim"), py::arg("sigma"), "kind: none, gaussian or sphere");

  py::class_<Schedule>(m, "Schedule")
      .def_static("theorem_main", &Schedule::theorem_main, py::arg("L"))
      .def_static("proposition_eps", &Schedule::proposition_eps, py::arg("L"), py::arg("epsilon"),
                  py::arg("c0_prime") = 100.0)
      .def_readonly("L", &Schedule::L)
      .def_readonly("epsilon", &Schedule::epsilon)
      .def("eta", &Schedule::eta)
      .def("a_coeff", &Schedule::a_coeff)
      .def("__repr__", &Schedule::describe);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("K", &Trajectory::K)
      .def_readonly("seed", &Trajectory::seed)
      .def_property_readonly("x", [](const Trajectory& t) { return stack(t.xs); }, "x_0..x_{K+1}, one row per index")
      .def_property_readonly("theta", [](const Trajectory& t) { return stack(t.thetas); }, "theta_1..theta_K")
      .def_property_readonly("fgap", [](const Trajectory& t) { return t.f_gaps; }, "f(x_k) - f*, k = 0..K");
  m.def("run_trajectory", &run_trajectory, py::arg("objective"), py::arg("noise"), py::arg("schedule"), py::arg("x0"),
        py::arg("K"), py::arg("seed"));

  m.def(
      "lyapunov_trace",
      [](const Trajectory& t, const Schedule& s, const Objective& o) {
        const auto tr = lyapunov_trace(t, s, o);
        py::dict d;
        d["E"] = tr.E;
        d["residual_lemma"] = tr.descent_residual;
        d["residual_decomp"] = tr.decomp_residual;
        d["tol"] = tr.tol;
        return d;
      },
      py::arg("trajectory"), py::arg("schedule"), py::arg("objective"));

  py::class_<Bracket>(m, "Bracket")
      .def_readonly("value", &Bracket::value)
      .def_readonly("terms", &Bracket::terms)
      .def_property_readonly("lower", &Bracket::lower)
      .def_property_readonly("upper", &Bracket::upper)
      .def("__contains__", &Bracket::contains);
  m.def("gamma1", &gamma1, py::arg("schedule"), py::arg("tol") = 1e-6);
  m.def("gamma2", &gamma2, py::arg("schedule"), py::arg("sigma"), py::arg("tol") = 1e-6);
  m.def("riemann_zeta", &riemann_zeta, py::arg("s"));

  py::class_<EnvelopeParams>(m, "EnvelopeParams")
      .def_readonly("gamma1", &EnvelopeParams::gamma1)
      .def_readonly("gamma2", &EnvelopeParams::gamma2)
      .def_readonly("C1", &EnvelopeParams::C1)
      .def_readonly("C2", &EnvelopeParams::C2)
      .def_readonly("zeta", &EnvelopeParams::zeta)
      .def_readonly("h_sigma", &EnvelopeParams::h_sigma)
      .def_readonly("C0", &EnvelopeParams::C0);
  m.def("envelope_constants", &envelope_constants, py::arg("schedule"), py::arg("sigma"), py::arg("E0"),
        py::arg("tol") = 1e-6);
  m.def("envelope_U", &envelope_U, py::arg("params"), py::arg("beta"), py::arg("k"));
  m.def("baseline_envelope", &baseline_envelope, py::arg("eta"), py::arg("beta"), py::arg("k"));

  m.def(
      "run_experiment",
      [](const std::string& yaml_text, std::optional<std::filesystem::path> output_dir, std::optional<int> workers) {
        RunConfig cfg = parse_config(yaml_text);
        if (output_dir) cfg.output_dir = *output_dir;
        std::string dumped;
        {
          py::gil_scoped_release release;
          dumped = run_experiment(cfg, workers).json.dump();
        }
        return dumped;
      },
      py::arg("config"), py::arg("output_dir") = py::none(), py::arg("workers") = py::none(),
      "Runs a YAML config given as text; returns report.json as a string");

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "sgdmlab");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int rc = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(rc, out.str(), err.str());
      },
      py::arg("args"));
}
