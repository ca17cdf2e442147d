#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>

#include "linf/budget.hpp"
#include "linf/error.hpp"
#include "linf/hermalg.hpp"
#include "linf/hermitian.hpp"
#include "linf/scenario.hpp"
#include "linf/solve.hpp"
#include "linf/subsol.hpp"
#include "linf/symfun.hpp"

namespace py = pybind11;
using namespace linf;

namespace {

ConeOperator make_op(const std::string& name, int n, int k) {
  OperatorSpec s;
  s.type = name;
  s.k = k;
  return s.make(n);
}

// JSON crosses the boundary as text; the Python side decodes it.
py::tuple run(RunResult r) { return py::make_tuple(r.exit_code, r.summary.dump()); }

}  // namespace

PYBIND11_MODULE(_linf, m) {
  m.doc() = "Core routines of linf-lab";

  // Translators are tried newest first, so the base class goes in first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ConeError>(m, "ConeError", PyExc_ValueError);

  m.def("sigma", [](int k, const std::vector<double>& lam) { return sigma(k, lam); });
  m.def(
      "op_eval",
      [](const std::string& op, const std::vector<double>& lam, int k) {
        const OpValue v = op_eval(make_op(op, static_cast<int>(lam.size()), k), lam);
        return py::make_tuple(v.value, v.grad);
      },
      py::arg("op"), py::arg("lam"), py::arg("k") = 1);
  m.def(
      "tilde_eval",
      [](const std::string& op, const std::vector<double>& lam, int k) {
        const OpValue v = tilde_eval(make_op(op, static_cast<int>(lam.size()), k), lam);
        return py::make_tuple(v.value, v.grad);
      },
      py::arg("op"), py::arg("lam"), py::arg("k") = 1);
  m.def("relative_eigs", &relative_eigs, py::arg("omega"), py::arg("chi"));
  m.def("tau", &tau, py::arg("k"), py::arg("x"));
  m.def("derive_R_tilde", &derive_R_tilde, py::arg("delta"), py::arg("kappa2"));

  m.def(
      "kahler_constants",
      [](int n, double q, double p, double delta, double R, double kappa1, double kappa2, double C0,
         double C1) {
        KahlerParams kp{n, q, p, delta, R, kappa1, kappa2, C0, C1};
        return to_json(kahler_constants(kp)).dump();
      },
      py::arg("n"), py::arg("q") = 0.0, py::arg("p") = 0.0, py::arg("delta"), py::arg("R"),
      py::arg("kappa1") = 0.0, py::arg("kappa2"), py::arg("C0"), py::arg("C1"));
  m.def(
      "hermitian_constants",
      [](int n, double q, double delta, double R, double kappa1, double kappa2, double r0) {
        HermitianParams hp{n, q, delta, R, kappa1, kappa2, r0};
        return to_json(hermitian_constants(hp)).dump();
      },
      py::arg("n"), py::arg("q") = 0.0, py::arg("delta"), py::arg("R"), py::arg("kappa1"),
      py::arg("kappa2"), py::arg("r0"));
  m.def(
      "sup_levels",
      [](int n, double q, double C3, double C7) {
        const SupLevels lv = sup_levels(n, q, C3, C7);
        return py::make_tuple(lv.s0, lv.S_infty, lv.s0_corrected, lv.S_infty_corrected);
      },
      py::arg("n"), py::arg("q"), py::arg("C3"), py::arg("C7"));

  m.def("scenario_json", [](const std::string& path) { return to_json(load_scenario(path)).dump(); });
  m.def("run_check", [](const std::string& c, const std::string& out) {
    std::filesystem::create_directories(out);
    return run(run_check(load_scenario(c), out));
  });
  m.def("run_verify", [](const std::string& c, const std::string& out) {
    std::filesystem::create_directories(out);
    return run(run_verify(load_scenario(c), out));
  });
  m.def("run_sweep", [](const std::string& c, const std::string& out) {
    std::filesystem::create_directories(out);
    return run(run_sweep(load_scenario(c), out));
  });
  m.def("run_budget", [](const std::string& c, const std::string& out) {
    std::filesystem::create_directories(out);
    return run(run_budget(load_scenario(c), out));
  });
  m.def("run_report", [](const std::string& out) { return run(run_report(out)); });
}
