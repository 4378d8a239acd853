#include <complex>
#include <optional>
#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hemlab/driver.hpp"

namespace py = pybind11;
using namespace hemlab;

namespace {

WorkflowConfig workflow(const std::string& embedding, int terms, int bits,
                        std::optional<double> spurious_tol, std::optional<double> germ_tol) {
  WorkflowConfig w;
  w.embedding = parse_embedding(embedding);
  w.terms = terms;
  w.precision_bits = bits;
  w.spurious_tol = spurious_tol;
  w.germ_tol = germ_tol;
  return w;
}

std::string solve_json(const std::string& case_json, const std::string& embedding, double alpha,
                       int max_terms, int bits, double eps, double mismatch_tol,
                       std::optional<double> spurious_tol, std::optional<double> germ_tol,
                       bool history) {
  SolveConfig c;
  c.embedding = parse_embedding(embedding);
  c.alpha = alpha;
  c.max_terms = max_terms;
  c.precision_bits = bits;
  c.eps = eps;
  c.mismatch_tol = mismatch_tol;
  c.spurious_tol = spurious_tol;
  c.germ_tol = germ_tol;
  c.record_spurious = history;
  const auto net = load_network(case_json);
  SolveReport r;
  {
    py::gil_scoped_release release;
    r = solve(c, net);
  }
  return report_json(r, {false, history});
}

py::dict pade(const std::vector<std::complex<double>>& coefficients, int m) {
  std::vector<Complex<double>> c;
  for (const auto& z : coefficients) c.emplace_back(z.real(), z.imag());
  const auto pa = compute_pade(PowerSeries<double>(c), m);
  auto to_list = [](const std::vector<Complex<double>>& v) {
    std::vector<std::complex<double>> out;
    for (const auto& z : v) out.emplace_back(z.re, z.im);
    return out;
  };
  const auto pz = pole_zeros(pa);
  py::dict d;
  d["m"] = pa.m;
  d["numerator"] = to_list(pa.numerator.coefficients());
  d["denominator"] = to_list(pa.denominator.coefficients());
  d["poles"] = to_list(pz.poles);
  d["zeros"] = to_list(pz.zeros);
  return d;
}

std::string roots_csv(const std::string& case_json, const std::string& embedding, int terms, int bits,
                      std::optional<double> spurious_tol) {
  const auto res = roots_workflow(load_network(case_json), workflow(embedding, terms, bits, spurious_tol, {}));
  std::ostringstream out;
  write_root_csv(out, res.rows);
  return out.str();
}

std::string sweep_csv(const std::string& case_json, const std::string& embedding, double from, double to,
                      int steps, int terms, int bits) {
  const auto rows =
      sweep_workflow(load_network(case_json), workflow(embedding, terms, bits, {}, {}), from, to, steps);
  std::ostringstream out;
  write_sweep_csv(out, rows);
  return out.str();
}

py::tuple cf(const std::string& case_json, const std::string& embedding, int samples, int bits,
             std::optional<double> scale) {
  CFCurve curve;
  const auto net = load_network(case_json);
  {
    py::gil_scoped_release release;
    curve = cf_workflow(net, workflow(embedding, 60, bits, {}, {}), samples, scale);
  }
  std::vector<std::pair<double, double>> samples_out;
  for (const auto& s : curve.samples) samples_out.emplace_back(s.alpha_hat, s.cf);
  return py::make_tuple(samples_out, curve.bcc_estimate);
}

}  // namespace

PYBIND11_MODULE(_hemlab, m) {
  m.doc() = "Holomorphic-embedding power flow with Pade diagnostics (native core)";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error;
  error.call_once_and_store_result(
      [&]() { return py::exception<Error>(m, "HemlabError", PyExc_RuntimeError); });
  // args are (code, message).
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetObject(error.get_stored().ptr(), py::make_tuple(e.code(), e.what()).ptr());
    }
  });

  m.def("solve_json", &solve_json, py::arg("case_json"), py::arg("embedding"), py::arg("alpha"),
        py::arg("max_terms"), py::arg("precision_bits"), py::arg("eps"), py::arg("mismatch_tol"),
        py::arg("spurious_tol"), py::arg("germ_tol"), py::arg("history"));
  m.def("pade", &pade, py::arg("coefficients"), py::arg("m"));
  m.def("line_capacity", &line_capacity, py::arg("a"), py::arg("b"));
  m.def("cf_estimate", &cf_estimate, py::arg("errors"), py::arg("bits") = 53);
  m.def("roots_csv", &roots_csv);
  m.def("sweep_csv", &sweep_csv);
  m.def("series_csv", [](const std::string& case_json, const std::string& embedding, int terms, int bits) {
    return series_workflow(load_network(case_json), workflow(embedding, terms, bits, {}, {}));
  });
  m.def("snbp", [](const std::string& case_json, const std::string& embedding, int terms, int bits) {
    return snbp_workflow(load_network(case_json), workflow(embedding, terms, bits, {}, {}));
  });
  m.def("cf", &cf);
}
