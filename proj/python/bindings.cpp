#include "lidx/experiments.hpp"
#include "lidx/fredholm_abstract.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace lidx;

namespace {

// reports cross the boundary as JSON text; the Python side parses them
std::string run_text(const std::string& text, int jobs) {
  const ExperimentConfig cfg = parse_config(text);
  py::gil_scoped_release nogil;
  ExperimentResult r = run_experiment(cfg, jobs);
  r.report["csv"] = r.csv;
  return r.report.dump();
}

std::string eta(double b, const std::string& method, double tol) {
  if (method != "hurwitz" && method != "partial_sum_zeta") throw ConfigError("unknown eta method '" + method + "'");
  const EtaResult e = eta_invariant(b, method == "hurwitz" ? EtaMethod::hurwitz : EtaMethod::partial_sum_zeta, tol);
  return nlohmann::json{{"value", e.value},
                        {"error_estimate", e.error_estimate},
                        {"validation_residual", e.validation_residual},
                        {"flagged", e.flagged}}
      .dump();
}

std::string equal_index(int dim_x, int dim_y, int dim_h, unsigned long long seed) {
  const EqualIndexReport r = verify_equal_index(random_instance(dim_x, dim_y, dim_h, seed));
  return nlohmann::json{{"index_wmm", r.index_wmm},
                        {"index_p_ker_rho", r.index_p_ker_rho},
                        {"equal", r.equal},
                        {"rank_ambiguous", r.rank_ambiguous},
                        {"factorization_residual", r.factorization_residual}}
      .dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  py::register_exception<Error>(m, "LidxError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  m.def("experiment_kinds", &experiment_kinds);
  m.def("run_text", &run_text, py::arg("text"), py::arg("jobs") = 1);
  m.def("config_json", [](const std::string& text) { return config_to_json(parse_config(text)).dump(); });
  m.def("eta", &eta, py::arg("b"), py::arg("method") = "hurwitz", py::arg("tol") = 1e-6);
  m.def("crossing_count", [](double a_minus, double a_plus, double alpha, int modes) {
    CircleGeometry g;
    g.alpha = alpha;
    g.a = Profile::algebraic(a_minus, a_plus, g.delta);
    return crossing_count_oracle(g, modes);
  }, py::arg("a_minus"), py::arg("a_plus"), py::arg("alpha") = 0.5, py::arg("modes") = 16);
  m.def("equal_index", &equal_index, py::arg("dim_x"), py::arg("dim_y"), py::arg("dim_h"), py::arg("seed"));
}
