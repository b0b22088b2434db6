#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "paraqnd/config.hpp"
#include "paraqnd/experiments.hpp"
#include "paraqnd/fock.hpp"
#include "paraqnd/opo.hpp"
#include "paraqnd/params.hpp"
#include "paraqnd/qnd.hpp"
#include "paraqnd/validation.hpp"

namespace py = pybind11;
using namespace paraqnd;

namespace {

// JSON crosses the boundary as text; the Python side wraps it with json.loads.
std::string manifest_text(const RunManifest& m) { return manifest_json(m).dump(); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Truncated-Fock-space simulator core";
  m.attr("__version__") = code_version();

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<TruncationError>(m, "TruncationError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ExperimentError>(m, "ExperimentError", PyExc_RuntimeError);

  m.def("squeezing_db", &squeezing_db, py::arg("width"));
  m.def("width_from_db", &width_from_db, py::arg("db"));
  m.def(
      "bogoliubov_params",
      [](double delta, double r, double g) {
        const BogoliubovParams b = bogoliubov_params(delta, r, g);
        return py::dict(py::arg("Delta") = b.Delta, py::arg("u") = b.u, py::arg("g_tilde") = b.g_tilde);
      },
      py::arg("delta"), py::arg("r"), py::arg("g") = 1.0);

  m.def("kraus_amplitude", &kraus_amplitude, py::arg("N"), py::arg("p"), py::arg("d"), py::arg("w"),
        py::arg("Delta_t") = 0.0);
  m.def(
      "povm_purity",
      [](const std::vector<double>& ps, double d, double w, Index n_max) {
        const KrausFamily f = KrausFamily::make(d, w, 0.0, 0.0, n_max);
        std::vector<double> out;
        out.reserve(ps.size());
        for (double p : ps) out.push_back(povm_purity(p, f));
        return out;
      },
      py::arg("p"), py::arg("d") = 1.0, py::arg("w") = 0.25, py::arg("n_max") = 8);

  m.def("squeezed_number_state", &squeezed_number_state, py::arg("n"), py::arg("u"), py::arg("level"),
        py::arg("tol") = kDefaultHealthTolerance);
  m.def("coherent_state", &coherent_state, py::arg("n"), py::arg("alpha"), py::arg("tol") = kDefaultHealthTolerance);

  m.def("jump_probability", &jump_probability, py::arg("u"), py::arg("kappa_a"), py::arg("t"));
  m.def("pump_width_decay", &pump_width_decay, py::arg("w"), py::arg("kappa_b"), py::arg("t"));
  m.def(
      "feasibility_check",
      [](double g, double kappa_a, double kappa_b, double w, double u) {
        const FeasibilityReport r = feasibility_check(g, kappa_a, kappa_b, w, u);
        return py::dict(py::arg("g_tilde") = r.g_tilde, py::arg("t_jump") = r.t_jump,
                        py::arg("jump_exponent") = r.jump_exponent, py::arg("jump_probability") = r.jump_probability,
                        py::arg("width_at_jump") = r.width_at_jump, py::arg("detailed_ratio") = r.detailed_ratio,
                        py::arg("headline_ratio") = r.headline_ratio,
                        py::arg("relaxation_factor") = r.relaxation_factor, py::arg("pass") = r.pass);
      },
      py::arg("g"), py::arg("kappa_a"), py::arg("kappa_b"), py::arg("w"), py::arg("u"));

  m.def(
      "canonical_config", [](const std::string& text) { return config_to_json(parse_config(text)).dump(); },
      py::arg("text"));
  m.def(
      "run_experiment",
      [](const std::string& text, const std::string& out) {
        const ExperimentConfig c = parse_config(text);
        py::gil_scoped_release release;
        return manifest_text(run_experiment(c, out.empty() ? c.output : out));
      },
      py::arg("config"), py::arg("out") = "");
  m.def(
      "run_criteria",
      [](const std::vector<int>& ids, std::uint64_t seed, Index threads) {
        ValidationConfig c;
        c.criteria = ids;
        c.seed = seed;
        c.threads = threads;
        std::vector<CriterionResult> results;
        {
          py::gil_scoped_release release;
          results = run_validation(c);
        }
        Json out = Json::array();
        for (const CriterionResult& r : results) out.push_back(criterion_json(r));
        return out.dump();
      },
      py::arg("criteria"), py::arg("seed") = 1, py::arg("threads") = 1);
}
