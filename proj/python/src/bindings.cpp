#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>

#include "bahadur_lab/bahadur.hpp"
#include "bahadur_lab/config.hpp"
#include "bahadur_lab/errors.hpp"
#include "bahadur_lab/montecarlo.hpp"
#include "bahadur_lab/normal.hpp"
#include "bahadur_lab/sample.hpp"
#include "bahadur_lab/statistics.hpp"

namespace py = pybind11;
using namespace bahadur_lab;

namespace {

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

py::dict tilt_dict(const TiltResult& r) {
  const char* status = r.status == TiltStatus::Converged    ? "converged"
                       : r.status == TiltStatus::Infeasible ? "infeasible"
                                                            : "max_iterations";
  py::dict d;
  d["status"] = status;
  d["kl"] = r.kl;
  d["weights"] = r.weights;
  d["multipliers"] = r.multipliers;
  d["iterations"] = r.iterations;
  d["kkt_residual"] = r.kkt_residual;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bahadur slopes and Monte Carlo p-values for normality tests";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", error.ptr());
  py::register_exception<DegenerateSample>(m, "DegenerateSample", error.ptr());
  py::register_exception<DegenerateTail>(m, "DegenerateTail", error.ptr());
  py::register_exception<UndefinedMoments>(m, "UndefinedMoments", error.ptr());
  py::register_exception<Unsupported>(m, "Unsupported", error.ptr());
  py::register_exception<NumericalFailure>(m, "NumericalFailure", error.ptr());
  py::register_exception<Infeasible>(m, "Infeasible", error.ptr());
  auto config_error = py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<ParseError>(m, "ParseError", config_error.ptr());
  py::register_exception<MissingKey>(m, "MissingKey", config_error.ptr());
  py::register_exception<BadValue>(m, "BadValue", config_error.ptr());
  py::register_exception<IoError>(m, "IoError", error.ptr());

  m.def("std_normal_cdf", &std_normal_cdf);
  m.def("std_normal_quantile", &std_normal_quantile);

  py::class_<AlternativeSpec>(m, "Alternative")
      .def(py::init([](const std::string& family, const std::vector<double>& params) {
             return AlternativeSpec::from_name(family, params);
           }),
           py::arg("family"), py::arg("params") = std::vector<double>{})
      .def_property_readonly("label", &AlternativeSpec::label)
      .def_property_readonly("family", &AlternativeSpec::family_name)
      .def("cdf", &AlternativeSpec::cdf)
      .def("quantile", &AlternativeSpec::quantile)
      .def("moments",
           [](const AlternativeSpec& s) {
             const auto mo = s.moments();
             return py::make_tuple(mo.mean, mo.sd);
           })
      .def("__eq__", [](const AlternativeSpec& a, const AlternativeSpec& b) { return a == b; })
      .def("__repr__", [](const AlternativeSpec& s) { return "Alternative(" + s.label() + ")"; });
  m.def("table_alternatives", &table_alternatives);

  py::class_<WeightFunction>(m, "Weight")
      .def_static("unit", &WeightFunction::unit)
      .def_static("anderson_darling", &WeightFunction::anderson_darling)
      .def_static("table", &WeightFunction::table, py::arg("knots"), py::arg("values"))
      .def("scaled", &WeightFunction::scaled)
      .def("__call__", &WeightFunction::operator())
      .def_property_readonly("name", &WeightFunction::name)
      .def("__eq__", [](const WeightFunction& a, const WeightFunction& b) { return a == b; });

  py::class_<TestKind>(m, "Test")
      .def(py::init([](const std::string& name, const WeightFunction& psi, double beta) {
             return TestKind::parse(name, psi, beta);
           }),
           py::arg("name"), py::arg("psi") = WeightFunction::unit(), py::arg("beta") = 1.0)
      .def_property_readonly("label", &TestKind::label)
      .def("__eq__", [](const TestKind& a, const TestKind& b) { return a == b; })
      .def("__repr__", [](const TestKind& t) { return "Test(" + t.label() + ")"; });

  m.def(
      "statistic",
      [](const TestKind& test, std::vector<double> data) {
        return evaluate_statistic(test, Sample(std::move(data)));
      },
      py::arg("test"), py::arg("data"), "Score data with a test (large values reject).");
  m.def(
      "lilliefors_statistic",
      [](std::vector<double> data, const WeightFunction& psi) {
        return lilliefors_statistic(Sample(std::move(data)), psi);
      },
      py::arg("data"), py::arg("psi") = WeightFunction::unit());
  m.def(
      "weighted_cvm_statistic",
      [](std::vector<double> data, const WeightFunction& psi) {
        return weighted_cvm_statistic(Sample(std::move(data)), psi);
      },
      py::arg("data"), py::arg("psi") = WeightFunction::unit());
  m.def("shapiro_wilk_w", [](std::vector<double> data) {
    return shapiro_wilk_w(Sample(std::move(data)));
  });

  m.def(
      "mean_pvalue",
      [](std::vector<double> null, const std::vector<double>& alt) {
        return mean_pvalue(sorted(std::move(null)), alt);
      },
      py::arg("null"), py::arg("alt"));
  m.def(
      "estimate_mean_pvalue",
      [](std::vector<double> null, const std::vector<double>& alt) {
        const auto e = estimate_mean_pvalue(sorted(std::move(null)), alt);
        return py::make_tuple(e.estimate, e.std_error);
      },
      py::arg("null"), py::arg("alt"));

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("replications", &ExperimentConfig::replications)
      .def_readwrite("sample_sizes", &ExperimentConfig::sample_sizes)
      .def_readwrite("tests", &ExperimentConfig::tests)
      .def_readwrite("alternatives", &ExperimentConfig::alternatives)
      .def_readwrite("bhep_beta", &ExperimentConfig::bhep_beta)
      .def_readwrite("output", &ExperimentConfig::output_path)
      .def("__eq__", [](const ExperimentConfig& a, const ExperimentConfig& b) { return a == b; });
  m.def("parse_config_text", &parse_config_text);
  m.def("parse_config", &parse_config);
  m.def("emit_config", &emit_config);
  m.def(
      "run_experiment",
      [](const ExperimentConfig& config, unsigned threads) {
        ExperimentResult result;
        {
          py::gil_scoped_release release;
          result = run_experiment(config, threads);
        }
        return format_table(result.cells, config.seed, config.replications);
      },
      py::arg("config"), py::arg("threads") = 1, "Run the grid and return the CSV text.");

  m.def("ks_rate_G", &ks_rate_G);
  m.def("orlicz_gauge_indicator", &orlicz_gauge_indicator);
  m.def("sup_discrepancy_simple", &sup_discrepancy_simple, py::arg("f"), py::arg("f0"));
  m.def("lilliefors_discrepancy", &lilliefors_discrepancy, py::arg("alternative"),
        py::arg("psi") = WeightFunction::unit());
  m.def("ad_discrepancy", &ad_discrepancy, py::arg("alternative"),
        py::arg("psi") = WeightFunction::unit());

  py::class_<SlopeEstimate>(m, "SlopeEstimate")
      .def_readonly("discrepancy", &SlopeEstimate::discrepancy)
      .def_readonly("exponent", &SlopeEstimate::exponent)
      .def_readonly("slope", &SlopeEstimate::slope)
      .def_property_readonly("kind", [](const SlopeEstimate& s) {
        return s.kind == SlopeEstimate::Kind::Exact ? "exact" : "upper_bound";
      });

  py::class_<GridParams>(m, "GridParams")
      .def(py::init<>())
      .def_property(
          "atoms", [](const GridParams& g) { return g.reference.atoms; },
          [](GridParams& g, std::size_t m) { g.reference.atoms = m; })
      .def_readwrite("t_points", &GridParams::t_points)
      .def_readwrite("t_min", &GridParams::t_min)
      .def_readwrite("t_max", &GridParams::t_max)
      .def_readwrite("partition_points", &GridParams::partition_points)
      .def_readwrite("a_divisions", &GridParams::a_divisions)
      .def_readwrite("b_divisions", &GridParams::b_divisions)
      .def_readwrite("moment_constraints", &GridParams::moment_constraints)
      .def_readwrite("pinned_moments", &GridParams::pinned_moments)
      .def_readwrite("threads", &GridParams::threads)
      .def_readonly("refinements", &GridParams::refinements)
      .def("refined", &GridParams::refined);

  m.def(
      "slope",
      [](const AlternativeSpec& alt, const TestKind& test, const GridParams& grid) {
        py::gil_scoped_release release;
        return test_slope(alt, test, grid);
      },
      py::arg("alternative"), py::arg("test"), py::arg("grid") = GridParams{});
  m.def(
      "gli_upper_bound",
      [](double u, const WeightFunction& psi, const GridParams& grid) {
        py::gil_scoped_release release;
        return gli_upper_bound(u, psi, grid);
      },
      py::arg("u"), py::arg("psi") = WeightFunction::unit(), py::arg("grid") = GridParams{});
  m.def(
      "gad_upper_bound",
      [](double u, const WeightFunction& psi, const GridParams& grid) {
        py::gil_scoped_release release;
        return gad_upper_bound(u, psi, grid);
      },
      py::arg("u"), py::arg("psi") = WeightFunction::unit(), py::arg("grid") = GridParams{});

  m.def(
      "min_kl_tilt",
      [](std::vector<double> support, std::vector<double> weights,
         const std::vector<std::tuple<std::vector<double>, std::string, double>>& constraints) {
        const DiscreteMeasure reference(std::move(support), std::move(weights));
        ConstraintSet set;
        for (const auto& [coeffs, relation, bound] : constraints) {
          if (relation == "=" || relation == "==") {
            set.equal(coeffs, bound);
          } else if (relation == ">=") {
            set.at_least(coeffs, bound);
          } else {
            throw DomainError("relation must be '=' or '>='");
          }
        }
        return tilt_dict(min_kl_tilt(reference, set));
      },
      py::arg("support"), py::arg("weights"), py::arg("constraints"),
      "constraints: list of (coefficients, '=' or '>=', bound).");
}
