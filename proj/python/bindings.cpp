#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "weaklp/corollaries.hpp"
#include "weaklp/covering.hpp"
#include "weaklp/experiments.hpp"
#include "weaklp/levelset.hpp"
#include "weaklp/seminorms.hpp"

namespace py = pybind11;
using namespace weaklp;

namespace {

Point to_point(const std::vector<double>& x, int dim) {
  if (static_cast<int>(x.size()) != dim) throw InvalidParameter("expected " + std::to_string(dim) + " coordinates");
  Point p{};
  for (int i = 0; i < dim; ++i) p[i] = x[i];
  return p;
}

py::tuple result(const QuadratureResult& q) { return py::make_tuple(q.value, q.error_estimate); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Weak-L^p difference quotient estimators";
  m.attr("__version__") = kToolVersion;

  py::register_exception<InvalidParameter>(m, "InvalidParameter", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<ConsistencyError>(m, "ConsistencyError", PyExc_RuntimeError);

  py::class_<ScalarField>(m, "Field")
      .def_property_readonly("dim", &ScalarField::dimension)
      .def_property_readonly("label", &ScalarField::label)
      .def_property_readonly("lip", &ScalarField::lip)
      .def_property_readonly("sup", &ScalarField::sup_norm)
      .def("__call__",
           [](const ScalarField& u, const std::vector<double>& x) { return u(to_point(x, u.dimension())); })
      .def("gradient",
           [](const ScalarField& u, const std::vector<double>& x) {
             Point g = u.gradient(to_point(x, u.dimension()));
             return std::vector<double>(g.begin(), g.begin() + u.dimension());
           })
      .def("scaled", [](const ScalarField& u, double c) { return scaled(u, c); })
      .def("__repr__", [](const ScalarField& u) { return "<Field " + u.label() + ">"; });

  m.def("catalogue_field", &catalogue_field, py::arg("name"), py::arg("dim"));
  m.def("catalogue_names", &catalogue_names, py::arg("dim"));
  m.def(
      "field_from_json", [](const std::string& text) { return field_from_json(parse_config_text(text)); },
      py::arg("spec"));

  m.def("k_closed_form", &k_closed_form, py::arg("p"), py::arg("dim"));
  m.def(
      "k_constant",
      [](double p, int dim) {
        SphereConstants k = k_constant(p, dim);
        return py::dict(py::arg("k") = k.k, py::arg("k_quad") = k.k_quadrature, py::arg("sigma") = k.sigma);
      },
      py::arg("p"), py::arg("dim"));
  m.def("sphere_area", &sphere_area, py::arg("dim"));
  m.def("default_alpha", &default_alpha, py::arg("dim"), py::arg("p"));
  m.def("limit_prediction", &limit_prediction, py::arg("u"), py::arg("p"));

  m.def(
      "pair_measure",
      [](const ScalarField& u, double p, double lambda, std::optional<double> alpha, int workers) {
        LevelSetQuery q{u, p, alpha.value_or(default_alpha(u.dimension(), p)), lambda};
        PolarOptions po;
        po.workers = workers;
        return result(pair_measure_polar(q, po));
      },
      py::arg("u"), py::arg("p"), py::arg("lam"), py::arg("alpha") = py::none(), py::arg("workers") = 0,
      "mu(E_lambda) by the polar estimator as (value, error).");
  m.def(
      "pair_measure_mc",
      [](const ScalarField& u, double p, double lambda, std::uint64_t n, std::uint64_t seed, int workers) {
        return result(pair_measure_mc(LevelSetQuery::standard(u, p, lambda), n, RandomStream(seed), workers));
      },
      py::arg("u"), py::arg("p"), py::arg("lam"), py::arg("n"), py::arg("seed"), py::arg("workers") = 0);
  m.def(
      "weak_quasinorm",
      [](const ScalarField& u, double p, const std::vector<double>& lambdas, int refine) {
        WeakQuasinorm w = weak_quasinorm(distribution_profile(u, p, default_alpha(u.dimension(), p), lambdas), refine);
        return py::dict(py::arg("sup") = w.value, py::arg("quasinorm") = w.quasinorm,
                        py::arg("lambda_at_sup") = w.lambda_at_sup, py::arg("at_grid_edge") = w.at_grid_edge);
      },
      py::arg("u"), py::arg("p"), py::arg("lambdas"), py::arg("refine") = 6);
  m.def(
      "gagliardo",
      [](const ScalarField& u, double s, double p, double cutoff) {
        return result(gagliardo(SeminormQuery{u, s, p, cutoff}));
      },
      py::arg("u"), py::arg("s"), py::arg("p"), py::arg("inner_cutoff") = 0.0);
  m.def(
      "gradient_lp_norm", [](const ScalarField& u, double p) { return result(gradient_lp_norm(u, p)); },
      py::arg("u"), py::arg("p"));
  m.def(
      "vitali_select",
      [](const std::vector<std::pair<double, double>>& family) {
        std::vector<Interval> in;
        for (const auto& [a, b] : family) in.push_back(Interval{a, b});
        std::vector<std::pair<double, double>> out;
        for (const Interval& j : vitali_select(in)) out.emplace_back(j.left, j.right);
        return out;
      },
      py::arg("intervals"), "Greedy Vitali selection (longest first) of closed intervals.");
  m.def(
      "check_cor_1_4", [](const ScalarField& u, double p) { return check_cor_1_4(u, p).ratio; }, py::arg("u"),
      py::arg("p"));

  m.def(
      "run_experiment_json",
      [](const std::string& config, int workers, std::optional<std::uint64_t> seed) {
        RunOptions opt;
        opt.workers = workers;
        opt.seed = seed;
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(parse_config_text(config), opt);
        }
        py::dict tables;
        for (const CsvTable& t : r.tables) tables[py::str(t.name)] = t.text();
        return py::make_tuple(r.report.dump(), tables, exit_code(r.status));
      },
      py::arg("config"), py::arg("workers") = 0, py::arg("seed") = py::none());
}
