#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "finsler/geometry.hpp"
#include "finsler/metric.hpp"
#include "finsler/report.hpp"

namespace py = pybind11;

namespace {

using finsler::geom::CurvatureBundle;
using finsler::geom::Depth;
using finsler::geom::TMPoint;
using finsler::report::RunConfig;
using finsler::zoo::FinslerMetric;

Depth depth_from(const std::string& s) {
    if (s == "base") return Depth::Base;
    if (s == "first") return Depth::First;
    if (s == "second") return Depth::Second;
    throw std::invalid_argument("depth must be base, first or second");
}

RunConfig make_config(const std::string& metric, int n, double kappa, int points,
                      std::uint64_t seed, int order, double eps_fit, double eps_deg,
                      double eps_form, double eps_gram, const std::string& depth) {
    RunConfig cfg;
    cfg.metric = metric;
    cfg.n = n;
    cfg.kappa = kappa;
    cfg.points = points;
    cfg.seed = seed;
    cfg.order = order;
    cfg.eps.fit = eps_fit;
    cfg.eps.deg = eps_deg;
    cfg.eps.form = eps_form;
    cfg.eps.gram = eps_gram;
    cfg.depth = depth_from(depth);
    return cfg;
}

py::dict bundle_to_dict(const CurvatureBundle& b) {
    py::dict d;
    d["n"] = b.n;
    d["g"] = b.g;
    d["g_inv"] = b.g_inv;
    d["cartan"] = b.cartan;
    d["spray"] = b.spray;
    d["N"] = b.N;
    d["Gamma"] = b.Gamma;
    d["Rhat"] = b.Rhat;
    d["R"] = b.R;
    d["Ric"] = b.Ric;
    d["Gten"] = b.Gten;
    d["Cten"] = b.Cten;
    d["r"] = b.r;
    d["dR"] = b.dR;
    d["dRic"] = b.dRic;
    d["dC"] = b.dC;
    d["dr"] = b.dr;
    d["ddR"] = b.ddR;
    d["ddRic"] = b.ddRic;
    d["ddC"] = b.ddC;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Cartan-connection curvature and recurrence classification for Finsler metrics";

    py::register_exception<finsler::zoo::MetricError>(m, "MetricError", PyExc_ValueError);
    py::register_exception<finsler::geom::DegeneratePoint>(m, "DegeneratePointError",
                                                           PyExc_ValueError);
    py::register_exception<finsler::report::MetricLoadError>(m, "MetricLoadError",
                                                             PyExc_ValueError);
    py::register_exception<finsler::report::SamplingError>(m, "SamplingError", PyExc_ValueError);

    py::class_<FinslerMetric>(m, "Metric")
        .def_readonly("n", &FinslerMetric::n)
        .def_readonly("label", &FinslerMetric::label)
        .def_readonly("family", &FinslerMetric::family)
        .def("__repr__", [](const FinslerMetric& mm) {
            return "<finsler.Metric " + mm.label + " n=" + std::to_string(mm.n) + ">";
        });

    m.def(
        "build_metric",
        [](const std::string& family, int n, double kappa) {
            return finsler::zoo::build(finsler::zoo::builtin_spec(family, n, kappa));
        },
        py::arg("family"), py::arg("n") = 3, py::arg("kappa") = 1.0,
        "Build one of the builtin metric families.");

    m.def(
        "metric_from_text",
        [](const std::string& text) {
            return finsler::zoo::build(finsler::zoo::parse_metric_file(text));
        },
        py::arg("text"), "Build a metric from the line-oriented metric file format.");

    m.def(
        "energy",
        [](const FinslerMetric& mm, const std::vector<double>& x, const std::vector<double>& y) {
            return mm.energy_value(x, y);
        },
        py::arg("metric"), py::arg("x"), py::arg("y"),
        "Evaluate the squared length function at a point.");

    m.def(
        "curvature",
        [](const FinslerMetric& mm, const std::vector<double>& x, const std::vector<double>& y,
           const std::string& depth, int order) {
            TMPoint p{x, y};
            return bundle_to_dict(finsler::geom::curvature(mm, p, depth_from(depth), order));
        },
        py::arg("metric"), py::arg("x"), py::arg("y"), py::arg("depth") = "second",
        py::arg("order") = 8,
        "Full curvature apparatus at one point; tensors returned as flat row-major lists.");

#define FINSLER_REPORT_FN(pyname, fn)                                                            \
    m.def(                                                                                       \
        pyname,                                                                                  \
        [](const std::string& metric, int n, double kappa, int points, std::uint64_t seed,       \
           int order, double eps_fit, double eps_deg, double eps_form, double eps_gram,          \
           const std::string& depth) {                                                           \
            auto cfg = make_config(metric, n, kappa, points, seed, order, eps_fit, eps_deg,      \
                                   eps_form, eps_gram, depth);                                   \
            auto doc = finsler::report::fn(cfg);                                                 \
            return py::make_tuple(doc.json, doc.exit_code);                                      \
        },                                                                                       \
        py::arg("metric"), py::arg("n") = 3, py::arg("kappa") = 1.0, py::arg("points") = 8,      \
        py::arg("seed") = 0, py::arg("order") = 8, py::arg("eps_fit") = 1e-7,                    \
        py::arg("eps_deg") = 1e-10, py::arg("eps_form") = 1e-9, py::arg("eps_gram") = 1e-10,     \
        py::arg("depth") = "second")

    FINSLER_REPORT_FN("classify_json", run_classify);
    FINSLER_REPORT_FN("verify_json", run_verify);
    FINSLER_REPORT_FN("diagram_json", run_diagram);
#undef FINSLER_REPORT_FN

    m.def(
        "oracle_json",
        [](const std::string& metric, int n, double kappa, int points, std::uint64_t seed,
           int order, const std::string& depth) {
            auto cfg = make_config(metric, n, kappa, points, seed, order, 1e-7, 1e-10, 1e-9,
                                   1e-10, depth);
            auto doc = finsler::report::run_oracle(cfg);
            return py::make_tuple(doc.json, doc.exit_code);
        },
        py::arg("metric"), py::arg("n") = 3, py::arg("kappa") = 1.0, py::arg("points") = 4,
        py::arg("seed") = 0, py::arg("order") = 8, py::arg("depth") = "first");

    m.attr("__version__") = finsler::report::kToolVersion;
}
