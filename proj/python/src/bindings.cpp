// Python bindings. JSON documents cross the boundary as strings; the Python
// package decodes them.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "eventreg/controllers.hpp"
#include "eventreg/events.hpp"
#include "eventreg/experiments.hpp"
#include "eventreg/models.hpp"

namespace py = pybind11;
namespace ex = eventreg::experiments;
namespace ev = eventreg::events;
namespace md = eventreg::models;

namespace {

ex::ExperimentSpec make_spec(const std::string &id, std::optional<std::uint64_t> seed,
                             const std::vector<std::pair<std::string, std::string>> &overrides,
                             const std::string &out_dir, bool force) {
    ex::ExperimentSpec spec;
    spec.id = id;
    spec.seed = seed;
    for (const auto &[k, v] : overrides)
        spec.overrides.emplace_back(k, ex::json::parse(v));
    spec.out_dir = out_dir;
    spec.force = force;
    return spec;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "eventreg simulation core";

    py::register_exception<ex::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ev::MetricError>(m, "MetricError", PyExc_ArithmeticError);

    py::class_<ev::EventTrain>(m, "EventTrain")
        .def(py::init([](std::vector<double> times, int trial_id, std::string label) {
                 ev::EventTrain t{trial_id, std::move(label), std::move(times)};
                 t.validate();
                 return t;
             }),
             py::arg("times"), py::arg("trial_id") = 0, py::arg("label") = "")
        .def_readonly("trial_id", &ev::EventTrain::trial_id)
        .def_readonly("label", &ev::EventTrain::label)
        .def_readonly("times", &ev::EventTrain::times)
        .def("__len__", &ev::EventTrain::size);

    py::class_<ev::MatchReport>(m, "MatchReport")
        .def_readonly("matched_fraction", &ev::MatchReport::matched_fraction)
        .def_readonly("jitter", &ev::MatchReport::jitter)
        .def_readonly("matched", &ev::MatchReport::matched)
        .def_readonly("unmatched_reference", &ev::MatchReport::unmatched_reference)
        .def_readonly("extra_test", &ev::MatchReport::extra_test);

    m.def(
        "detect_events",
        [](std::vector<double> t, std::vector<double> v, double threshold, bool up, double refractory) {
            return ev::detect_events(t, v, threshold, up ? ev::Direction::up : ev::Direction::down, refractory);
        },
        py::arg("times"), py::arg("values"), py::arg("threshold"), py::arg("up") = true, py::arg("refractory") = 0.0);
    m.def("match_trains", &ev::match_trains, py::arg("reference"), py::arg("test"), py::arg("window"));
    m.def("phase_offset", &ev::phase_offset, py::arg("a"), py::arg("b"));
    m.def("spurious_count", &ev::spurious_count, py::arg("baseline"), py::arg("test"), py::arg("window"));

    m.def(
        "fn_dynamics",
        [](double v, double i_L, double drive, double control, double disturbance, const std::string &preset) {
            return md::fn_dynamics({v, i_L}, drive, control, disturbance, md::fn_preset(preset));
        },
        py::arg("v"), py::arg("i_L"), py::arg("drive"), py::arg("control") = 0.0, py::arg("disturbance") = 0.0,
        py::arg("preset") = "fn-classic");
    m.def("if_time_to_threshold", &md::if_time_to_threshold, py::arg("x"), py::arg("drive"), py::arg("leak"));
    m.def("preset_names", &md::preset_names);

    m.def("catalog", [] {
        std::vector<std::tuple<std::string, std::string, std::string>> out;
        for (const auto &e : ex::catalog())
            out.emplace_back(e.id, e.figure, e.description);
        return out;
    });
    m.def("id_for_figure", &ex::id_for_figure);
    m.def("default_parameters_json", [](const std::string &id) { return ex::default_parameters(id).dump(); });
    m.def(
        "simulate_metrics",
        [](const std::string &id, std::optional<std::uint64_t> seed,
           const std::vector<std::pair<std::string, std::string>> &overrides) {
            const auto spec = make_spec(id, seed, overrides, "", false);
            py::gil_scoped_release release;
            return ex::simulate(spec).metrics;
        },
        py::arg("id"), py::arg("seed") = py::none(), py::arg("overrides") = std::vector<std::pair<std::string, std::string>>{});
    m.def(
        "run_experiment",
        [](const std::string &id, std::optional<std::uint64_t> seed,
           const std::vector<std::pair<std::string, std::string>> &overrides, const std::string &out_dir, bool force) {
            const auto spec = make_spec(id, seed, overrides, out_dir, force);
            ex::ResultSet rs;
            {
                py::gil_scoped_release release;
                rs = ex::run_experiment(spec);
            }
            return py::make_tuple(rs.out_dir, rs.metrics, rs.manifest.dump());
        },
        py::arg("id"), py::arg("seed") = py::none(),
        py::arg("overrides") = std::vector<std::pair<std::string, std::string>>{}, py::arg("out_dir") = "",
        py::arg("force") = false);
}
