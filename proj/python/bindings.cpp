#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "overlay_phase/analytics.hpp"
#include "overlay_phase/classifier.hpp"
#include "overlay_phase/commands.hpp"
#include "overlay_phase/profiles.hpp"
#include "overlay_phase/queue.hpp"
#include "overlay_phase/simulator.hpp"
#include "overlay_phase/tracegen.hpp"

namespace py = pybind11;
using namespace overlay_phase;

namespace {

const char* kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Input: return "input";
        case ErrorKind::Model: return "model";
        case ErrorKind::Invariant: return "invariant";
        case ErrorKind::EmptyInput: return "empty-input";
    }
    return "internal";
}

std::vector<PhaseState> to_states(const std::vector<std::pair<int, int>>& points) {
    std::vector<PhaseState> out;
    out.reserve(points.size());
    for (auto [l, u] : points) out.push_back({l, u});
    return out;
}

py::tuple dist_tuple(const queue::EquilibriumDist& d) {
    return py::make_tuple(d.floor, d.vector());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Degree-phase analytics and models for two-tier overlays";

    // Raised as overlay_phase.Error(message, kind); a ValueError subclass.
    static PyObject* error_type =
        PyErr_NewException("overlay_phase._core.Error", PyExc_ValueError, nullptr);
    m.attr("Error") = py::handle(error_type);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::tuple args = py::make_tuple(e.what(), kind_name(e.kind()));
            PyErr_SetObject(error_type, args.ptr());
        }
    });

    m.def("version", [] { return std::string(commands::version()); });
    m.def("profile_names", &builtin_profile_names);

    py::class_<queue::QueueParams>(m, "QueueParams")
        .def(py::init([](double lambda, double mu, int m_, int k) {
                 queue::QueueParams p{lambda, mu, m_, k};
                 p.validate();
                 return p;
             }),
             py::arg("lam"), py::arg("mu"), py::arg("m"), py::arg("k") = 0)
        .def_readwrite("lam", &queue::QueueParams::lambda)
        .def_readwrite("mu", &queue::QueueParams::mu)
        .def_readwrite("m", &queue::QueueParams::m)
        .def_readwrite("k", &queue::QueueParams::k)
        .def("scaled", &queue::QueueParams::scaled, py::arg("dt"))
        .def_static(
            "leaf",
            [](double lambda, double mu, int leaf_max) {
                QueueLimits limits;
                limits.leaf_max = leaf_max;
                return queue::QueueParams::leaf(lambda, mu, limits);
            },
            py::arg("lam"), py::arg("mu"), py::arg("leaf_max") = 30)
        .def_static(
            "ultra",
            [](double lambda, double mu, int ultra_max, int ultra_active) {
                QueueLimits limits;
                limits.ultra_max = ultra_max;
                limits.ultra_active = ultra_active;
                return queue::QueueParams::ultra(lambda, mu, limits);
            },
            py::arg("lam"), py::arg("mu"), py::arg("ultra_max") = 32, py::arg("ultra_active") = 20)
        .def("__repr__", [](const queue::QueueParams& p) {
            return "QueueParams(lam=" + std::to_string(p.lambda) + ", mu=" + std::to_string(p.mu) +
                   ", m=" + std::to_string(p.m) + ", k=" + std::to_string(p.k) + ")";
        });

    m.def("limewire_model", [](bool literal) {
        const auto d = literal ? queue::DoubleModel::limewire_literal() : queue::DoubleModel::limewire();
        return py::make_tuple(d.leaf, d.ultra);
    }, py::arg("literal") = false, "(leaf, ultra) parameters calibrated from the LimeWire crawl");

    m.def("ctdm_generator", &queue::ctdm_generator);
    m.def("ctdm_transfer", &queue::ctdm_transfer, py::arg("params"), py::arg("dt") = 1.0);
    m.def("ctdm_equilibrium", [](const queue::QueueParams& p) { return dist_tuple(queue::ctdm_equilibrium(p)); },
          "(floor, probabilities over floor..cap)");
    m.def("bdtm_transfer", &queue::bdtm_transfer);
    m.def("bdtm_equilibrium", [](const queue::QueueParams& p) {
        return dist_tuple(queue::bdtm_equilibrium(queue::bdtm_transfer(p), p.floor()));
    });
    m.def("blocking_probability", &queue::blocking_probability);
    m.def("estimate_lambda", &queue::estimate_lambda, py::arg("q"), py::arg("u"));
    m.def("calibrate_mu", &queue::calibrate_mu, py::arg("mean_departures"), py::arg("mean_degree"));

    m.def("region_equilibrium", [](const Eigen::Matrix4d& g, double tolerance) {
        return Eigen::Vector4d(analytics::equilibrium(g, tolerance));
    }, py::arg("g"), py::arg("tolerance") = 1e-3);
    m.def("region_of", [](int leaf, int ultra, const std::string& profile) -> py::object {
        const auto r = analytics::region_of({leaf, ultra}, resolve_profile(profile));
        if (!r) return py::none();
        return py::str(std::string(to_string(*r)));
    }, py::arg("leaf"), py::arg("ultra"), py::arg("profile") = "limewire");

    m.def("classify", [](const std::vector<std::pair<int, int>>& trace, const std::string& profile) {
        const auto regions = classifier::regions_from(resolve_profile(profile));
        const auto states = to_states(trace);
        return std::string(to_string(classifier::classify(classifier::trace_attributes(states, regions))));
    }, py::arg("trace"), py::arg("profile") = "limewire", "Class name of a (leaf, ultra) trace");

    m.def("generate", [](const std::string& model, const queue::QueueParams& leaf,
                         const queue::QueueParams& ultra, std::pair<int, int> x0, std::int64_t steps,
                         std::uint64_t seed, std::uint64_t index) {
        tracegen::GenConfig c;
        c.model = tracegen::parse_model(model);
        c.leaf = leaf;
        c.ultra = ultra;
        c.x0 = {x0.first, x0.second};
        c.steps = steps;
        c.seed = seed;
        std::vector<tracegen::GeneratedStep> trace;
        {
            py::gil_scoped_release release;
            trace = tracegen::generate(c, index);
        }
        Eigen::Matrix<int, Eigen::Dynamic, 2, Eigen::RowMajor> out(trace.size(), 2);
        for (std::size_t i = 0; i < trace.size(); ++i) {
            out(static_cast<Eigen::Index>(i), 0) = trace[i].state.leaf;
            out(static_cast<Eigen::Index>(i), 1) = trace[i].state.ultra;
        }
        return out;
    }, py::arg("model"), py::arg("leaf"), py::arg("ultra"), py::arg("x0"), py::arg("steps"),
       py::arg("seed") = 1, py::arg("index") = 0, "(steps + 1, 2) array of (leaf, ultra) degrees");

    m.def("simulate", [](std::size_t peers, double hours, double attempt_scale, std::uint64_t seed) {
        sim::SimConfig c;
        c.peers = peers;
        c.duration_hours = hours;
        c.attempt_scale = attempt_scale;
        c.seed = seed;
        c.validate();
        sim::SimResult r;
        {
            py::gil_scoped_release release;
            r = sim::run(c);
        }
        py::list out;
        for (const auto& rec : r.records) {
            out.append(py::make_tuple(rec.peer_id(), rec.t(), std::string(to_string(rec.mode())),
                                      rec.state().leaf, rec.state().ultra));
        }
        return out;
    }, py::arg("peers") = 1000, py::arg("hours") = 23.0, py::arg("attempt_scale") = 1.0,
       py::arg("seed") = 1, "Crawl records as (peer, t, mode, leaf, ultra) tuples");

    m.def("model_report", [](bool literal, const std::string& out_dir) {
        commands::ModelOptions o;
        o.literal = literal;
        o.common.out_dir = out_dir;
        return commands::cmd_model(o).report;
    }, py::arg("literal") = false, py::arg("out_dir") = ".", "JSON text of the model command report");
}
