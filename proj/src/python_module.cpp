#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "refute/cli.hpp"
#include "refute/data.hpp"
#include "refute/dilation.hpp"
#include "refute/errors.hpp"
#include "refute/late.hpp"
#include "refute/roy.hpp"
#include "refute/sim.hpp"
#include "refute/structures.hpp"

namespace py = pybind11;
using namespace refute;

namespace {

Sample make_sample(std::vector<double> y, std::vector<int> d, std::vector<int> z) {
    Sample s{std::move(y), std::move(d), std::move(z)};
    s.validate();
    return s;
}

RoyDistribution roy_cells(const std::vector<double>& cells) {
    if (cells.size() != 8) throw DataError("expected 8 cell probabilities, got " + std::to_string(cells.size()));
    RoyDistribution f;
    std::copy(cells.begin(), cells.end(), f.p.begin());
    f.validate();
    return f;
}

}  // namespace

// JSON crosses the boundary as text; the python package decodes it.
PYBIND11_MODULE(_core, m) {
    m.doc() = "refute native core";

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<DataError>(m, "DataError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<WeakIdentification>(m, "WeakIdentification", base.ptr());
    py::register_exception<ConsistencyError>(m, "ConsistencyError", base.ptr());

    m.def(
        "run",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = run(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run a CLI command in-process; returns (exit code, stdout, stderr).");

    m.def(
        "late_point",
        [](std::vector<double> y, std::vector<int> d, std::vector<int> z, const std::string& config) {
            Sample s = make_sample(std::move(y), std::move(d), std::move(z));
            RunConfig cfg = config.empty() ? default_empirical_config(s) : RunConfig::from_json(json::parse(config));
            cfg.at(s.size());
            LatePointResult r = late_point(s, cfg);
            json j = {{"config", cfg.to_json()}, {"late", r.est.to_json()}, {"diagnostic", r.diagnostic.to_json()}};
            return j.dump();
        },
        py::arg("y"), py::arg("d"), py::arg("z"), py::arg("config") = "");

    m.def(
        "wald",
        [](std::vector<double> y, std::vector<int> d, std::vector<int> z, double alpha) {
            return wald_estimate(make_sample(std::move(y), std::move(d), std::move(z)), alpha).to_json().dump();
        },
        py::arg("y"), py::arg("d"), py::arg("z"), py::arg("alpha") = 0.05);

    m.def(
        "true_identified_late",
        [](const std::string& design) {
            PopulationLate p = true_identified_late(load_design(design));
            return py::dict(py::arg("late") = p.late, py::arg("mass1") = p.mass1, py::arg("mass0") = p.mass0);
        },
        py::arg("design") = "builtin:normal-mix");

    m.def(
        "min_efficiency_loss", [](const std::vector<double>& cells) { return min_efficiency_loss(roy_cells(cells)); },
        py::arg("cells"), "Cells ordered p(y,d,z) with index 4y + 2d + z.");
    m.def(
        "roy_bounds", [](const std::vector<double>& cells) { return potential_outcome_bounds(roy_cells(cells)).to_json().dump(); },
        py::arg("cells"));

    m.def(
        "critical_value",
        [](const std::vector<std::vector<double>>& columns, int B, double alpha, std::uint64_t seed) {
            py::gil_scoped_release release;
            return bootstrap_critical_value(columns, B, alpha, seed);
        },
        py::arg("columns"), py::arg("B") = 1000, py::arg("alpha") = 0.05, py::arg("seed") = 1);

    m.def(
        "analyze_space",
        [](const std::string& space, const std::vector<std::string>& A, std::optional<std::vector<std::string>> ext,
           std::optional<std::vector<std::string>> H) {
            FiniteSpace sp = FiniteSpace::from_json(json::parse(space));
            std::optional<IndexSet> e, h;
            if (ext) e = sp.lookup(*ext);
            if (H) h = sp.lookup(*H);
            return analyze_space(sp, sp.lookup(A), e, h).dump();
        },
        py::arg("space"), py::arg("A"), py::arg("ext") = std::nullopt, py::arg("H") = std::nullopt);
}
