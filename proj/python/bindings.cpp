// Thin bindings: configs travel as YAML text, reports as JSON text that the
// Python package decodes.

#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ergoloop/cli.hpp"
#include "ergoloop/config.hpp"
#include "ergoloop/ergodicity.hpp"
#include "ergoloop/fairness.hpp"
#include "ergoloop/io.hpp"
#include "ergoloop/stats.hpp"

namespace py = pybind11;
using namespace ergoloop;

namespace {

SystemConfig with_overrides(const std::string& yaml, std::optional<std::uint64_t> seed,
                            std::optional<std::size_t> trials, std::optional<std::size_t> iterations)
{
    SystemConfig c = parse_config(yaml);
    if (seed) c.analysis.seed = *seed;
    if (trials) c.analysis.trials = *trials;
    if (iterations) c.analysis.iterations = *iterations;
    return c;
}

} // namespace

PYBIND11_MODULE(_ergoloop, m)
{
    m.doc() = "Closed-loop simulation with stochastic agent populations";
    m.attr("__version__") = std::string(kToolVersion);

    static py::exception<Error> error_type(m, "Error");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            const std::string message = std::string(to_string(e.code())) + ": " + e.what();
            py::set_error(error_type, message.c_str());
        }
    });

    m.def("normalize_config", [](const std::string& yaml) { return emit_config(parse_config(yaml)); },
          py::arg("yaml"), "Parse a YAML configuration and return its canonical form.");

    m.def("export_dot", [](const std::string& yaml) { return export_dot(build_graph(parse_config(yaml))); },
          py::arg("yaml"));

    m.def(
        "simulate",
        [](const std::string& yaml, std::optional<std::size_t> iterations, std::optional<std::uint64_t> seed) {
            const SystemConfig c = with_overrides(yaml, seed, std::nullopt, iterations);
            const Interconnection loop = build_interconnection(c);
            const SystemState start = c.analysis.initial_conditions.empty()
                                          ? initial_state(loop)
                                          : initial_state(loop, c.analysis.initial_conditions.front());
            std::vector<std::vector<double>> out;
            for (const auto& p : simulate(loop, start, c.analysis.iterations, c.analysis.seed)) {
                out.push_back(p.checkpoint);
            }
            return out;
        },
        py::arg("yaml"), py::arg("iterations") = py::none(), py::arg("seed") = py::none(),
        "Checkpoint signal at k = 0..iterations.");

    m.def(
        "estimate_contraction",
        [](const std::string& yaml, std::optional<std::size_t> trials, std::optional<std::uint64_t> seed) {
            const SystemConfig c = with_overrides(yaml, seed, trials, std::nullopt);
            ContractionEstimate est;
            {
                py::gil_scoped_release release;
                est = estimate_contraction_factor(build_interconnection(c), contraction_options(c));
            }
            nlohmann::json j = to_json(est);
            j["certificate"] = std::string(to_string(certify(est, c.analysis.z)));
            return j.dump();
        },
        py::arg("yaml"), py::arg("trials") = py::none(), py::arg("seed") = py::none());

    m.def(
        "fairness",
        [](const std::string& yaml, std::optional<std::size_t> trials, std::optional<std::uint64_t> seed) {
            const SystemConfig c = with_overrides(yaml, seed, trials, std::nullopt);
            const auto& a = c.analysis;
            const Interconnection loop = build_interconnection(c);
            const ClassAssignment classes = ClassAssignment::by_population(loop, a.classes);
            FairnessOptions options;
            options.trials = a.trials;
            options.seed = a.seed;
            options.conditions = a.initial_conditions;
            options.z = a.z;
            options.confidence = a.confidence;
            FairnessReport report;
            py::gil_scoped_release release;
            report.treatment = equal_treatment_report(loop, classes, a.treatment_step, options);
            if (options.conditions.size() >= 2) {
                report.impact = equal_impact_report(loop, classes, a.horizon, a.burn_in, options);
                report.robustness = robustness_report(loop, a.burn_in, a.window, options);
            }
            return to_json(report).dump();
        },
        py::arg("yaml"), py::arg("trials") = py::none(), py::arg("seed") = py::none());

    m.def(
        "kde",
        [](const std::vector<double>& samples, std::optional<double> bandwidth, const std::string& kernel,
           std::size_t grid_points) {
            const double h = bandwidth ? *bandwidth : silverman_bandwidth(samples);
            const KdeEstimate est =
                kde_estimate(samples, h, kde_grid(samples, h, 6.0, grid_points), kernel_from_string(kernel));
            return py::make_tuple(est.grid, est.density, h);
        },
        py::arg("samples"), py::arg("bandwidth") = py::none(), py::arg("kernel") = "gaussian",
        py::arg("grid_points") = 512, "Returns (grid, density, bandwidth).");

    m.def("silverman_bandwidth", [](const std::vector<double>& s) { return silverman_bandwidth(s); });
    m.def("distribution_distance",
          [](const std::vector<double>& a, const std::vector<double>& b) { return distribution_distance(a, b); });

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::vector<const char*> argv{"ergoloop"};
            for (const auto& a : args) argv.push_back(a.c_str());
            std::ostringstream out, err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command line in-process; returns (exit code, stdout, stderr).");
}
