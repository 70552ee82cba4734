#include "ergoloop/cli.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "ergoloop/config.hpp"
#include "ergoloop/fairness.hpp"
#include "ergoloop/io.hpp"
#include "parallel.hpp"

namespace ergoloop {

namespace fs = std::filesystem;

namespace {

// One verb invocation: loads the config, tracks written files and removes
// them again unless finish() is reached.
class Session {
public:
    Session(std::string command, const fs::path& config_path, const CliOverrides& overrides,
            fs::path out_dir)
        : out_dir_(std::move(out_dir))
    {
        manifest_.command = std::move(command);
        manifest_.config_path = config_path.string();
        manifest_.started = timestamp_now();
        std::ifstream in(config_path, std::ios::binary);
        if (!in) throw Error(ErrorCode::IoError, "cannot open '" + config_path.string() + "'");
        std::ostringstream buffer;
        buffer << in.rdbuf();
        const std::string text = buffer.str();
        manifest_.config_digest = sha256_hex(text);
        config_ = parse_config(text);

        auto& a = config_.analysis;
        if (overrides.seed) {
            a.seed = *overrides.seed;
            manifest_.overrides.push_back("seed=" + std::to_string(a.seed));
        }
        if (overrides.trials) {
            a.trials = *overrides.trials;
            manifest_.overrides.push_back("trials=" + std::to_string(a.trials));
        }
        if (overrides.iterations) {
            a.iterations = *overrides.iterations;
            manifest_.overrides.push_back("iterations=" + std::to_string(a.iterations));
        }
        manifest_.seed = a.seed;
    }

    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    ~Session()
    {
        if (finished_) return;
        std::error_code ec;
        for (const auto& p : written_) fs::remove(p, ec);
    }

    const SystemConfig& config() const { return config_; }
    SystemConfig& config() { return config_; }

    void write(const std::string& name, std::string_view content)
    {
        const fs::path path = out_dir_ / name;
        written_.push_back(path);
        write_text_file(path, content);
        manifest_.outputs.push_back(name);
    }

    void finish()
    {
        manifest_.finished = timestamp_now();
        write("manifest.json", to_json(manifest_).dump(2) + "\n");
        finished_ = true;
    }

private:
    fs::path out_dir_;
    SystemConfig config_;
    RunManifest manifest_;
    std::vector<fs::path> written_;
    bool finished_ = false;
};

SystemState start_state(const Interconnection& loop, const AnalysisConfig& a)
{
    return a.initial_conditions.empty() ? initial_state(loop)
                                        : initial_state(loop, a.initial_conditions.front());
}

} // namespace

int cmd_simulate(const fs::path& config, const CliOverrides& overrides, const fs::path& out_dir,
                 bool full_state, std::ostream& out)
{
    Session session("simulate", config, overrides, out_dir);
    const auto& a = session.config().analysis;
    const Interconnection loop = build_interconnection(session.config());
    const Trajectory trajectory = simulate(loop, start_state(loop, a), a.iterations, a.seed);
    session.write("trajectory.csv", trajectory_csv(loop, trajectory, full_state));
    session.finish();
    out << "simulated " << a.iterations << " passes; checkpoint "
        << format_signal(trajectory.back().checkpoint) << "\n";
    return kExitOk;
}

int cmd_certify(const fs::path& config, const CliOverrides& overrides, const fs::path& out_dir,
                std::ostream& out)
{
    Session session("certify", config, overrides, out_dir);
    const Interconnection loop = build_interconnection(session.config());
    const ContractionEstimate estimate =
        estimate_contraction_factor(loop, contraction_options(session.config()));
    const nlohmann::json j = to_json(estimate);
    session.write("contraction.json", j.dump(2) + "\n");
    session.write("contraction.csv", contraction_csv(estimate));
    session.finish();
    out << j.dump(2) << "\n";
    switch (certify(estimate, session.config().analysis.z)) {
    case Certificate::Contractive: return kExitOk;
    case Certificate::NonContractive: return kExitNonContractive;
    case Certificate::Inconclusive: return kExitInconclusive;
    }
    return kExitInconclusive;
}

int cmd_kde(const fs::path& config, const CliOverrides& overrides, const fs::path& out_dir,
            std::ostream& out)
{
    Session session("kde", config, overrides, out_dir);
    auto& a = session.config().analysis;
    if (overrides.iterations) a.burn_in = *overrides.iterations;
    if (a.trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be at least 1");
    const Interconnection base = build_interconnection(session.config());

    std::vector<std::optional<Signal>> signals;
    for (const auto& s : a.reference_signals) signals.emplace_back(s);
    if (signals.empty()) signals.emplace_back();

    nlohmann::json summary = nlohmann::json::array();
    for (std::size_t i = 0; i < signals.size(); ++i) {
        const Interconnection loop = signals[i] ? base.with_reference(*signals[i]) : base;
        const SystemState start = start_state(loop, a);
        std::vector<double> samples(a.trials);
        detail::parallel_for(a.trials, [&](std::size_t t) {
            Rng rng = Rng::stream(a.seed, StreamPurpose::Kde, t);
            SystemState s = start;
            for (std::size_t k = 0; k < a.burn_in; ++k) s = step(loop, s, rng);
            samples[t] = s.output(loop.checkpoint()).at(0);
        });
        const double h = a.bandwidth ? *a.bandwidth : silverman_bandwidth(samples);
        const auto grid = kde_grid(samples, h, 6.0, a.grid_points);
        const KdeEstimate est = kde_estimate(samples, h, grid, a.kernel);
        const std::string name = "kde_" + std::to_string(i) + ".csv";
        session.write(name, kde_csv(est));
        summary.push_back({
            {"reference", signals[i] ? nlohmann::json(*signals[i]) : nlohmann::json(nullptr)},
            {"file", name},
            {"bandwidth", h},
            {"kernel", std::string(to_string(a.kernel))},
            {"samples", samples.size()},
            {"burn_in", a.burn_in},
            {"integral", trapezoid(est.grid, est.density)},
        });
    }
    session.write("kde.json", summary.dump(2) + "\n");
    session.finish();
    out << "wrote " << signals.size() << " density grid(s)\n";
    return kExitOk;
}

int cmd_fairness(const fs::path& config, const CliOverrides& overrides, const fs::path& out_dir,
                 std::ostream& out)
{
    Session session("fairness", config, overrides, out_dir);
    const auto& a = session.config().analysis;
    const Interconnection loop = build_interconnection(session.config());
    const ClassAssignment classes = ClassAssignment::by_population(loop, a.classes);

    FairnessOptions options;
    options.trials = a.trials;
    options.seed = a.seed;
    options.conditions = a.initial_conditions;
    options.z = a.z;
    options.confidence = a.confidence;

    FairnessReport report;
    report.treatment = equal_treatment_report(loop, classes, a.treatment_step, options);
    if (options.conditions.size() >= 2) {
        report.impact = equal_impact_report(loop, classes, a.horizon, a.burn_in, options);
        report.robustness = robustness_report(loop, a.burn_in, a.window, options);
    }
    session.write("fairness.json", to_json(report).dump(2) + "\n");
    session.write("treatment_agents.csv", agent_rows_csv(report.treatment->agents));
    if (report.impact) session.write("impact_agents.csv", agent_rows_csv(report.impact->agents));
    session.finish();

    std::size_t flagged = 0;
    for (const auto& c : report.treatment->classes) flagged += c.pairwise_flagged ? 1 : 0;
    out << "equal treatment: " << flagged << " of " << report.treatment->classes.size()
        << " class(es) flagged\n";
    if (report.robustness) {
        out << "robustness: " << (report.robustness->ergodic_consistent ? "ergodic-consistent" : "not ergodic-consistent")
            << " (max KS " << format_double(report.robustness->max_statistic) << ", critical "
            << format_double(report.robustness->critical_value) << ")\n";
    }
    return kExitOk;
}

int cmd_export_dot(const fs::path& config, const fs::path& out_dir, std::ostream& out)
{
    Session session("export-dot", config, CliOverrides{}, out_dir);
    const std::string dot = export_dot(build_graph(session.config()));
    if (!out_dir.empty()) {
        session.write("graph.dot", dot);
        session.finish();
    }
    out << dot;
    return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Simulate and analyse closed loops with stochastic agent populations.", "ergoloop"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    std::string config_path;
    std::string out_dir = "results";
    CliOverrides overrides;
    bool full_state = false;

    auto common = [&](CLI::App* sub, bool analysis) {
        sub->add_option("--config", config_path, "Configuration file (YAML)")->required();
        if (!analysis) return;
        sub->add_option("--seed", overrides.seed, "Root seed");
        sub->add_option("--trials", overrides.trials, "Number of trials");
        sub->add_option("--iterations", overrides.iterations, "Passes per trial");
        sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
    };
    auto* simulate_cmd = app.add_subcommand("simulate", "Write one trajectory as CSV");
    common(simulate_cmd, true);
    simulate_cmd->add_flag("--full-state", full_state, "Add every node's output and memory");
    auto* certify_cmd = app.add_subcommand("certify", "Estimate the contraction factor");
    common(certify_cmd, true);
    auto* kde_cmd = app.add_subcommand("kde", "Density of the checkpoint after burn-in");
    common(kde_cmd, true);
    auto* fairness_cmd = app.add_subcommand("fairness", "Equal treatment, equal impact, robustness");
    common(fairness_cmd, true);
    auto* dot_cmd = app.add_subcommand("export-dot", "Print the graph in DOT");
    common(dot_cmd, false);
    std::string dot_out;
    dot_cmd->add_option("--out", dot_out, "Also write graph.dot and a manifest here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (*simulate_cmd) return cmd_simulate(config_path, overrides, out_dir, full_state, out);
        if (*certify_cmd) return cmd_certify(config_path, overrides, out_dir, out);
        if (*kde_cmd) return cmd_kde(config_path, overrides, out_dir, out);
        if (*fairness_cmd) return cmd_fairness(config_path, overrides, out_dir, out);
        if (*dot_cmd) return cmd_export_dot(config_path, dot_out, out);
    } catch (const Error& e) {
        err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}

} // namespace ergoloop
