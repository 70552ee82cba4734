#include "ergoloop/io.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>

#include <openssl/evp.h>
#include <unistd.h>

#include "ergoloop/error.hpp"

namespace ergoloop {

using nlohmann::json;

std::string format_double(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

namespace {

std::string join_signal(const Signal& s, char sep)
{
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += sep;
        out += format_double(s[i]);
    }
    return out;
}

} // namespace

std::string trajectory_csv(const Interconnection& loop, const Trajectory& trajectory,
                           bool full_state)
{
    const std::size_t dim = trajectory.empty() ? 1 : trajectory.front().checkpoint.size();
    // Memory width per node: the widest seen (moving-average windows fill up).
    std::vector<std::size_t> out_width(loop.size(), 0), mem_width(loop.size(), 0);
    if (full_state) {
        for (const auto& p : trajectory) {
            for (std::size_t i = 0; i < loop.size(); ++i) {
                out_width[i] = std::max(out_width[i], p.state.nodes[i].output.size());
                mem_width[i] = std::max(mem_width[i], p.state.nodes[i].memory.size());
            }
        }
    }

    std::string out = "k";
    for (std::size_t c = 0; c < dim; ++c) out += ",y" + std::to_string(c);
    for (std::size_t i = 0; i < loop.size(); ++i) {
        for (std::size_t c = 0; c < out_width[i]; ++c) out += "," + loop.id(i).str() + ".y" + std::to_string(c);
        for (std::size_t c = 0; c < mem_width[i]; ++c) out += "," + loop.id(i).str() + ".m" + std::to_string(c);
    }
    out += "\n";
    for (const auto& p : trajectory) {
        out += std::to_string(p.k);
        for (std::size_t c = 0; c < dim; ++c) out += "," + (c < p.checkpoint.size() ? format_double(p.checkpoint[c]) : "");
        for (std::size_t i = 0; i < loop.size(); ++i) {
            const auto& n = p.state.nodes[i];
            for (std::size_t c = 0; c < out_width[i]; ++c) out += "," + (c < n.output.size() ? format_double(n.output[c]) : "");
            for (std::size_t c = 0; c < mem_width[i]; ++c) out += "," + (c < n.memory.size() ? format_double(n.memory[c]) : "");
        }
        out += "\n";
    }
    return out;
}

std::string kde_csv(const KdeEstimate& estimate)
{
    std::string out = "z,density\n";
    for (std::size_t i = 0; i < estimate.grid.size(); ++i) {
        out += format_double(estimate.grid[i]) + "," + format_double(estimate.density[i]) + "\n";
    }
    return out;
}

std::string contraction_csv(const ContractionEstimate& estimate)
{
    std::string out = "reference,c_hat,std_error,ratios,pairs_used,pairs_skipped,max_pair_mean\n";
    for (const auto& b : estimate.breakdown) {
        out += (b.reference ? join_signal(*b.reference, ';') : std::string()) + "," +
               format_double(b.c_hat) + "," + format_double(b.std_error) + "," +
               std::to_string(b.ratios) + "," + std::to_string(b.pairs_used) + "," +
               std::to_string(b.pairs_skipped) + "," + format_double(b.max_pair_mean) + "\n";
    }
    return out;
}

std::string agent_rows_csv(const std::vector<AgentRow>& rows)
{
    std::string out = "agent,label,condition,mean,std_error\n";
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < r.per_condition.size(); ++c) {
            out += format_agent(r.agent) + "," + r.label + "," + std::to_string(c) + "," +
                   format_double(r.per_condition[c].mean) + "," +
                   format_double(r.per_condition[c].std_error) + "\n";
        }
    }
    return out;
}

json to_json(const ContractionEstimate& estimate)
{
    json breakdown = json::array();
    for (const auto& b : estimate.breakdown) {
        breakdown.push_back({
            {"reference", b.reference ? json(*b.reference) : json(nullptr)},
            {"c_hat", b.c_hat},
            {"std_error", b.std_error},
            {"ratios", b.ratios},
            {"pairs_used", b.pairs_used},
            {"pairs_skipped", b.pairs_skipped},
            {"max_pair_mean", b.max_pair_mean},
        });
    }
    return {
        {"c_hat", estimate.c_hat},
        {"std_error", estimate.std_error},
        {"max_pair_mean", estimate.max_pair_mean},
        {"pairs_sampled", estimate.pairs_sampled},
        {"norm", std::string(to_string(estimate.norm))},
        {"certificate", std::string(to_string(certify(estimate)))},
        {"breakdown", breakdown},
    };
}

namespace {

json agent_json(const AgentRow& r)
{
    json per = json::array();
    for (const auto& m : r.per_condition) per.push_back({{"mean", m.mean}, {"std_error", m.std_error}});
    return {
        {"agent", format_agent(r.agent)},
        {"label", r.label},
        {"per_condition", per},
        {"cross_condition_deviation", r.cross_condition_deviation},
        {"cross_condition_std_error", r.cross_condition_std_error},
    };
}

json class_json(const ClassSummary& s)
{
    return {
        {"label", s.label},
        {"members", s.members},
        {"pairwise_deviation", s.pairwise_deviation},
        {"pairwise_std_error", s.pairwise_std_error},
        {"pair", s.pair_first ? json::array({format_agent(*s.pair_first), format_agent(*s.pair_second)})
                              : json(nullptr)},
        {"class_mean_per_condition", s.class_mean_per_condition},
        {"condition_spread", s.condition_spread},
        {"condition_spread_std_error", s.condition_spread_std_error},
        {"max_cross_condition_deviation", s.max_cross_condition_deviation},
        {"pairwise_flagged", s.pairwise_flagged},
        {"condition_flagged", s.condition_flagged},
    };
}

json mismatches_json(const std::vector<ParameterMismatch>& ms)
{
    json out = json::array();
    for (const auto& m : ms) {
        out.push_back({{"label", m.label},
                       {"first", format_agent(m.first)},
                       {"second", format_agent(m.second)},
                       {"detail", m.detail}});
    }
    return out;
}

template <class Report>
json rows_and_classes(const Report& r)
{
    json agents = json::array(), classes = json::array();
    for (const auto& a : r.agents) agents.push_back(agent_json(a));
    for (const auto& c : r.classes) classes.push_back(class_json(c));
    return {{"agents", agents}, {"classes", classes}, {"mismatches", mismatches_json(r.mismatches)}};
}

} // namespace

json to_json(const TreatmentReport& report)
{
    json j = rows_and_classes(report);
    j["step"] = report.step;
    j["trials"] = report.trials;
    j["seed"] = report.seed;
    j["z"] = report.z;
    return j;
}

json to_json(const ImpactReport& report)
{
    json j = rows_and_classes(report);
    j["horizon"] = report.horizon;
    j["burn_in"] = report.burn_in;
    j["trials"] = report.trials;
    j["seed"] = report.seed;
    j["z"] = report.z;
    j["cross_class_deviation"] = report.cross_class_deviation;
    return j;
}

json to_json(const RobustnessReport& report)
{
    json comparisons = json::array();
    for (const auto& c : report.comparisons) {
        comparisons.push_back({{"first", c.first}, {"second", c.second}, {"statistic", c.statistic}});
    }
    return {
        {"burn_in", report.burn_in},
        {"window", report.window},
        {"trials", report.trials},
        {"seed", report.seed},
        {"confidence", report.confidence},
        {"samples_per_condition", report.samples_per_condition},
        {"critical_value", report.critical_value},
        {"comparisons", comparisons},
        {"max_statistic", report.max_statistic},
        {"ergodic_consistent", report.ergodic_consistent},
    };
}

json to_json(const FairnessReport& report)
{
    json j = json::object();
    j["equal_treatment"] = report.treatment ? to_json(*report.treatment) : json(nullptr);
    j["equal_impact"] = report.impact ? to_json(*report.impact) : json(nullptr);
    j["robustness"] = report.robustness ? to_json(*report.robustness) : json(nullptr);
    return j;
}

std::string sha256_hex(std::string_view data)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::IoError, "SHA-256 computation failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < length; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

std::string timestamp_now()
{
    std::time_t t = 0;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
        t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    } else {
        t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json to_json(const RunManifest& m)
{
    return {
        {"tool", "ergoloop"},
        {"version", std::string(kToolVersion)},
        {"command", m.command},
        {"config", m.config_path},
        {"config_sha256", m.config_digest},
        {"seed", m.seed},
        {"overrides", m.overrides},
        {"outputs", m.outputs},
        {"started", m.started},
        {"finished", m.finished},
    };
}

void write_text_file(const std::filesystem::path& path, std::string_view content)
{
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    const auto tmp = path.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::filesystem::remove(tmp, ec);
            throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
        }
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorCode::IoError, "cannot move output into '" + path.string() + "'");
    }
}

} // namespace ergoloop
