#include "ergoloop/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "ergoloop/error.hpp"
#include "ergoloop/logics.hpp"
#include "parallel.hpp"

namespace ergoloop {

std::string format_agent(const AgentRef& agent)
{
    return agent.population + "[" + std::to_string(agent.index) + "]";
}

namespace {

const PopulationLogic& population_logic(const Interconnection& loop, std::size_t node)
{
    const auto* logic = dynamic_cast<const PopulationLogic*>(&loop.logic(node));
    if (!logic) {
        throw Error(ErrorCode::InvalidArgument,
                    "'" + loop.id(node).str() + "' is not a built-in population");
    }
    return *logic;
}

std::vector<AgentRef> all_agents(const Interconnection& loop)
{
    std::vector<AgentRef> agents;
    for (std::size_t p : loop.populations()) {
        const std::size_t n = population_logic(loop, p).params().agents;
        for (std::size_t i = 0; i < n; ++i) agents.push_back(AgentRef{loop.id(p).str(), i});
    }
    return agents;
}

double combined(double a, double b) { return std::sqrt(a * a + b * b); }

} // namespace

ClassAssignment ClassAssignment::by_population(const Interconnection& loop,
                                               const std::map<std::string, std::string>& labels,
                                               const std::string& fallback)
{
    std::set<std::string> populations;
    for (std::size_t p : loop.populations()) populations.insert(loop.id(p).str());
    for (const auto& [id, label] : labels) {
        if (!populations.count(id)) {
            throw Error(ErrorCode::InvalidArgument, "class label for '" + id + "', which is not a population");
        }
    }
    ClassAssignment assignment;
    for (const auto& agent : all_agents(loop)) {
        auto it = labels.find(agent.population);
        assignment.assign(agent, it == labels.end() ? fallback : it->second);
    }
    return assignment;
}

void ClassAssignment::check_total(const Interconnection& loop) const
{
    const auto agents = all_agents(loop);
    for (const auto& agent : agents) {
        if (!labels_.count(agent)) {
            throw Error(ErrorCode::InvalidArgument, "agent " + format_agent(agent) + " has no class");
        }
    }
    if (labels_.size() != agents.size()) {
        for (const auto& [agent, label] : labels_) {
            if (std::find(agents.begin(), agents.end(), agent) == agents.end()) {
                throw Error(ErrorCode::InvalidArgument,
                            "class label for missing agent " + format_agent(agent));
            }
        }
    }
}

std::vector<std::string> ClassAssignment::classes() const
{
    std::set<std::string> unique;
    for (const auto& [agent, label] : labels_) unique.insert(label);
    return {unique.begin(), unique.end()};
}

ClassSummary summarize_class(const std::string& label, std::span<const AgentRow> members, double z)
{
    ClassSummary s;
    s.label = label;
    s.members = members.size();
    if (members.empty()) return s;
    const std::size_t conditions = members.front().per_condition.size();

    for (std::size_t c = 0; c < conditions; ++c) {
        for (std::size_t i = 0; i < members.size(); ++i) {
            for (std::size_t j = i + 1; j < members.size(); ++j) {
                const auto& a = members[i].per_condition[c];
                const auto& b = members[j].per_condition[c];
                const double dev = std::abs(a.mean - b.mean);
                const double se = combined(a.std_error, b.std_error);
                if (dev > z * se) s.pairwise_flagged = true;
                if (!s.pair_first || dev > s.pairwise_deviation) {
                    s.pairwise_deviation = dev;
                    s.pairwise_std_error = se;
                    s.pair_first = members[i].agent;
                    s.pair_second = members[j].agent;
                }
            }
        }
    }

    // Sorting before summation keeps the aggregate independent of member order.
    std::vector<double> spread_se(conditions);
    for (std::size_t c = 0; c < conditions; ++c) {
        std::vector<double> means, variances;
        for (const auto& m : members) {
            means.push_back(m.per_condition[c].mean);
            variances.push_back(m.per_condition[c].std_error * m.per_condition[c].std_error);
        }
        std::sort(means.begin(), means.end());
        std::sort(variances.begin(), variances.end());
        double sum = 0.0, var = 0.0;
        for (double v : means) sum += v;
        for (double v : variances) var += v;
        const double n = static_cast<double>(members.size());
        s.class_mean_per_condition.push_back(sum / n);
        spread_se[c] = std::sqrt(var) / n;
    }
    if (conditions > 0) {
        const auto [lo, hi] = std::minmax_element(s.class_mean_per_condition.begin(),
                                                  s.class_mean_per_condition.end());
        s.condition_spread = *hi - *lo;
        s.condition_spread_std_error =
            combined(spread_se[lo - s.class_mean_per_condition.begin()],
                     spread_se[hi - s.class_mean_per_condition.begin()]);
        if (s.condition_spread > z * s.condition_spread_std_error) s.condition_flagged = true;
    }
    for (const auto& m : members) {
        s.max_cross_condition_deviation =
            std::max(s.max_cross_condition_deviation, m.cross_condition_deviation);
        if (m.cross_condition_deviation > z * m.cross_condition_std_error) s.condition_flagged = true;
    }
    return s;
}

std::vector<ParameterMismatch> find_parameter_mismatches(const Interconnection& loop,
                                                         const ClassAssignment& classes)
{
    // First population seen for each label, with its parameters.
    std::map<std::string, std::pair<AgentRef, const PopulationParams*>> reference;
    std::set<std::pair<std::string, std::string>> reported;
    std::vector<ParameterMismatch> out;
    for (const auto& [agent, label] : classes.labels()) {
        const auto& params = population_logic(loop, loop.index_of(agent.population)).params();
        auto [it, inserted] = reference.try_emplace(label, agent, &params);
        if (inserted || it->second.first.population == agent.population) continue;
        if (!reported.insert({label, agent.population}).second) continue;
        const PopulationParams& first = *it->second.second;
        std::ostringstream detail;
        if (first.offset != params.offset) {
            detail << "offset " << first.offset << " vs " << params.offset;
        }
        if (!(first.model == params.model)) {
            if (detail.tellp() > 0) detail << "; ";
            detail << "agent model differs";
        }
        if (detail.tellp() > 0) out.push_back({label, it->second.first, agent, detail.str()});
    }
    return out;
}

namespace {

std::vector<InitialCondition> conditions_or_default(const FairnessOptions& options)
{
    if (options.conditions.empty()) return {InitialCondition{}};
    return options.conditions;
}

// samples[c][agent][trial], agents as in all_agents().
using AgentSamples = std::vector<std::vector<std::vector<double>>>;

// Runs every (condition, trial) for `passes` passes; `collect` sees each state
// after the first pass and accumulates into the per-agent slot.
template <class Collect>
AgentSamples run_agents(const Interconnection& loop, const std::vector<InitialCondition>& conditions,
                        const FairnessOptions& options, std::size_t passes, Collect collect)
{
    const auto agents = all_agents(loop);
    AgentSamples samples(conditions.size(),
                         std::vector<std::vector<double>>(agents.size(),
                                                          std::vector<double>(options.trials)));
    std::vector<SystemState> starts;
    for (const auto& c : conditions) starts.push_back(initial_state(loop, c));
    detail::parallel_for(conditions.size() * options.trials, [&](std::size_t job) {
        const std::size_t c = job / options.trials;
        const std::size_t t = job % options.trials;
        Rng rng = Rng::stream(options.seed, StreamPurpose::Fairness, t);
        std::vector<double> acc(agents.size(), 0.0);
        simulate_visit(loop, starts[c], passes, rng, [&](const SystemState& s) {
            if (s.k == 0) return;
            std::size_t a = 0;
            for (std::size_t p : loop.populations()) {
                for (double y : s.nodes[p].agent_outputs) collect(s.k, acc[a++], y);
            }
        });
        for (std::size_t a = 0; a < agents.size(); ++a) samples[c][a][t] = acc[a];
    });
    return samples;
}

std::vector<AgentRow> build_rows(const Interconnection& loop, const ClassAssignment& classes,
                                 const AgentSamples& samples)
{
    const auto agents = all_agents(loop);
    std::vector<AgentRow> rows;
    for (std::size_t a = 0; a < agents.size(); ++a) {
        AgentRow row;
        row.agent = agents[a];
        row.label = classes.labels().at(agents[a]);
        for (const auto& per_condition : samples) row.per_condition.push_back(mean_stderr(per_condition[a]));
        for (std::size_t i = 0; i < row.per_condition.size(); ++i) {
            for (std::size_t j = i + 1; j < row.per_condition.size(); ++j) {
                const auto& x = row.per_condition[i];
                const auto& y = row.per_condition[j];
                const double dev = std::abs(x.mean - y.mean);
                if (dev > row.cross_condition_deviation || (i == 0 && j == 1)) {
                    row.cross_condition_deviation = dev;
                    row.cross_condition_std_error = combined(x.std_error, y.std_error);
                }
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<ClassSummary> build_summaries(const ClassAssignment& classes,
                                          const std::vector<AgentRow>& rows, double z)
{
    std::vector<ClassSummary> out;
    for (const auto& label : classes.classes()) {
        std::vector<AgentRow> members;
        for (const auto& row : rows) {
            if (row.label == label) members.push_back(row);
        }
        out.push_back(summarize_class(label, members, z));
    }
    return out;
}

void check_options(const FairnessOptions& options)
{
    if (options.trials < 2) throw Error(ErrorCode::InvalidArgument, "trials must be at least 2");
    if (!(options.z > 0.0)) throw Error(ErrorCode::InvalidArgument, "z must be positive");
}

} // namespace

TreatmentReport equal_treatment_report(const Interconnection& loop, const ClassAssignment& classes,
                                       std::int64_t step, const FairnessOptions& options)
{
    check_options(options);
    if (step < 0) throw Error(ErrorCode::InvalidArgument, "treatment step must be non-negative");
    classes.check_total(loop);
    const auto conditions = conditions_or_default(options);
    // y_i(k) is emitted during pass k, so it is held by the state after k + 1 passes.
    const std::int64_t held = step + 1;
    const auto samples = run_agents(loop, conditions, options, static_cast<std::size_t>(held),
                                    [held](std::int64_t k, double& acc, double y) {
                                        if (k == held) acc = y;
                                    });
    TreatmentReport report;
    report.step = step;
    report.trials = options.trials;
    report.seed = options.seed;
    report.z = options.z;
    report.agents = build_rows(loop, classes, samples);
    report.classes = build_summaries(classes, report.agents, options.z);
    report.mismatches = find_parameter_mismatches(loop, classes);
    return report;
}

ImpactReport equal_impact_report(const Interconnection& loop, const ClassAssignment& classes,
                                 std::size_t horizon, std::size_t burn_in,
                                 const FairnessOptions& options)
{
    check_options(options);
    if (horizon <= burn_in) throw Error(ErrorCode::InvalidArgument, "horizon must exceed burn-in");
    if (options.conditions.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "equal impact needs at least two initial conditions");
    }
    classes.check_total(loop);
    // Averages y_i(burn_in) .. y_i(horizon), held by states burn_in + 1 .. horizon + 1.
    const double span = static_cast<double>(horizon - burn_in + 1);
    const auto first = static_cast<std::int64_t>(burn_in);
    const auto samples = run_agents(loop, options.conditions, options, horizon + 1,
                                    [first, span](std::int64_t k, double& acc, double y) {
                                        if (k > first) acc += y / span;
                                    });
    ImpactReport report;
    report.horizon = horizon;
    report.burn_in = burn_in;
    report.trials = options.trials;
    report.seed = options.seed;
    report.z = options.z;
    report.agents = build_rows(loop, classes, samples);
    report.classes = build_summaries(classes, report.agents, options.z);
    for (std::size_t c = 0; c < options.conditions.size(); ++c) {
        double lo = 0.0, hi = 0.0;
        for (std::size_t i = 0; i < report.classes.size(); ++i) {
            const double m = report.classes[i].class_mean_per_condition[c];
            lo = i == 0 ? m : std::min(lo, m);
            hi = i == 0 ? m : std::max(hi, m);
        }
        report.cross_class_deviation = std::max(report.cross_class_deviation, hi - lo);
    }
    report.mismatches = find_parameter_mismatches(loop, classes);
    return report;
}

RobustnessReport robustness_report(const Interconnection& loop, std::size_t burn_in,
                                   std::size_t window, const FairnessOptions& options)
{
    check_options(options);
    if (window < 1) throw Error(ErrorCode::InvalidArgument, "window must be at least 1");
    if (options.conditions.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "robustness needs at least two initial conditions");
    }
    const auto& conditions = options.conditions;
    const std::size_t per_trial = window;
    std::vector<std::vector<double>> pooled(conditions.size(),
                                            std::vector<double>(options.trials * per_trial));
    std::vector<SystemState> starts;
    for (const auto& c : conditions) starts.push_back(initial_state(loop, c));
    const auto first = static_cast<std::int64_t>(burn_in);
    detail::parallel_for(conditions.size() * options.trials, [&](std::size_t job) {
        const std::size_t c = job / options.trials;
        const std::size_t t = job % options.trials;
        Rng rng = Rng::stream(options.seed, StreamPurpose::Fairness, t);
        double* out = pooled[c].data() + t * per_trial;
        simulate_visit(loop, starts[c], burn_in + window, rng, [&](const SystemState& s) {
            if (s.k > first) out[s.k - first - 1] = s.output(loop.checkpoint()).at(0);
        });
    });

    RobustnessReport report;
    report.burn_in = burn_in;
    report.window = window;
    report.trials = options.trials;
    report.seed = options.seed;
    report.confidence = options.confidence;
    report.samples_per_condition = options.trials * per_trial;
    report.critical_value = ks_critical_value(report.samples_per_condition,
                                              report.samples_per_condition, options.confidence);
    for (std::size_t i = 0; i < conditions.size(); ++i) {
        for (std::size_t j = i + 1; j < conditions.size(); ++j) {
            const double d = distribution_distance(pooled[i], pooled[j]);
            report.comparisons.push_back({i, j, d});
            report.max_statistic = std::max(report.max_statistic, d);
        }
    }
    report.ergodic_consistent = report.max_statistic <= report.critical_value;
    return report;
}

} // namespace ergoloop
