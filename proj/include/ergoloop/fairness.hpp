#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ergoloop/engine.hpp"
#include "ergoloop/stats.hpp"

namespace ergoloop {

/// One agent: (population node, index within the population).
struct AgentRef {
    std::string population;
    std::size_t index = 0;
    auto operator<=>(const AgentRef&) const = default;
};

std::string format_agent(const AgentRef& agent);

/// Class label of every agent of every population.
class ClassAssignment {
public:
    ClassAssignment() = default;

    /// Every agent of a population gets its population's label; populations
    /// missing from `labels` get `fallback`.
    static ClassAssignment by_population(const Interconnection& loop,
                                         const std::map<std::string, std::string>& labels,
                                         const std::string& fallback = "all");

    void assign(const AgentRef& agent, std::string label) { labels_[agent] = std::move(label); }

    /// Throws InvalidArgument unless every agent of `loop` has exactly one
    /// label and no label refers to a missing agent.
    void check_total(const Interconnection& loop) const;

    const std::map<AgentRef, std::string>& labels() const { return labels_; }
    std::vector<std::string> classes() const;

private:
    std::map<AgentRef, std::string> labels_;
};

struct FairnessOptions {
    std::size_t trials = 200;
    std::uint64_t seed = 0;
    std::vector<InitialCondition> conditions; // empty: the default initial state
    double z = 3.0;            // deviation flags at z combined standard errors
    double confidence = 0.95;  // KS verdict level
};

/// Per-agent estimate under each initial condition.
struct AgentRow {
    AgentRef agent;
    std::string label;
    std::vector<MeanStderr> per_condition;
    double cross_condition_deviation = 0.0; // max over condition pairs
    double cross_condition_std_error = 0.0;  // combined, for the maximising pair
};

/// Class-level aggregates; a symmetric function of the member rows.
struct ClassSummary {
    std::string label;
    std::size_t members = 0;
    double pairwise_deviation = 0.0;   // max over conditions and member pairs
    double pairwise_std_error = 0.0;   // combined, for the maximising pair
    std::optional<AgentRef> pair_first, pair_second;
    std::vector<double> class_mean_per_condition;
    double condition_spread = 0.0;     // max - min of the class mean over conditions
    double condition_spread_std_error = 0.0;
    double max_cross_condition_deviation = 0.0;
    bool pairwise_flagged = false;     // deviation > z * combined std error
    bool condition_flagged = false;
};

ClassSummary summarize_class(const std::string& label, std::span<const AgentRow> members, double z);

/// Two agents of one class whose population parameters differ.
struct ParameterMismatch {
    std::string label;
    AgentRef first;
    AgentRef second;
    std::string detail;
};

std::vector<ParameterMismatch> find_parameter_mismatches(const Interconnection& loop,
                                                         const ClassAssignment& classes);

struct TreatmentReport {
    std::int64_t step = 0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    double z = 3.0;
    std::vector<AgentRow> agents;
    std::vector<ClassSummary> classes;
    std::vector<ParameterMismatch> mismatches;
};

struct ImpactReport {
    std::size_t horizon = 0;
    std::size_t burn_in = 0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    double z = 3.0;
    std::vector<AgentRow> agents;
    std::vector<ClassSummary> classes;
    double cross_class_deviation = 0.0; // max - min of class means, over conditions
    std::vector<ParameterMismatch> mismatches;
};

struct KsComparison {
    std::size_t first = 0;
    std::size_t second = 0;
    double statistic = 0.0;
};

struct RobustnessReport {
    std::size_t burn_in = 0;
    std::size_t window = 0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    double confidence = 0.95;
    std::size_t samples_per_condition = 0;
    double critical_value = 0.0;
    std::vector<KsComparison> comparisons;
    double max_statistic = 0.0;
    bool ergodic_consistent = false;
};

struct FairnessReport {
    std::optional<TreatmentReport> treatment;
    std::optional<ImpactReport> impact;
    std::optional<RobustnessReport> robustness;
};

/// E[y_i(k)] per agent, averaged over trials, for each initial condition.
/// Trial t uses the same stream under every initial condition. Throws
/// InvalidArgument for trials < 2 or step < 0.
TreatmentReport equal_treatment_report(const Interconnection& loop, const ClassAssignment& classes,
                                       std::int64_t step, const FairnessOptions& options);

/// Cesaro average of y_i(burn_in..horizon) (inclusive), averaged over trials.
/// Requires horizon > burn_in and at least two initial conditions.
ImpactReport equal_impact_report(const Interconnection& loop, const ClassAssignment& classes,
                                 std::size_t horizon, std::size_t burn_in,
                                 const FairnessOptions& options);

/// Pools checkpoint samples (first component) emitted in passes
/// burn_in..burn_in+window-1 over all trials, per initial condition, and
/// compares every pair of conditions with the two-sample KS statistic.
RobustnessReport robustness_report(const Interconnection& loop, std::size_t burn_in,
                                   std::size_t window, const FairnessOptions& options);

} // namespace ergoloop
