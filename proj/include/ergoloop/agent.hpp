#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ergoloop/random.hpp"
#include "ergoloop/signal.hpp"

namespace ergoloop {

/// Scalar response of an agent to the broadcast signal.
struct ResponseShape {
    enum class Kind { Constant, Affine, AffineClamped, Logistic };

    Kind kind = Kind::Constant;
    double value = 0.0;     // Constant
    double slope = 1.0;     // Affine, AffineClamped, Logistic
    double intercept = 0.0; // Affine, AffineClamped, Logistic
    double lo = 0.0;        // AffineClamped bounds, Logistic range
    double hi = 1.0;

    double operator()(double pi) const;

    bool operator==(const ResponseShape&) const = default;

    static ResponseShape constant(double value);
    static ResponseShape affine(double slope, double intercept);
    static ResponseShape affine_clamped(double slope, double intercept, double lo, double hi);
    static ResponseShape logistic(double slope, double intercept, double lo, double hi);
};

std::string_view to_string(ResponseShape::Kind kind);
ResponseShape::Kind response_kind_from_string(std::string_view text);

/// Output map of one agent: response(pi) + weights . x, where x is the
/// agent's current state coordinates (empty weights for memoryless agents).
/// A population offset is added to every non-constant response.
struct OutputMap {
    ResponseShape response;
    std::vector<double> state_weights;

    bool operator==(const OutputMap&) const = default;
};

/// Law of a stochastic pointer given the broadcast signal.
///
/// Constant laws return a fixed row. Logistic laws are two-outcome:
/// P(second) = sigmoid(slope * pi + bias) clamped to [floor, 1 - floor].
struct ProbabilityLaw {
    enum class Kind { Constant, Logistic };

    Kind kind = Kind::Constant;
    std::vector<double> row;
    double slope = 0.0;
    double bias = 0.0;
    double floor = 1e-3;

    std::size_t outcomes() const { return kind == Kind::Constant ? row.size() : 2; }
    std::vector<double> evaluate(double pi) const;

    bool operator==(const ProbabilityLaw&) const = default;

    static ProbabilityLaw constant(std::vector<double> row);
    static ProbabilityLaw logistic(double slope, double bias, double floor = 1e-3);
};

/// Throws ProbabilityNotNormalized unless every entry is in [0, 1] and the row
/// sums to 1 within 1e-9. `owner` names the agent in the message.
void check_probability_row(std::span<const double> probs, const std::string& owner);

/// Finite-state (or memoryless) stochastic agent.
///
/// Stateful agents live on states = {s_1..s_L} in R^n; transition map j sends
/// state index a to transitions[j][a]. Memoryless agents leave states empty
/// and respond only to the signal.
struct AgentModel {
    std::vector<std::vector<double>> states;
    std::vector<std::vector<std::size_t>> transitions;
    ProbabilityLaw transition_law;
    std::vector<OutputMap> outputs;
    ProbabilityLaw output_law;
    std::size_t initial_state = 0;

    bool stateful() const { return !states.empty(); }
    std::size_t draws_per_step() const { return stateful() ? 2 : 1; }

    /// Structural checks; throws InvalidArgument or ProbabilityNotNormalized.
    void validate(const std::string& owner) const;

    bool operator==(const AgentModel&) const = default;

    /// Memoryless agent choosing among `responses` with a constant row.
    static AgentModel memoryless(std::vector<ResponseShape> responses, std::vector<double> probs);
};

struct PopulationParams {
    std::size_t agents = 1;
    AgentModel model;
    double offset = 0.0;

    bool operator==(const PopulationParams&) const = default;
};

/// Result of advancing every agent of a population once.
struct PopulationStep {
    Signal total;                     // y_p = sum of individual outputs
    std::vector<double> outputs;      // y_i per agent
    std::vector<std::size_t> states;  // x_i(k+1) per agent (empty if memoryless)
};

/// Advances a population by one step. For each agent in index order: draw the
/// transition pointer L_i (stateful agents), draw the output pointer M_i,
/// emit y_i from the current state x_i(k), then move to x_i(k+1). Throws
/// DimensionMismatch for a non-scalar signal and ProbabilityNotNormalized for
/// a bad row.
PopulationStep population_forward(const PopulationParams& params, const Signal& pi,
                                  std::span<const std::size_t> states, DrawSource& draws);

double agent_output(const AgentModel& model, const OutputMap& map, double offset, double pi,
                    std::size_t state);

} // namespace ergoloop
