#include "ergoloop/agent.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ergoloop/error.hpp"

namespace ergoloop {

double ResponseShape::operator()(double pi) const
{
    switch (kind) {
    case Kind::Constant: return value;
    case Kind::Affine: return slope * pi + intercept;
    case Kind::AffineClamped: return std::clamp(slope * pi + intercept, lo, hi);
    case Kind::Logistic: return lo + (hi - lo) / (1.0 + std::exp(-(slope * pi + intercept)));
    }
    return 0.0;
}

ResponseShape ResponseShape::constant(double value)
{
    ResponseShape s;
    s.kind = Kind::Constant;
    s.value = value;
    return s;
}

ResponseShape ResponseShape::affine(double slope, double intercept)
{
    ResponseShape s;
    s.kind = Kind::Affine;
    s.slope = slope;
    s.intercept = intercept;
    return s;
}

ResponseShape ResponseShape::affine_clamped(double slope, double intercept, double lo, double hi)
{
    ResponseShape s;
    s.kind = Kind::AffineClamped;
    s.slope = slope;
    s.intercept = intercept;
    s.lo = lo;
    s.hi = hi;
    return s;
}

ResponseShape ResponseShape::logistic(double slope, double intercept, double lo, double hi)
{
    ResponseShape s = affine_clamped(slope, intercept, lo, hi);
    s.kind = Kind::Logistic;
    return s;
}

std::string_view to_string(ResponseShape::Kind kind)
{
    switch (kind) {
    case ResponseShape::Kind::Constant: return "constant";
    case ResponseShape::Kind::Affine: return "affine";
    case ResponseShape::Kind::AffineClamped: return "affine_clamped";
    case ResponseShape::Kind::Logistic: return "logistic";
    }
    return "unknown";
}

ResponseShape::Kind response_kind_from_string(std::string_view text)
{
    using K = ResponseShape::Kind;
    for (K k : {K::Constant, K::Affine, K::AffineClamped, K::Logistic}) {
        if (text == to_string(k)) return k;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown response shape '" + std::string(text) + "'");
}

std::vector<double> ProbabilityLaw::evaluate(double pi) const
{
    if (kind == Kind::Constant) return row;
    double p = 1.0 / (1.0 + std::exp(-(slope * pi + bias)));
    p = std::clamp(p, floor, 1.0 - floor);
    return {1.0 - p, p};
}

ProbabilityLaw ProbabilityLaw::constant(std::vector<double> row)
{
    ProbabilityLaw law;
    law.kind = Kind::Constant;
    law.row = std::move(row);
    return law;
}

ProbabilityLaw ProbabilityLaw::logistic(double slope, double bias, double floor)
{
    ProbabilityLaw law;
    law.kind = Kind::Logistic;
    law.slope = slope;
    law.bias = bias;
    law.floor = floor;
    return law;
}

void check_probability_row(std::span<const double> probs, const std::string& owner)
{
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw Error(ErrorCode::ProbabilityNotNormalized,
                        owner + ": probability " + std::to_string(p) + " outside [0, 1]");
        }
        sum += p;
    }
    if (probs.empty() || std::abs(sum - 1.0) > 1e-9) {
        throw Error(ErrorCode::ProbabilityNotNormalized,
                    owner + ": probabilities sum to " + std::to_string(sum));
    }
}

namespace {

void check_law(const ProbabilityLaw& law, std::size_t outcomes, const std::string& owner,
               const std::string& which)
{
    if (law.kind == ProbabilityLaw::Kind::Constant) {
        if (law.row.size() != outcomes) {
            throw Error(ErrorCode::InvalidArgument,
                        owner + ": " + which + " row has " + std::to_string(law.row.size()) +
                            " entries for " + std::to_string(outcomes) + " maps");
        }
        check_probability_row(law.row, owner + " " + which);
    } else {
        if (outcomes != 2) {
            throw Error(ErrorCode::InvalidArgument,
                        owner + ": logistic " + which + " law needs exactly two maps");
        }
        if (!(law.floor >= 0.0 && law.floor < 0.5)) {
            throw Error(ErrorCode::InvalidArgument, owner + ": logistic floor must be in [0, 0.5)");
        }
    }
}

} // namespace

void AgentModel::validate(const std::string& owner) const
{
    if (outputs.empty()) throw Error(ErrorCode::InvalidArgument, owner + ": agent has no output maps");
    check_law(output_law, outputs.size(), owner, "output");
    if (outputs.size() > 65535 || transitions.size() > 65535) {
        throw Error(ErrorCode::InvalidArgument, owner + ": too many maps");
    }
    if (!stateful()) {
        if (!transitions.empty()) {
            throw Error(ErrorCode::InvalidArgument,
                        owner + ": transition maps need a finite state space");
        }
        for (const auto& out : outputs) {
            if (!out.state_weights.empty()) {
                throw Error(ErrorCode::InvalidArgument,
                            owner + ": state weights on a memoryless agent");
            }
        }
        return;
    }
    const std::size_t n = states.front().size();
    for (const auto& s : states) {
        if (s.size() != n || n == 0) {
            throw Error(ErrorCode::InvalidArgument, owner + ": states must share one dimension >= 1");
        }
    }
    if (transitions.empty()) throw Error(ErrorCode::InvalidArgument, owner + ": no transition maps");
    for (const auto& map : transitions) {
        if (map.size() != states.size()) {
            throw Error(ErrorCode::InvalidArgument,
                        owner + ": every transition map must list one target per state");
        }
        for (std::size_t target : map) {
            if (target >= states.size()) {
                throw Error(ErrorCode::InvalidArgument,
                            owner + ": transition target " + std::to_string(target) +
                                " is outside the state space");
            }
        }
    }
    check_law(transition_law, transitions.size(), owner, "transition");
    for (const auto& out : outputs) {
        if (!out.state_weights.empty() && out.state_weights.size() != n) {
            throw Error(ErrorCode::InvalidArgument,
                        owner + ": output state weights must match the state dimension");
        }
    }
    if (initial_state >= states.size()) {
        throw Error(ErrorCode::InvalidArgument, owner + ": initial state out of range");
    }
}

AgentModel AgentModel::memoryless(std::vector<ResponseShape> responses, std::vector<double> probs)
{
    AgentModel model;
    for (auto& r : responses) model.outputs.push_back(OutputMap{r, {}});
    model.output_law = ProbabilityLaw::constant(std::move(probs));
    return model;
}

double agent_output(const AgentModel& model, const OutputMap& map, double offset, double pi,
                    std::size_t state)
{
    double y = map.response(pi);
    if (map.response.kind != ResponseShape::Kind::Constant) y += offset;
    if (!map.state_weights.empty()) {
        const auto& x = model.states[state];
        for (std::size_t c = 0; c < x.size(); ++c) y += map.state_weights[c] * x[c];
    }
    return y;
}

PopulationStep population_forward(const PopulationParams& params, const Signal& pi,
                                  std::span<const std::size_t> states, DrawSource& draws)
{
    if (pi.size() != 1) {
        throw Error(ErrorCode::DimensionMismatch,
                    "population signal must be scalar, got dimension " + std::to_string(pi.size()));
    }
    const AgentModel& model = params.model;
    const double signal = pi[0];

    std::vector<double> transition_probs;
    if (model.stateful()) {
        if (states.size() != params.agents) {
            throw Error(ErrorCode::DimensionMismatch, "population state does not match agent count");
        }
        transition_probs = model.transition_law.evaluate(signal);
        check_probability_row(transition_probs, "transition law");
    }
    const std::vector<double> output_probs = model.output_law.evaluate(signal);
    check_probability_row(output_probs, "output law");

    PopulationStep result;
    result.outputs.resize(params.agents);
    if (model.stateful()) result.states.resize(params.agents);
    double total = 0.0;
    for (std::size_t i = 0; i < params.agents; ++i) {
        std::size_t next_state = 0;
        const std::size_t current = model.stateful() ? states[i] : 0;
        if (model.stateful()) {
            const std::size_t l = draws.draw(transition_probs);
            next_state = model.transitions[l][current];
        }
        const std::size_t m = draws.draw(output_probs);
        const double y = agent_output(model, model.outputs[m], params.offset, signal, current);
        result.outputs[i] = y;
        total += y;
        if (model.stateful()) result.states[i] = next_state;
    }
    result.total = Signal{total};
    return result;
}

} // namespace ergoloop
