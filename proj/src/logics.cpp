#include "ergoloop/logics.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "ergoloop/error.hpp"

namespace ergoloop {

namespace {

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

void require_inputs(std::span<const Signal> inputs, std::size_t n, const char* who)
{
    if (inputs.size() != n) {
        throw Error(ErrorCode::InvalidArgument, std::string(who) + " expects " + std::to_string(n) +
                                                    " inputs, got " + std::to_string(inputs.size()));
    }
}

} // namespace

// ---------------------------------------------------------------------------

Signal reference_forward(std::span<const Signal> sequence, bool held, std::int64_t k)
{
    if (sequence.empty()) throw Error(ErrorCode::EmptyInput, "reference sequence is empty");
    if (k < 0) throw Error(ErrorCode::IndexOutOfRange, "negative time index");
    const auto index = static_cast<std::size_t>(k);
    if (index < sequence.size()) return sequence[index];
    if (!held) {
        throw Error(ErrorCode::IndexOutOfRange,
                    "time index " + std::to_string(k) + " beyond a reference sequence of length " +
                        std::to_string(sequence.size()));
    }
    return sequence.back();
}

Signal error_aggregate(const Signal& r, const Signal& f)
{
    require_same_dimension(r, f, "error aggregate");
    Signal e(r.size());
    for (std::size_t c = 0; c < r.size(); ++c) e[c] = r[c] - f[c];
    return e;
}

Signal sum_aggregate(std::span<const Signal> inputs)
{
    if (inputs.empty()) throw Error(ErrorCode::EmptyInput, "sum aggregate needs at least one input");
    Signal total = inputs.front();
    for (std::size_t i = 1; i < inputs.size(); ++i) {
        require_same_dimension(total, inputs[i], "sum aggregate");
        for (std::size_t c = 0; c < total.size(); ++c) total[c] += inputs[i][c];
    }
    return total;
}

PiOutput pi_forward(const Signal& accumulator, const Signal& e, double kp, double ki)
{
    require_same_dimension(accumulator, e, "PI accumulator");
    PiOutput out;
    out.accumulator.resize(e.size());
    out.output.resize(e.size());
    for (std::size_t c = 0; c < e.size(); ++c) {
        out.accumulator[c] = accumulator[c] + e[c];
        out.output[c] = kp * e[c] + ki * out.accumulator[c];
    }
    return out;
}

ReluWeights resolve_relu_weights(const ReluParams& p)
{
    if (p.inputs == 0 || p.hidden == 0 || p.outputs == 0) {
        throw Error(ErrorCode::ShapeMismatch, "ReLU layer sizes must be positive");
    }
    ReluWeights w{p.inputs, p.hidden, p.outputs, p.w1, p.b1, p.w2, p.b2};
    const bool explicit_weights = !p.w1.empty() || !p.b1.empty() || !p.w2.empty() || !p.b2.empty();
    if (explicit_weights) {
        if (w.w1.size() != p.hidden * p.inputs || w.b1.size() != p.hidden ||
            w.w2.size() != p.outputs * p.hidden || w.b2.size() != p.outputs) {
            throw Error(ErrorCode::ShapeMismatch, "ReLU weights do not match the layer sizes");
        }
        return w;
    }
    Rng rng = Rng::stream(p.seed, StreamPurpose::Relu);
    const double a1 = 1.0 / std::sqrt(static_cast<double>(p.inputs));
    const double a2 = 1.0 / std::sqrt(static_cast<double>(p.hidden));
    w.w1.resize(p.hidden * p.inputs);
    w.b1.resize(p.hidden);
    w.w2.resize(p.outputs * p.hidden);
    w.b2.resize(p.outputs);
    for (double& x : w.w1) x = rng.uniform(-a1, a1);
    for (double& x : w.b1) x = rng.uniform(-a1, a1);
    for (double& x : w.w2) x = rng.uniform(-a2, a2);
    for (double& x : w.b2) x = rng.uniform(-a2, a2);
    return w;
}

Signal relu_controller_forward(const Signal& e, const ReluWeights& w)
{
    if (e.size() != w.inputs) {
        throw Error(ErrorCode::ShapeMismatch, "ReLU controller expects input dimension " +
                                                  std::to_string(w.inputs) + ", got " +
                                                  std::to_string(e.size()));
    }
    std::vector<double> hidden(w.hidden);
    for (std::size_t h = 0; h < w.hidden; ++h) {
        double a = w.b1[h];
        for (std::size_t i = 0; i < w.inputs; ++i) a += w.w1[h * w.inputs + i] * e[i];
        hidden[h] = a > 0.0 ? a : 0.0;
    }
    Signal out(w.outputs);
    for (std::size_t o = 0; o < w.outputs; ++o) {
        double a = w.b2[o];
        for (std::size_t h = 0; h < w.hidden; ++h) a += w.w2[o * w.hidden + h] * hidden[h];
        out[o] = a;
    }
    return out;
}

DelayOutput delay_forward(const Signal& buffer, const Signal& input)
{
    return DelayOutput{buffer, input};
}

Signal filter_forward(const FilterParams& params, const Signal& input, std::vector<double>& window)
{
    if (params.type == FilterParams::Type::Scale) {
        if (params.divisor == 0.0) throw Error(ErrorCode::ZeroDivisor, "scale filter divisor is zero");
        Signal out(input.size());
        for (std::size_t c = 0; c < input.size(); ++c) out[c] = -input[c] / params.divisor;
        return out;
    }
    if (params.window == 0) throw Error(ErrorCode::NonpositiveWindow, "moving-average window is zero");
    const std::size_t d = input.size();
    if (d == 0 || window.size() % d != 0) {
        throw Error(ErrorCode::DimensionMismatch, "moving-average input dimension changed");
    }
    window.insert(window.end(), input.begin(), input.end());
    while (window.size() > params.window * d) window.erase(window.begin(), window.begin() + d);
    const std::size_t frames = window.size() / d;
    Signal mean(d, 0.0);
    for (std::size_t f = 0; f < frames; ++f) {
        for (std::size_t c = 0; c < d; ++c) mean[c] += window[f * d + c];
    }
    for (double& m : mean) m /= static_cast<double>(frames);
    return mean;
}

// ---------------------------------------------------------------------------

ReferenceLogic::ReferenceLogic(ReferenceParams params) : params_(std::move(params))
{
    if (params_.values.empty()) throw Error(ErrorCode::EmptyInput, "reference sequence is empty");
    for (const auto& v : params_.values) {
        if (v.size() != params_.values.front().size() || v.empty()) {
            throw Error(ErrorCode::DimensionMismatch, "reference values must share one dimension");
        }
    }
}

Signal ReferenceLogic::forward(std::span<const Signal>, NodeState&, StepContext& ctx) const
{
    return reference_forward(params_.values, params_.held, ctx.k);
}

std::string ReferenceLogic::describe() const
{
    return std::to_string(params_.values.size()) + " value(s)" + (params_.held ? ", held" : "");
}

AggregatorLogic::AggregatorLogic(AggregatorParams params) : params_(params)
{
    if (params_.dimension == 0) throw Error(ErrorCode::InvalidArgument, "aggregator dimension is zero");
}

std::vector<std::string> AggregatorLogic::variables() const
{
    if (params_.op == AggregatorParams::Op::Error) return {"r", "f"};
    return {"y"};
}

Signal AggregatorLogic::forward(std::span<const Signal> inputs, NodeState&, StepContext&) const
{
    if (params_.op == AggregatorParams::Op::Error) {
        require_inputs(inputs, 2, "error aggregator");
        return error_aggregate(inputs[0], inputs[1]);
    }
    return sum_aggregate(inputs);
}

std::string AggregatorLogic::describe() const
{
    return params_.op == AggregatorParams::Op::Error ? "error r - f" : "sum";
}

PiControllerLogic::PiControllerLogic(PiParams params) : params_(params)
{
    if (!std::isfinite(params_.kp) || !std::isfinite(params_.ki)) {
        throw Error(ErrorCode::NonFiniteSignal, "PI gains must be finite");
    }
    if (params_.dimension == 0) throw Error(ErrorCode::InvalidArgument, "PI dimension is zero");
}

NodeState PiControllerLogic::initial_state() const
{
    NodeState state = NodeLogic::initial_state();
    if (params_.ki != 0.0) state.memory.assign(params_.dimension, 0.0);
    return state;
}

Signal PiControllerLogic::forward(std::span<const Signal> inputs, NodeState& state,
                                  StepContext&) const
{
    require_inputs(inputs, 1, "PI controller");
    if (params_.ki == 0.0) {
        Signal out(inputs[0].size());
        for (std::size_t c = 0; c < out.size(); ++c) out[c] = params_.kp * inputs[0][c];
        return out;
    }
    auto result = pi_forward(state.memory, inputs[0], params_.kp, params_.ki);
    state.memory = std::move(result.accumulator);
    return result.output;
}

std::size_t PiControllerLogic::full_memory_size() const
{
    return params_.ki != 0.0 ? params_.dimension : 0;
}

std::string PiControllerLogic::describe() const
{
    return "PI kp=" + fmt(params_.kp) + " ki=" + fmt(params_.ki);
}

ReluControllerLogic::ReluControllerLogic(ReluParams params)
    : params_(std::move(params)), weights_(resolve_relu_weights(params_))
{
}

Signal ReluControllerLogic::forward(std::span<const Signal> inputs, NodeState&, StepContext&) const
{
    require_inputs(inputs, 1, "ReLU controller");
    return relu_controller_forward(inputs[0], weights_);
}

std::string ReluControllerLogic::describe() const
{
    return "ReLU " + std::to_string(weights_.inputs) + "-" + std::to_string(weights_.hidden) + "-" +
           std::to_string(weights_.outputs);
}

PopulationLogic::PopulationLogic(PopulationParams params) : params_(std::move(params))
{
    if (params_.agents == 0) throw Error(ErrorCode::InvalidArgument, "population needs at least one agent");
    params_.model.validate("population agent");
}

NodeState PopulationLogic::initial_state() const
{
    NodeState state = NodeLogic::initial_state();
    if (params_.model.stateful()) state.agents.assign(params_.agents, params_.model.initial_state);
    state.agent_outputs.assign(params_.agents, 0.0);
    return state;
}

Signal PopulationLogic::forward(std::span<const Signal> inputs, NodeState& state,
                                StepContext& ctx) const
{
    require_inputs(inputs, 1, "population");
    auto result = population_forward(params_, inputs[0], state.agents, ctx.draws);
    state.agent_outputs = std::move(result.outputs);
    state.agents = std::move(result.states);
    return result.total;
}

void PopulationLogic::embed(const NodeState& state, std::vector<double>& out) const
{
    NodeLogic::embed(state, out);
    for (std::size_t a : state.agents) {
        const auto& x = params_.model.states[a];
        out.insert(out.end(), x.begin(), x.end());
    }
}

void PopulationLogic::sample_state(NodeState& state, double lo, double hi, Rng& rng) const
{
    NodeLogic::sample_state(state, lo, hi, rng);
    if (params_.model.stateful()) {
        for (std::size_t& a : state.agents) a = rng.index(params_.model.states.size());
    }
}

std::string PopulationLogic::describe() const
{
    std::string s = std::to_string(params_.agents) + " agents";
    if (params_.model.stateful()) s += ", " + std::to_string(params_.model.states.size()) + " states";
    if (params_.offset != 0.0) s += ", offset " + fmt(params_.offset);
    return s;
}

DelayLogic::DelayLogic(DelayParams params) : params_(std::move(params))
{
    if (params_.initial.empty()) throw Error(ErrorCode::InvalidArgument, "delay initial value is empty");
}

NodeState DelayLogic::initial_state() const
{
    NodeState state;
    state.memory = params_.initial;
    state.output = params_.initial;
    return state;
}

Signal DelayLogic::forward(std::span<const Signal>, NodeState& state, StepContext&) const
{
    return state.memory;
}

void DelayLogic::latch(const Signal& input, NodeState& state) const
{
    state.memory = delay_forward(state.memory, input).buffer;
}

std::string DelayLogic::describe() const { return "one-step delay"; }

FilterLogic::FilterLogic(FilterParams params) : params_(params)
{
    if (params_.type == FilterParams::Type::Scale && params_.divisor == 0.0) {
        throw Error(ErrorCode::ZeroDivisor, "scale filter divisor is zero");
    }
    if (params_.type == FilterParams::Type::MovingAverage && params_.window == 0) {
        throw Error(ErrorCode::NonpositiveWindow, "moving-average window is zero");
    }
    if (params_.dimension == 0) throw Error(ErrorCode::InvalidArgument, "filter dimension is zero");
}

Signal FilterLogic::forward(std::span<const Signal> inputs, NodeState& state, StepContext&) const
{
    require_inputs(inputs, 1, "filter");
    return filter_forward(params_, inputs[0], state.memory);
}

std::size_t FilterLogic::full_memory_size() const
{
    return params_.type == FilterParams::Type::MovingAverage ? params_.window * params_.dimension : 0;
}

std::string FilterLogic::describe() const
{
    if (params_.type == FilterParams::Type::Scale) return "scale -S/" + fmt(params_.divisor);
    return "moving average over " + std::to_string(params_.window);
}

// ---------------------------------------------------------------------------

std::shared_ptr<const NodeLogic> make_logic(NodeKind kind, const NodeParams& params)
{
    auto mismatch = [&](const char* record) -> std::shared_ptr<const NodeLogic> {
        throw Error(ErrorCode::InvalidArgument, std::string(record) + " parameters do not fit a " +
                                                    std::string(to_string(kind)) + " node");
    };
    return std::visit(
        [&](const auto& p) -> std::shared_ptr<const NodeLogic> {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ReferenceParams>) {
                if (kind != NodeKind::Reference) return mismatch("reference");
                return std::make_shared<ReferenceLogic>(p);
            } else if constexpr (std::is_same_v<T, AggregatorParams>) {
                if (kind != NodeKind::Aggregator) return mismatch("aggregator");
                return std::make_shared<AggregatorLogic>(p);
            } else if constexpr (std::is_same_v<T, PiParams>) {
                if (kind != NodeKind::Controller) return mismatch("PI");
                return std::make_shared<PiControllerLogic>(p);
            } else if constexpr (std::is_same_v<T, ReluParams>) {
                if (kind != NodeKind::Controller) return mismatch("ReLU");
                return std::make_shared<ReluControllerLogic>(p);
            } else if constexpr (std::is_same_v<T, PopulationParams>) {
                if (kind != NodeKind::Population) return mismatch("population");
                return std::make_shared<PopulationLogic>(p);
            } else if constexpr (std::is_same_v<T, DelayParams>) {
                if (kind != NodeKind::Delay) return mismatch("delay");
                return std::make_shared<DelayLogic>(p);
            } else {
                if (kind != NodeKind::Filter) return mismatch("filter");
                return std::make_shared<FilterLogic>(p);
            }
        },
        params);
}

} // namespace ergoloop
