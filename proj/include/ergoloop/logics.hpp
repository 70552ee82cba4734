#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "ergoloop/agent.hpp"
#include "ergoloop/node_logic.hpp"

namespace ergoloop {

// ---------------------------------------------------------------------------
// Parameter records. These are the document model the config format reads
// and writes, and what each logic is built from.

struct ReferenceParams {
    std::vector<Signal> values;
    bool held = true; // past the end, repeat the last value
    bool operator==(const ReferenceParams&) const = default;
};

struct AggregatorParams {
    enum class Op { Error, Sum };
    Op op = Op::Sum;
    std::size_t dimension = 1;
    bool operator==(const AggregatorParams&) const = default;
};

struct PiParams {
    double kp = 1.0;
    double ki = 0.0;
    std::size_t dimension = 1;
    bool operator==(const PiParams&) const = default;
};

/// Two-layer ReLU map: out = W2 max(W1 e + b1, 0) + b2, row-major weights.
/// Empty weight vectors are drawn from `seed`.
struct ReluParams {
    std::size_t inputs = 1;
    std::size_t hidden = 8;
    std::size_t outputs = 1;
    std::uint64_t seed = 0;
    std::vector<double> w1, b1, w2, b2;
    bool operator==(const ReluParams&) const = default;
};

struct DelayParams {
    Signal initial{0.0};
    bool operator==(const DelayParams&) const = default;
};

struct FilterParams {
    enum class Type { Scale, MovingAverage };
    Type type = Type::Scale;
    double divisor = 2.0;     // Scale: output = -S / divisor
    std::size_t window = 1;   // MovingAverage
    std::size_t dimension = 1;
    bool operator==(const FilterParams&) const = default;
};

using NodeParams = std::variant<ReferenceParams, AggregatorParams, PiParams, ReluParams,
                                PopulationParams, DelayParams, FilterParams>;

/// Builds the logic for a parameter record; throws InvalidArgument when the
/// record does not fit the kind (e.g. PiParams on a Filter) and the logic's own
/// errors for invalid parameters.
std::shared_ptr<const NodeLogic> make_logic(NodeKind kind, const NodeParams& params);

// ---------------------------------------------------------------------------
// Transfer functions. The logic classes below are thin state-handling
// wrappers around these.

Signal reference_forward(std::span<const Signal> sequence, bool held, std::int64_t k);

/// r - f, componentwise.
Signal error_aggregate(const Signal& r, const Signal& f);

Signal sum_aggregate(std::span<const Signal> inputs);

struct PiOutput {
    Signal output;
    Signal accumulator;
};

/// The accumulator includes the current error: output = kp e + ki (acc + e).
PiOutput pi_forward(const Signal& accumulator, const Signal& e, double kp, double ki);

struct ReluWeights {
    std::size_t inputs = 0, hidden = 0, outputs = 0;
    std::vector<double> w1, b1, w2, b2;
};

ReluWeights resolve_relu_weights(const ReluParams& params);
Signal relu_controller_forward(const Signal& e, const ReluWeights& weights);

struct DelayOutput {
    Signal output;
    Signal buffer;
};

DelayOutput delay_forward(const Signal& buffer, const Signal& input);

/// `window` holds the previous inputs, oldest first (at most params.window
/// of them); the new input is appended and the oldest dropped when full.
Signal filter_forward(const FilterParams& params, const Signal& input, std::vector<double>& window);

// ---------------------------------------------------------------------------

class ReferenceLogic final : public NodeLogic {
public:
    explicit ReferenceLogic(ReferenceParams params);
    NodeKind kind() const override { return NodeKind::Reference; }
    std::vector<std::string> variables() const override { return {}; }
    std::size_t output_dimension() const override { return params_.values.front().size(); }
    Signal forward(std::span<const Signal> inputs, NodeState& state, StepContext& ctx) const override;
    std::string describe() const override;
    const ReferenceParams& params() const { return params_; }

private:
    ReferenceParams params_;
};

class AggregatorLogic final : public NodeLogic {
public:
    explicit AggregatorLogic(AggregatorParams params);
    NodeKind kind() const override { return NodeKind::Aggregator; }
    std::vector<std::string> variables() const override;
    bool variadic() const override { return params_.op == AggregatorParams::Op::Sum; }
    std::size_t output_dimension() const override { return params_.dimension; }
    Signal forward(std::span<const Signal> inputs, NodeState& state, StepContext& ctx) const override;
    std::string describe() const override;
    const AggregatorParams& params() const { return params_; }

private:
    AggregatorParams params_;
};

/// PI controller. With ki == 0 the controller is memoryless and carries no
/// accumulator in its state.
class PiControllerLogic final : public NodeLogic {
public:
    explicit PiControllerLogic(PiParams params);
    NodeKind kind() const override { return NodeKind::Controller; }
    std::vector<std::string> variables() const override { return {"e"}; }
    std::size_t output_dimension() const override { return params_.dimension; }
    NodeState initial_state() const override;
    Signal forward(std::span<const Signal> inputs, NodeState& state, StepContext& ctx) const override;
    std::size_t full_memory_size() const override;
    std::string describe() const override;
    const PiParams& params() const { return params_; }

private:
    PiParams params_;
};

class ReluControllerLogic final : public NodeLogic {
public:
    explicit ReluControllerLogic(ReluParams params);
    NodeKind kind() const override { return NodeKind::Controller; }
    std::vector<std::string> variables() const override { return {"e"}; }
    std::size_t output_dimension() const override { return weights_.outputs; }
    Signal forward(std::span<const Signal> inputs, NodeState& state, StepContext& ctx) const override;
    std::string describe() const override;
    const ReluParams& params() const { return params_; }
    const ReluWeights& weights() const { return weights_; }

private:
    ReluParams params_;
    ReluWeights weights_;
};

class PopulationLogic final : public NodeLogic {
public:
    explicit PopulationLogic(PopulationParams params);
    NodeKind kind() const override { return NodeKind::Population; }
    std::vector<std::string> variables() const override { return {"pi"}; }
    NodeState initial_state() const override;
    Signal forward(std::span<const Signal> inputs, NodeState& state, StepContext& ctx) const override;
    void embed(const NodeState& state, std::vector<double>& out) const override;
    void sample_state(NodeState& state, double lo, double hi, Rng& rng) const override;
    bool stochastic() const override { return true; }
    std::string describe() const override;
    const PopulationParams& params() const { return params_; }

private:
    PopulationParams params_;
};

class DelayLogic final : public NodeLogic {
public:
    explicit DelayLogic(DelayParams params);
    NodeKind kind() const override { return NodeKind::Delay; }
    std::vector<std::string> variables() const override { return {"u"}; }
    std::size_t output_dimension() const override { return params_.initial.size(); }
    NodeState initial_state() const override;
    Signal forward(std::span<const Signal> inputs, NodeState& state, StepContext& ctx) const override;
    void latch(const Signal& input, NodeState& state) const override;
    std::size_t full_memory_size() const override { return params_.initial.size(); }
    std::string describe() const override;
    const DelayParams& params() const { return params_; }

private:
    DelayParams params_;
};

class FilterLogic final : public NodeLogic {
public:
    explicit FilterLogic(FilterParams params);
    NodeKind kind() const override { return NodeKind::Filter; }
    std::vector<std::string> variables() const override { return {"S"}; }
    std::size_t output_dimension() const override { return params_.dimension; }
    Signal forward(std::span<const Signal> inputs, NodeState& state, StepContext& ctx) const override;
    std::size_t full_memory_size() const override;
    std::string describe() const override;
    const FilterParams& params() const { return params_; }

private:
    FilterParams params_;
};

} // namespace ergoloop
