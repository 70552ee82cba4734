#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ergoloop/random.hpp"
#include "ergoloop/signal.hpp"

namespace ergoloop {

enum class NodeKind { Reference, Aggregator, Controller, Population, Delay, Filter };

std::string_view to_string(NodeKind kind);
NodeKind node_kind_from_string(std::string_view text);

/// Mutable per-trial state of one node.
///
/// `memory` holds the continuous internal state (PI accumulator, delay
/// buffer, filter window) and is what the contraction norm measures.
/// Populations keep their agents' discrete state indices in `agents` and the
/// last individual outputs in `agent_outputs`; `output` is the last signal
/// the node emitted.
struct NodeState {
    std::vector<double> memory;
    std::vector<std::size_t> agents;
    std::vector<double> agent_outputs;
    Signal output;

    bool operator==(const NodeState&) const = default;
};

struct StepContext {
    std::int64_t k = 0;
    DrawSource& draws;
};

/// Behaviour of one element of the loop. Implementations are immutable and
/// shared across trials; all per-trial data lives in NodeState.
class NodeLogic {
public:
    virtual ~NodeLogic() = default;

    virtual NodeKind kind() const = 0;

    /// Declared input names, bound to incoming edges in insertion order.
    virtual std::vector<std::string> variables() const = 0;
    /// Accepts any positive number of inputs (ignores variables().size()).
    virtual bool variadic() const { return false; }

    virtual std::size_t output_dimension() const { return 1; }
    virtual NodeState initial_state() const;

    virtual Signal forward(std::span<const Signal> inputs, NodeState& state,
                           StepContext& ctx) const = 0;

    /// Delay nodes only: store this pass's input for the next pass.
    virtual void latch(const Signal& input, NodeState& state) const;

    /// Appends the coordinates this node contributes to the state norm.
    virtual void embed(const NodeState& state, std::vector<double>& out) const;

    /// Number of memory coordinates of a fully warmed-up state.
    virtual std::size_t full_memory_size() const { return 0; }

    /// Replaces the internal state with a uniform draw: memory coordinates in
    /// [lo, hi], discrete agent states uniform over their state space.
    virtual void sample_state(NodeState& state, double lo, double hi, Rng& rng) const;

    virtual bool stochastic() const { return false; }

    /// Short human-readable parameter summary.
    virtual std::string describe() const = 0;
};

} // namespace ergoloop
