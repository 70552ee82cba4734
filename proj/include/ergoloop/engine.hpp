#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ergoloop/random.hpp"
#include "ergoloop/system_graph.hpp"

namespace ergoloop {

/// A validated SystemGraph with its evaluation schedule resolved. Immutable;
/// safe to share read-only between concurrently running trials.
class Interconnection {
public:
    /// Throws InvalidGraph listing every violation.
    explicit Interconnection(SystemGraph graph);

    const SystemGraph& graph() const { return graph_; }
    std::size_t size() const { return graph_.nodes().size(); }
    const NodeLogic& logic(std::size_t node) const { return *graph_.nodes()[node].logic; }
    const NodeId& id(std::size_t node) const { return graph_.nodes()[node].id; }
    NodeKind kind(std::size_t node) const { return graph_.nodes()[node].kind; }

    /// Node indices in evaluation order.
    std::span<const std::size_t> order() const { return order_; }
    /// Source node indices of `node`'s incoming edges, in insertion order.
    std::span<const std::size_t> inputs(std::size_t node) const { return inputs_[node]; }
    std::span<const std::size_t> delays() const { return delays_; }
    /// Population node indices in evaluation order (the draw-site order).
    std::span<const std::size_t> populations() const { return populations_; }
    std::span<const std::size_t> references() const { return references_; }

    std::size_t start() const { return start_; }
    std::size_t checkpoint() const { return checkpoint_; }
    std::size_t index_of(const NodeId& id) const { return graph_.index_of(id); }

    /// Structural hash; states carry it so that only states of the same
    /// interconnection are compared.
    std::uint64_t fingerprint() const { return fingerprint_; }

    /// Copy with every Reference node held constant at `value`.
    Interconnection with_reference(const Signal& value) const;

private:
    SystemGraph graph_;
    std::vector<std::size_t> order_;
    std::vector<std::vector<std::size_t>> inputs_;
    std::vector<std::size_t> delays_;
    std::vector<std::size_t> populations_;
    std::vector<std::size_t> references_;
    std::size_t start_ = 0;
    std::size_t checkpoint_ = 0;
    std::uint64_t fingerprint_ = 0;
};

/// Composite state x(k): every node's internal memory plus the last signal it
/// emitted, so r, e, pi, y and f of the loop are all recoverable.
struct SystemState {
    std::uint64_t fingerprint = 0;
    std::int64_t k = 0;
    std::vector<NodeState> nodes; // indexed like SystemGraph::nodes()

    const Signal& output(std::size_t node) const { return nodes[node].output; }
    bool operator==(const SystemState&) const = default;
};

/// Realised stochastic pointers of one pass: for every population in
/// evaluation order and every agent in index order, L_i (stateful agents
/// only) then M_i.
struct MapIndex {
    std::vector<std::uint16_t> choices;
    auto operator<=>(const MapIndex&) const = default;
};

struct MapProbability {
    MapIndex index;
    double probability = 0.0;
};

struct TrajectoryPoint {
    std::int64_t k = 0;
    SystemState state;
    Signal checkpoint;
};

using Trajectory = std::vector<TrajectoryPoint>;

/// Overrides applied on top of the default initial state.
struct InitialCondition {
    std::map<std::string, std::vector<double>> memory;       // node id -> memory
    std::map<std::string, std::vector<std::size_t>> agents;  // population id -> states
    bool operator==(const InitialCondition&) const = default;
};

enum class NormKind { Euclidean, Maximum };

std::string_view to_string(NormKind kind);
NormKind norm_kind_from_string(std::string_view text);

inline constexpr std::size_t kDefaultEnumerationCap = 1'000'000;

SystemState initial_state(const Interconnection& loop);
SystemState initial_state(const Interconnection& loop, const InitialCondition& condition);

/// Applies one map F_m: evaluates every node once in evaluation order, Delay
/// nodes first emitting their buffer and latching their input at the end.
/// Node errors are rethrown with the node id and time index attached.
SystemState step(const Interconnection& loop, const SystemState& state, DrawSource& draws);
SystemState step(const Interconnection& loop, const SystemState& state, Rng& rng);

/// Same as step() but also returns the realised map index.
std::pair<SystemState, MapIndex> step_recorded(const Interconnection& loop,
                                               const SystemState& state, Rng& rng);

/// Runs `iterations` passes with the stream derived from `seed`. The result
/// has iterations + 1 points, the first being `initial`.
Trajectory simulate(const Interconnection& loop, const SystemState& initial,
                    std::size_t iterations, std::uint64_t seed);

/// Runs `iterations` passes on `rng`, calling `visit` on every state
/// including the initial one. Used where keeping the trajectory is wasteful.
void simulate_visit(const Interconnection& loop, const SystemState& initial,
                    std::size_t iterations, Rng& rng,
                    const std::function<void(const SystemState&)>& visit);

struct CoupledStep {
    SystemState a;
    SystemState b;
    MapIndex map;
};

/// Draws one map index (with the probabilities seen by `a`) and applies the
/// same map to both states.
CoupledStep coupled_step(const Interconnection& loop, const SystemState& a, const SystemState& b,
                         Rng& rng);

/// All map indices with p_m = product of the agents' pointer probabilities,
/// every population receiving the broadcast `pi`. Throws TooManyMaps when
/// the index set exceeds `cap`.
std::vector<MapProbability> enumerate_maps(const Interconnection& loop, const Signal& pi,
                                           std::size_t cap = kDefaultEnumerationCap);

/// Coordinates entering the state norm: every node's memory, with discrete
/// agent states embedded through their R^n coordinates.
std::vector<double> state_vector(const Interconnection& loop, const SystemState& state);

double state_distance(const Interconnection& loop, const SystemState& a, const SystemState& b,
                      NormKind norm = NormKind::Euclidean);

/// Uniform draw of the internal state (memory in [lo, hi]) keeping signals
/// at their initial values.
SystemState sample_state(const Interconnection& loop, double lo, double hi, Rng& rng);

} // namespace ergoloop
