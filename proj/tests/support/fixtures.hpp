#pragma once

// Small graph builders shared by the unit and acceptance tests.

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ergoloop/engine.hpp"
#include "ergoloop/error.hpp"
#include "ergoloop/logics.hpp"
#include "ergoloop/system_graph.hpp"

namespace ergoloop::testing {

inline std::filesystem::path config_dir() { return ERGOLOOP_CONFIG_DIR; }

/// Code of the ergoloop::Error thrown by `f`, or nullopt when it returns.
template <class F>
std::optional<ErrorCode> error_code(F&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

inline void add(SystemGraph& g, const std::string& id, NodeKind kind, const NodeParams& params)
{
    g.add_node(id, kind, make_logic(kind, params));
}

inline ReferenceParams constant_reference(double value) { return ReferenceParams{{Signal{value}}, true}; }

inline AggregatorParams error_op() { return AggregatorParams{AggregatorParams::Op::Error, 1}; }
inline AggregatorParams sum_op() { return AggregatorParams{AggregatorParams::Op::Sum, 1}; }

/// Memoryless population whose agents pick one of the linear responses
/// slope * pi with probabilities `probs`.
inline PopulationParams linear_population(std::size_t agents, const std::vector<double>& slopes,
                                          const std::vector<double>& probs, double offset = 0.0)
{
    std::vector<ResponseShape> responses;
    for (double s : slopes) responses.push_back(ResponseShape::affine(s, 0.0));
    return PopulationParams{agents, AgentModel::memoryless(responses, probs), offset};
}

/// Loop Z -> P -> Z: the delay buffer is the whole state and one pass maps it
/// to sum_i slope_{M_i} * buffer.
inline SystemGraph scalar_loop(const PopulationParams& population, double initial = 1.0)
{
    SystemGraph g;
    add(g, "Z", NodeKind::Delay, DelayParams{Signal{initial}});
    add(g, "P", NodeKind::Population, population);
    g.connect_nodes("Z", "P");
    g.connect_nodes("P", "Z");
    g.set_start_node("Z");
    g.set_checkpoint_node("P");
    return g;
}

inline Interconnection scalar_ifs(const std::vector<double>& slopes, const std::vector<double>& probs)
{
    return Interconnection(scalar_loop(linear_population(1, slopes, probs)));
}

/// Worked-example population: 20 agents emitting 0 with probability eps and
/// clamp(pi, 0, 1) otherwise; `offset` shifts the non-constant response.
inline PopulationParams worked_population(double offset, double eps = 0.5)
{
    AgentModel model = AgentModel::memoryless(
        {ResponseShape::constant(0.0), ResponseShape::affine_clamped(1.0, 0.0, 0.0, 1.0)}, {eps, 1.0 - eps});
    return PopulationParams{20, model, offset};
}

inline std::vector<std::pair<std::string, std::string>> worked_edges()
{
    return {{"r", "A1"}, {"A1", "C"}, {"C", "P1"}, {"C", "P2"}, {"P1", "A2"},
            {"P2", "A2"}, {"A2", "Z"}, {"Z", "F"},  {"F", "A1"}};
}

/// The eight-node worked example: r -> A1 -> C -> {P1, P2} -> A2 -> Z -> F -> A1.
inline SystemGraph worked_graph(const NodeParams& controller, double eps = 0.5)
{
    SystemGraph g;
    add(g, "r", NodeKind::Reference, constant_reference(1.0));
    add(g, "A1", NodeKind::Aggregator, error_op());
    add(g, "C", NodeKind::Controller, controller);
    add(g, "P1", NodeKind::Population, worked_population(0.0, eps));
    add(g, "P2", NodeKind::Population, worked_population(0.4, eps));
    add(g, "A2", NodeKind::Aggregator, sum_op());
    add(g, "Z", NodeKind::Delay, DelayParams{});
    add(g, "F", NodeKind::Filter, FilterParams{FilterParams::Type::Scale, 2.0, 1, 1});
    for (auto [s, t] : worked_edges()) g.connect_nodes(s, t);
    g.set_start_node("r");
    g.set_checkpoint_node("A1");
    return g;
}

inline SystemGraph worked_pi_graph(double kp = 0.02, double ki = 0.0)
{
    return worked_graph(PiParams{kp, ki, 1});
}

} // namespace ergoloop::testing
