#include "ergoloop/node_logic.hpp"

#include <cctype>
#include <string>

#include "ergoloop/error.hpp"

namespace ergoloop {

std::string_view to_string(NodeKind kind)
{
    switch (kind) {
    case NodeKind::Reference: return "Reference";
    case NodeKind::Aggregator: return "Aggregator";
    case NodeKind::Controller: return "Controller";
    case NodeKind::Population: return "Population";
    case NodeKind::Delay: return "Delay";
    case NodeKind::Filter: return "Filter";
    }
    return "Unknown";
}

NodeKind node_kind_from_string(std::string_view text)
{
    for (NodeKind kind : {NodeKind::Reference, NodeKind::Aggregator, NodeKind::Controller,
                          NodeKind::Population, NodeKind::Delay, NodeKind::Filter}) {
        std::string_view name = to_string(kind);
        if (text.size() == name.size()) {
            bool same = true;
            for (std::size_t i = 0; i < text.size(); ++i) {
                if (std::tolower(static_cast<unsigned char>(text[i])) !=
                    std::tolower(static_cast<unsigned char>(name[i]))) {
                    same = false;
                    break;
                }
            }
            if (same) return kind;
        }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown node kind '" + std::string(text) + "'");
}

NodeState NodeLogic::initial_state() const
{
    NodeState state;
    state.output.assign(output_dimension(), 0.0);
    return state;
}

void NodeLogic::latch(const Signal&, NodeState&) const
{
    throw Error(ErrorCode::InvalidArgument, "latch is only defined for Delay nodes");
}

void NodeLogic::embed(const NodeState& state, std::vector<double>& out) const
{
    out.insert(out.end(), state.memory.begin(), state.memory.end());
}

void NodeLogic::sample_state(NodeState& state, double lo, double hi, Rng& rng) const
{
    state.memory.resize(full_memory_size());
    for (double& m : state.memory) m = rng.uniform(lo, hi);
}

} // namespace ergoloop
