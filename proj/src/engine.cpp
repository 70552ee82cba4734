#include "ergoloop/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ergoloop/error.hpp"
#include "ergoloop/logics.hpp"

namespace ergoloop {

std::string_view to_string(NormKind kind)
{
    return kind == NormKind::Euclidean ? "euclidean" : "maximum";
}

NormKind norm_kind_from_string(std::string_view text)
{
    if (text == "euclidean") return NormKind::Euclidean;
    if (text == "maximum" || text == "max") return NormKind::Maximum;
    throw Error(ErrorCode::InvalidArgument, "unknown norm '" + std::string(text) + "'");
}

namespace {

std::uint64_t fnv1a(std::uint64_t h, std::string_view bytes)
{
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    // Field separator so ("ab","c") and ("a","bc") differ.
    h ^= 0xffU;
    h *= 0x100000001b3ULL;
    return h;
}

} // namespace

Interconnection::Interconnection(SystemGraph graph) : graph_(std::move(graph))
{
    const auto violations = graph_.validate();
    if (!violations.empty()) {
        std::string message = "graph is not valid:";
        for (const auto& v : violations) message += " " + v.message + ";";
        throw Error(ErrorCode::InvalidGraph, message);
    }

    const std::size_t n = graph_.nodes().size();
    for (const auto& id : graph_.evaluation_order()) order_.push_back(graph_.index_of(id));

    inputs_.resize(n);
    for (const auto& e : graph_.edges()) {
        inputs_[graph_.index_of(e.target)].push_back(graph_.index_of(e.source));
    }
    for (std::size_t u : order_) {
        switch (graph_.nodes()[u].kind) {
        case NodeKind::Delay: delays_.push_back(u); break;
        case NodeKind::Population: populations_.push_back(u); break;
        case NodeKind::Reference: references_.push_back(u); break;
        default: break;
        }
    }
    start_ = graph_.index_of(*graph_.start_node());
    checkpoint_ = graph_.index_of(*graph_.checkpoint_node());

    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& node : graph_.nodes()) {
        h = fnv1a(h, node.id.str());
        h = fnv1a(h, to_string(node.kind));
    }
    for (const auto& e : graph_.edges()) {
        h = fnv1a(h, e.source.str());
        h = fnv1a(h, e.target.str());
    }
    fingerprint_ = h;
}

Interconnection Interconnection::with_reference(const Signal& value) const
{
    SystemGraph copy = graph_;
    for (std::size_t r : references_) {
        copy.replace_logic(id(r), std::make_shared<ReferenceLogic>(ReferenceParams{{value}, true}));
    }
    return Interconnection(std::move(copy));
}

// ---------------------------------------------------------------------------

SystemState initial_state(const Interconnection& loop)
{
    SystemState state;
    state.fingerprint = loop.fingerprint();
    state.nodes.reserve(loop.size());
    for (std::size_t i = 0; i < loop.size(); ++i) state.nodes.push_back(loop.logic(i).initial_state());
    return state;
}

SystemState initial_state(const Interconnection& loop, const InitialCondition& condition)
{
    SystemState state = initial_state(loop);
    for (const auto& [name, memory] : condition.memory) {
        const std::size_t i = loop.index_of(name);
        const auto& logic = loop.logic(i);
        if (memory.size() > logic.full_memory_size() || memory.empty()) {
            throw Error(ErrorCode::InvalidArgument,
                        "initial memory for '" + name + "' has " + std::to_string(memory.size()) +
                            " values; the node holds at most " +
                            std::to_string(logic.full_memory_size()));
        }
        state.nodes[i].memory = memory;
        if (loop.kind(i) == NodeKind::Delay) state.nodes[i].output = memory;
    }
    for (const auto& [name, agents] : condition.agents) {
        const std::size_t i = loop.index_of(name);
        const auto* population = dynamic_cast<const PopulationLogic*>(&loop.logic(i));
        if (!population || !population->params().model.stateful()) {
            throw Error(ErrorCode::InvalidArgument,
                        "'" + name + "' is not a population of stateful agents");
        }
        const auto& p = population->params();
        if (agents.size() != p.agents) {
            throw Error(ErrorCode::InvalidArgument, "initial agent states for '" + name +
                                                        "' must list every agent");
        }
        for (std::size_t a : agents) {
            if (a >= p.model.states.size()) {
                throw Error(ErrorCode::InvalidArgument, "initial agent state out of range");
            }
        }
        state.nodes[i].agents = agents;
    }
    return state;
}

namespace {

void check_state(const Interconnection& loop, const SystemState& state)
{
    if (state.fingerprint != loop.fingerprint() || state.nodes.size() != loop.size()) {
        throw Error(ErrorCode::InvalidArgument, "state was not built from this interconnection");
    }
}

} // namespace

SystemState step(const Interconnection& loop, const SystemState& state, DrawSource& draws)
{
    check_state(loop, state);
    SystemState next = state;
    StepContext ctx{state.k, draws};
    std::size_t current = 0;
    try {
        for (std::size_t d : loop.delays()) {
            current = d;
            next.nodes[d].output = loop.logic(d).forward({}, next.nodes[d], ctx);
        }
        std::vector<Signal> inputs;
        for (std::size_t u : loop.order()) {
            if (loop.kind(u) == NodeKind::Delay) continue;
            current = u;
            inputs.clear();
            for (std::size_t src : loop.inputs(u)) inputs.push_back(next.nodes[src].output);
            Signal out = loop.logic(u).forward(inputs, next.nodes[u], ctx);
            if (!all_finite(out)) {
                throw Error(ErrorCode::NonFiniteSignal, "non-finite output " + format_signal(out));
            }
            next.nodes[u].output = std::move(out);
        }
        for (std::size_t d : loop.delays()) {
            current = d;
            loop.logic(d).latch(next.nodes[loop.inputs(d).front()].output, next.nodes[d]);
        }
    } catch (const Error& e) {
        throw Error(e.code(), "node '" + loop.id(current).str() + "' at k=" +
                                  std::to_string(state.k) + ": " + e.what());
    }
    next.k = state.k + 1;
    return next;
}

SystemState step(const Interconnection& loop, const SystemState& state, Rng& rng)
{
    RandomDraws draws(rng);
    return step(loop, state, draws);
}

std::pair<SystemState, MapIndex> step_recorded(const Interconnection& loop,
                                               const SystemState& state, Rng& rng)
{
    RandomDraws draws(rng);
    SystemState next = step(loop, state, draws);
    return {std::move(next), MapIndex{draws.choices()}};
}

void simulate_visit(const Interconnection& loop, const SystemState& initial,
                    std::size_t iterations, Rng& rng,
                    const std::function<void(const SystemState&)>& visit)
{
    SystemState state = initial;
    visit(state);
    for (std::size_t i = 0; i < iterations; ++i) {
        state = step(loop, state, rng);
        visit(state);
    }
}

Trajectory simulate(const Interconnection& loop, const SystemState& initial,
                    std::size_t iterations, std::uint64_t seed)
{
    Rng rng = Rng::stream(seed, StreamPurpose::Simulate);
    Trajectory trajectory;
    trajectory.reserve(iterations + 1);
    simulate_visit(loop, initial, iterations, rng, [&](const SystemState& s) {
        trajectory.push_back(TrajectoryPoint{s.k, s, s.output(loop.checkpoint())});
    });
    return trajectory;
}

CoupledStep coupled_step(const Interconnection& loop, const SystemState& a, const SystemState& b,
                         Rng& rng)
{
    check_state(loop, b);
    auto [next_a, map] = step_recorded(loop, a, rng);
    ReplayDraws replay(map.choices);
    SystemState next_b = step(loop, b, replay);
    return CoupledStep{std::move(next_a), std::move(next_b), std::move(map)};
}

std::vector<MapProbability> enumerate_maps(const Interconnection& loop, const Signal& pi,
                                           std::size_t cap)
{
    if (pi.size() != 1) throw Error(ErrorCode::DimensionMismatch, "map enumeration needs a scalar signal");
    std::vector<std::vector<double>> sites;
    for (std::size_t p : loop.populations()) {
        const auto* population = dynamic_cast<const PopulationLogic*>(&loop.logic(p));
        if (!population) {
            throw Error(ErrorCode::InvalidArgument,
                        "'" + loop.id(p).str() + "' is not a built-in population");
        }
        const auto& params = population->params();
        const auto& model = params.model;
        std::vector<double> transition;
        if (model.stateful()) {
            transition = model.transition_law.evaluate(pi[0]);
            check_probability_row(transition, loop.id(p).str() + " transition law");
        }
        const auto output = model.output_law.evaluate(pi[0]);
        check_probability_row(output, loop.id(p).str() + " output law");
        for (std::size_t i = 0; i < params.agents; ++i) {
            if (model.stateful()) sites.push_back(transition);
            sites.push_back(output);
        }
    }

    std::size_t total = 1;
    for (const auto& s : sites) {
        if (total > cap / s.size()) {
            throw Error(ErrorCode::TooManyMaps,
                        "map index set exceeds the enumeration cap of " + std::to_string(cap));
        }
        total *= s.size();
    }
    if (total > cap) {
        throw Error(ErrorCode::TooManyMaps,
                    "map index set exceeds the enumeration cap of " + std::to_string(cap));
    }

    std::vector<MapProbability> maps;
    maps.reserve(total);
    std::vector<std::uint16_t> choice(sites.size(), 0);
    for (std::size_t n = 0; n < total; ++n) {
        double p = 1.0;
        for (std::size_t s = 0; s < sites.size(); ++s) p *= sites[s][choice[s]];
        maps.push_back(MapProbability{MapIndex{choice}, p});
        // Odometer, last site fastest.
        for (std::size_t s = sites.size(); s-- > 0;) {
            if (++choice[s] < sites[s].size()) break;
            choice[s] = 0;
        }
    }
    return maps;
}

std::vector<double> state_vector(const Interconnection& loop, const SystemState& state)
{
    check_state(loop, state);
    std::vector<double> v;
    for (std::size_t i = 0; i < loop.size(); ++i) loop.logic(i).embed(state.nodes[i], v);
    return v;
}

double state_distance(const Interconnection& loop, const SystemState& a, const SystemState& b,
                      NormKind norm)
{
    const auto va = state_vector(loop, a);
    const auto vb = state_vector(loop, b);
    if (va.size() != vb.size()) {
        throw Error(ErrorCode::DimensionMismatch, "states have different layouts");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) {
        const double d = std::abs(va[i] - vb[i]);
        if (norm == NormKind::Euclidean) {
            acc += d * d;
        } else {
            acc = std::max(acc, d);
        }
    }
    return norm == NormKind::Euclidean ? std::sqrt(acc) : acc;
}

SystemState sample_state(const Interconnection& loop, double lo, double hi, Rng& rng)
{
    SystemState state = initial_state(loop);
    for (std::size_t i = 0; i < loop.size(); ++i) {
        loop.logic(i).sample_state(state.nodes[i], lo, hi, rng);
        if (loop.kind(i) == NodeKind::Delay) state.nodes[i].output = state.nodes[i].memory;
    }
    return state;
}

} // namespace ergoloop
