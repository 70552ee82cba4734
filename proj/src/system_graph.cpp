#include "ergoloop/system_graph.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <set>
#include <tuple>

#include "ergoloop/error.hpp"

namespace ergoloop {

std::string_view to_string(Violation::Rule rule)
{
    switch (rule) {
    case Violation::Rule::MissingStartNode: return "MissingStartNode";
    case Violation::Rule::MissingCheckpointNode: return "MissingCheckpointNode";
    case Violation::Rule::Unreachable: return "Unreachable";
    case Violation::Rule::CycleWithoutDelay: return "CycleWithoutDelay";
    case Violation::Rule::ArityMismatch: return "ArityMismatch";
    }
    return "Unknown";
}

void SystemGraph::add_node(NodeId id, NodeKind kind, std::shared_ptr<const NodeLogic> logic)
{
    if (id.empty()) throw Error(ErrorCode::InvalidArgument, "node id must not be empty");
    if (!logic) throw Error(ErrorCode::InvalidArgument, "node '" + id.str() + "' has no logic");
    if (logic->kind() != kind) {
        throw Error(ErrorCode::InvalidArgument,
                    "node '" + id.str() + "' declared " + std::string(to_string(kind)) +
                        " but its logic is " + std::string(to_string(logic->kind())));
    }
    if (contains(id)) throw Error(ErrorCode::DuplicateNode, "node '" + id.str() + "' already exists");
    index_.emplace(id.str(), nodes_.size());
    nodes_.push_back(Node{std::move(id), kind, std::move(logic)});
}

std::size_t SystemGraph::index_of(const NodeId& id) const
{
    auto it = index_.find(id.str());
    if (it == index_.end()) throw Error(ErrorCode::UnknownNode, "unknown node '" + id.str() + "'");
    return it->second;
}

void SystemGraph::connect_nodes(const NodeId& source, const NodeId& target)
{
    const std::size_t s = index_of(source);
    index_of(target);
    if (source == target && nodes_[s].kind != NodeKind::Delay) {
        throw Error(ErrorCode::SelfLoop,
                    "self-loop on '" + source.str() + "' is only allowed through a Delay");
    }
    const Edge edge{source, target};
    if (std::find(edges_.begin(), edges_.end(), edge) != edges_.end()) {
        throw Error(ErrorCode::DuplicateEdge,
                    "edge " + source.str() + " -> " + target.str() + " already exists");
    }
    edges_.push_back(edge);
}

void SystemGraph::set_start_node(const NodeId& id)
{
    index_of(id);
    start_ = id;
}

void SystemGraph::set_checkpoint_node(const NodeId& id)
{
    index_of(id);
    checkpoint_ = id;
}

void SystemGraph::replace_logic(const NodeId& id, std::shared_ptr<const NodeLogic> logic)
{
    Node& node = nodes_[index_of(id)];
    if (!logic || logic->kind() != node.kind) {
        throw Error(ErrorCode::InvalidArgument, "replacement logic for '" + id.str() +
                                                    "' must be a " +
                                                    std::string(to_string(node.kind)));
    }
    node.logic = std::move(logic);
}

namespace {

struct Adjacency {
    std::vector<std::vector<std::size_t>> all;        // every edge
    std::vector<std::vector<std::size_t>> ordering;   // edges not leaving a Delay
    std::vector<std::size_t> in_count;
};

Adjacency adjacency(const SystemGraph& g)
{
    Adjacency adj;
    const std::size_t n = g.nodes().size();
    adj.all.resize(n);
    adj.ordering.resize(n);
    adj.in_count.assign(n, 0);
    for (const auto& e : g.edges()) {
        const std::size_t s = g.index_of(e.source);
        const std::size_t t = g.index_of(e.target);
        adj.all[s].push_back(t);
        if (g.nodes()[s].kind != NodeKind::Delay) adj.ordering[s].push_back(t);
        ++adj.in_count[t];
    }
    return adj;
}

std::vector<std::size_t> bfs_depth(const Adjacency& adj, std::size_t start)
{
    constexpr auto unreached = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> depth(adj.all.size(), unreached);
    std::queue<std::size_t> q;
    depth[start] = 0;
    q.push(start);
    while (!q.empty()) {
        const std::size_t u = q.front();
        q.pop();
        for (std::size_t v : adj.all[u]) {
            if (depth[v] == unreached) {
                depth[v] = depth[u] + 1;
                q.push(v);
            }
        }
    }
    return depth;
}

// Tarjan's algorithm; returns components with more than one node.
std::vector<std::vector<std::size_t>> nontrivial_components(
    const std::vector<std::vector<std::size_t>>& out)
{
    const std::size_t n = out.size();
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::vector<std::vector<std::size_t>> components;
    int counter = 0;

    std::function<void(std::size_t)> visit = [&](std::size_t v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
        for (std::size_t w : out[v]) {
            if (index[w] < 0) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            std::vector<std::size_t> component;
            std::size_t w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
                component.push_back(w);
            } while (w != v);
            if (component.size() > 1) components.push_back(std::move(component));
        }
    };
    for (std::size_t v = 0; v < n; ++v) {
        if (index[v] < 0) visit(v);
    }
    return components;
}

} // namespace

std::vector<Violation> SystemGraph::validate() const
{
    std::vector<Violation> violations;
    using Rule = Violation::Rule;

    if (!start_) violations.push_back({Rule::MissingStartNode, {}, "no start node set"});
    if (!checkpoint_) {
        violations.push_back({Rule::MissingCheckpointNode, {}, "no checkpoint node set"});
    }

    const Adjacency adj = adjacency(*this);

    if (start_) {
        const auto depth = bfs_depth(adj, index_of(*start_));
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (depth[i] == std::numeric_limits<std::size_t>::max()) {
                violations.push_back({Rule::Unreachable, {nodes_[i].id},
                                      "node '" + nodes_[i].id.str() +
                                          "' is not reachable from the start node"});
            }
        }
    }

    auto components = nontrivial_components(adj.ordering);
    std::vector<std::vector<NodeId>> cycles;
    for (const auto& component : components) {
        std::vector<NodeId> ids;
        for (std::size_t i : component) ids.push_back(nodes_[i].id);
        std::sort(ids.begin(), ids.end());
        cycles.push_back(std::move(ids));
    }
    std::sort(cycles.begin(), cycles.end());
    for (auto& ids : cycles) {
        std::string names;
        for (const auto& id : ids) names += (names.empty() ? "" : ", ") + id.str();
        violations.push_back({Rule::CycleWithoutDelay, ids,
                              "cycle through {" + names + "} contains no Delay node"});
    }

    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& logic = *nodes_[i].logic;
        const std::size_t have = adj.in_count[i];
        const std::size_t want = logic.variables().size();
        const bool ok = logic.variadic() ? have >= 1 : have == want;
        if (!ok) {
            violations.push_back(
                {Rule::ArityMismatch, {nodes_[i].id},
                 "node '" + nodes_[i].id.str() + "' has " + std::to_string(have) +
                     " incoming edges but expects " +
                     (logic.variadic() ? std::string("at least 1") : std::to_string(want))});
        }
    }
    return violations;
}

std::vector<NodeId> SystemGraph::evaluation_order() const
{
    const auto violations = validate();
    if (!violations.empty()) {
        std::string message = "graph is not valid:";
        for (const auto& v : violations) message += " " + v.message + ";";
        throw Error(ErrorCode::InvalidGraph, message);
    }

    const Adjacency adj = adjacency(*this);
    const auto depth = bfs_depth(adj, index_of(*start_));

    std::vector<std::size_t> pending(nodes_.size(), 0);
    for (std::size_t u = 0; u < nodes_.size(); ++u) {
        for (std::size_t v : adj.ordering[u]) ++pending[v];
    }

    using Key = std::tuple<std::size_t, std::string, std::size_t>;
    std::priority_queue<Key, std::vector<Key>, std::greater<>> ready;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (pending[i] == 0) ready.emplace(depth[i], nodes_[i].id.str(), i);
    }

    std::vector<NodeId> order;
    order.reserve(nodes_.size());
    while (!ready.empty()) {
        const std::size_t u = std::get<2>(ready.top());
        ready.pop();
        order.push_back(nodes_[u].id);
        for (std::size_t v : adj.ordering[u]) {
            if (--pending[v] == 0) ready.emplace(depth[v], nodes_[v].id.str(), v);
        }
    }
    return order;
}

namespace {

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

std::string quote(const std::string& s) { return "\"" + escape(s) + "\""; }

} // namespace

std::string export_dot(const SystemGraph& graph)
{
    std::vector<const SystemGraph::Node*> nodes;
    for (const auto& n : graph.nodes()) nodes.push_back(&n);
    std::sort(nodes.begin(), nodes.end(), [](auto* a, auto* b) { return a->id < b->id; });

    std::vector<SystemGraph::Edge> edges = graph.edges();
    std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
        return std::tie(a.source, a.target) < std::tie(b.source, b.target);
    });

    std::string out = "digraph G {\n";
    for (const auto* n : nodes) {
        out += "  " + quote(n->id.str()) + " [label=" +
               "\"" + escape(n->id.str()) + "\\n" + std::string(to_string(n->kind)) + "\"" + "];\n";
    }
    for (const auto& e : edges) {
        out += "  " + quote(e.source.str()) + " -> " + quote(e.target.str()) + ";\n";
    }
    out += "}\n";
    return out;
}

} // namespace ergoloop
