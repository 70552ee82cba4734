#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ergoloop/node_logic.hpp"

namespace ergoloop {

/// Unique, non-empty node name ("A1", "P1", ...).
class NodeId {
public:
    NodeId() = default;
    NodeId(std::string name) : name_(std::move(name)) {}
    NodeId(const char* name) : name_(name) {}

    const std::string& str() const { return name_; }
    bool empty() const { return name_.empty(); }

    auto operator<=>(const NodeId&) const = default;
    bool operator==(const NodeId&) const = default;

private:
    std::string name_;
};

/// One broken graph rule, reported by SystemGraph::validate().
struct Violation {
    enum class Rule {
        MissingStartNode,
        MissingCheckpointNode,
        Unreachable,
        CycleWithoutDelay,
        ArityMismatch,
    };

    Rule rule;
    std::vector<NodeId> nodes;
    std::string message;
};

std::string_view to_string(Violation::Rule rule);

/// Directed graph of typed nodes describing one closed-loop interconnection.
///
/// Every node carries a NodeLogic. Edges deliver the (single, broadcast)
/// output of the source to the target; a target with several incoming edges
/// binds them to its declared variables in edge-insertion order. Every
/// directed cycle must pass through a Delay node, whose output is the value
/// it buffered on the previous pass.
class SystemGraph {
public:
    struct Node {
        NodeId id;
        NodeKind kind;
        std::shared_ptr<const NodeLogic> logic;
    };

    struct Edge {
        NodeId source;
        NodeId target;
        bool operator==(const Edge&) const = default;
    };

    /// Throws DuplicateNode, or InvalidArgument when the id is empty, the logic
    /// is null, or the logic's kind differs from `kind`.
    void add_node(NodeId id, NodeKind kind, std::shared_ptr<const NodeLogic> logic);

    /// Throws UnknownNode, DuplicateEdge, or SelfLoop (a self-loop is only
    /// accepted on a Delay node).
    void connect_nodes(const NodeId& source, const NodeId& target);

    void set_start_node(const NodeId& id);
    void set_checkpoint_node(const NodeId& id);

    /// Swaps the logic of an existing node, keeping its kind.
    void replace_logic(const NodeId& id, std::shared_ptr<const NodeLogic> logic);

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::optional<NodeId>& start_node() const { return start_; }
    const std::optional<NodeId>& checkpoint_node() const { return checkpoint_; }

    bool contains(const NodeId& id) const { return index_.contains(id.str()); }
    std::size_t index_of(const NodeId& id) const;
    const Node& node(const NodeId& id) const { return nodes_[index_of(id)]; }

    /// Empty iff the graph can be simulated.
    std::vector<Violation> validate() const;

    /// Node order for one pass. Starts from the start node, places every
    /// non-Delay source before its targets (Delay outputs come from the
    /// previous pass, so edges leaving a Delay impose no order), and breaks
    /// ties by BFS depth from the start node, then by NodeId. Throws
    /// InvalidGraph when validate() is not empty.
    std::vector<NodeId> evaluation_order() const;

private:
    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::map<std::string, std::size_t> index_;
    std::optional<NodeId> start_;
    std::optional<NodeId> checkpoint_;
};

/// Graphviz text: one statement per node (sorted by id) and per edge
/// (sorted by source, then target). Byte-stable for a given graph.
std::string export_dot(const SystemGraph& graph);

} // namespace ergoloop
