#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "plcprov/trace.hpp"

namespace plcprov {

inline constexpr const char* kGraphSchema = "plcprov-graph/1";

enum class NodeKind { Entity, Activity, Agent };

// Micro-level node types plus the component types that only appear in the
// macro (quotient) view.
enum class NodeType {
    Reading,
    VariableState,
    Command,
    Message,
    Scan,
    Actuation,
    Plc,
    SensorDevice,
    Operator,
    OriginPoint,
    Actuator,  // macro only
    Channel    // macro only
};

NodeKind kind_of(NodeType t);
std::string to_string(NodeKind k);
std::string to_string(NodeType t);
NodeType node_type_from_string(const std::string& s, const std::string& where);

struct ProvNode {
    std::string id;
    NodeType type = NodeType::Reading;
    uint64_t tick = 0;  // 0 for agents and macro nodes
    uint64_t seq = 0;
    ojson attrs;  // type-specific payload, see docs/formats.md

    NodeKind kind() const { return kind_of(type); }
    std::string attr(const std::string& key) const;         // "" when absent
    bool attr_flag(const std::string& key) const;           // false when absent
    SignalValue value() const;                               // attrs["value"]
};

// Edges point from the later element to the earlier one it depends on
// (usage, generation, derivation, attribution). Walking stored edges
// forward therefore walks into the past.
enum class EdgeType {
    Used,               // Activity -> Entity
    WasGeneratedBy,     // Entity -> Activity
    WasAssociatedWith,  // Activity -> Agent
    WasAttributedTo,    // Entity -> Agent
    WasDerivedFrom,     // Entity -> Entity
    WasInformedBy       // Activity -> Activity (receiver -> sender)
};

std::string to_string(EdgeType t);
EdgeType edge_type_from_string(const std::string& s, const std::string& where);

struct ProvEdge {
    std::string src, dst;
    EdgeType type = EdgeType::Used;

    bool operator<(const ProvEdge& o) const {
        if (src != o.src) return src < o.src;
        if (dst != o.dst) return dst < o.dst;
        return type < o.type;
    }
    bool operator==(const ProvEdge& o) const {
        return src == o.src && dst == o.dst && type == o.type;
    }
};

// Where the graph came from; copied off the trace header.
struct GraphMeta {
    std::string scenario;
    std::string attack;
    uint64_t seed = 0;
    uint64_t ticks = 0;
    uint64_t ms_per_tick = 100;
};

struct ProvGraph {
    std::string level = "micro";  // "micro" or "macro"
    GraphMeta meta;
    Topology universe;
    std::vector<ProvNode> nodes;  // insertion order, deterministic
    std::vector<ProvEdge> edges;  // canonical (src, dst, type) order after finalize

    const ProvNode* find(const std::string& id) const;
    const ProvNode& at(const std::string& id) const;  // throws NotFoundError
    ProvNode& mutable_at(const std::string& id);

    void add_node(ProvNode n);  // throws ValidationError on duplicate id
    void add_edge(const std::string& src, const std::string& dst, EdgeType t);
    void finalize();  // sorts and dedups edges, builds adjacency

    // Everything `id` transitively depends on, following stored edges.
    // Reflexive: the start node is included. Agents are included.
    std::set<std::string> ancestors(const std::string& id) const;
    // Reverse closure: everything that depends on `id`. Reflexive.
    std::set<std::string> descendants(const std::string& id) const;

    const std::vector<size_t>& edges_out(const std::string& id) const;
    const std::vector<size_t>& edges_in(const std::string& id) const;

    ojson to_json() const;
    static ProvGraph from_json(const json& j);

    // Graphviz rendering. `restrict` keeps only the listed nodes (and the
    // edges between them); `highlight` fills the listed nodes.
    std::string to_dot(const std::set<std::string>* restrict_to = nullptr,
                       const std::set<std::string>* highlight = nullptr) const;

private:
    std::map<std::string, size_t> index_;
    std::map<std::string, std::vector<size_t>> out_, in_;
};

// Assembles the causal graph from a finished trace. Pure: the same trace
// yields the same graph, node for node and edge for edge.
ProvGraph build_graph(const TraceLog& log);

// Component-level quotient of a micro graph. Every micro node maps onto the
// device, controller, actuator or channel it belongs to; self-loops vanish
// and parallel edges of one type merge.
struct MacroResult {
    ProvGraph graph;
    std::map<std::string, std::string> projection;  // micro id -> macro id
};
MacroResult build_macro(const ProvGraph& micro);

// Command entities of one actuator at one tick, in seq order.
std::vector<const ProvNode*> commands_at(const ProvGraph& g, const std::string& actuator,
                                         uint64_t tick);

// Sensor ids whose readings sit in the node's ancestry.
std::set<std::string> influencing_sensors(const ProvGraph& g, const std::string& node_id);

}  // namespace plcprov
