#include "plcprov/prov.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "plcprov/errors.hpp"

namespace plcprov {

NodeKind kind_of(NodeType t) {
    switch (t) {
        case NodeType::Reading:
        case NodeType::VariableState:
        case NodeType::Command:
        case NodeType::Message: return NodeKind::Entity;
        case NodeType::Scan:
        case NodeType::Actuation: return NodeKind::Activity;
        default: return NodeKind::Agent;
    }
}

std::string to_string(NodeKind k) {
    switch (k) {
        case NodeKind::Entity: return "entity";
        case NodeKind::Activity: return "activity";
        case NodeKind::Agent: return "agent";
    }
    return "?";
}

std::string to_string(NodeType t) {
    switch (t) {
        case NodeType::Reading: return "reading";
        case NodeType::VariableState: return "state";
        case NodeType::Command: return "command";
        case NodeType::Message: return "message";
        case NodeType::Scan: return "scan";
        case NodeType::Actuation: return "actuation";
        case NodeType::Plc: return "plc";
        case NodeType::SensorDevice: return "sensor";
        case NodeType::Operator: return "operator";
        case NodeType::OriginPoint: return "origin";
        case NodeType::Actuator: return "actuator";
        case NodeType::Channel: return "channel";
    }
    return "?";
}

NodeType node_type_from_string(const std::string& s, const std::string& where) {
    if (s == "reading") return NodeType::Reading;
    if (s == "state") return NodeType::VariableState;
    if (s == "command") return NodeType::Command;
    if (s == "message") return NodeType::Message;
    if (s == "scan") return NodeType::Scan;
    if (s == "actuation") return NodeType::Actuation;
    if (s == "plc") return NodeType::Plc;
    if (s == "sensor") return NodeType::SensorDevice;
    if (s == "operator") return NodeType::Operator;
    if (s == "origin") return NodeType::OriginPoint;
    if (s == "actuator") return NodeType::Actuator;
    if (s == "channel") return NodeType::Channel;
    throw ParseError(where + ": unknown node type \"" + s + "\"");
}

std::string to_string(EdgeType t) {
    switch (t) {
        case EdgeType::Used: return "used";
        case EdgeType::WasGeneratedBy: return "wasGeneratedBy";
        case EdgeType::WasAssociatedWith: return "wasAssociatedWith";
        case EdgeType::WasAttributedTo: return "wasAttributedTo";
        case EdgeType::WasDerivedFrom: return "wasDerivedFrom";
        case EdgeType::WasInformedBy: return "wasInformedBy";
    }
    return "?";
}

EdgeType edge_type_from_string(const std::string& s, const std::string& where) {
    if (s == "used") return EdgeType::Used;
    if (s == "wasGeneratedBy") return EdgeType::WasGeneratedBy;
    if (s == "wasAssociatedWith") return EdgeType::WasAssociatedWith;
    if (s == "wasAttributedTo") return EdgeType::WasAttributedTo;
    if (s == "wasDerivedFrom") return EdgeType::WasDerivedFrom;
    if (s == "wasInformedBy") return EdgeType::WasInformedBy;
    throw ParseError(where + ": unknown edge type \"" + s + "\"");
}

std::string ProvNode::attr(const std::string& key) const {
    auto it = attrs.find(key);
    if (it == attrs.end() || !it->is_string()) return "";
    return it->get<std::string>();
}

bool ProvNode::attr_flag(const std::string& key) const {
    auto it = attrs.find(key);
    return it != attrs.end() && it->is_boolean() && it->get<bool>();
}

SignalValue ProvNode::value() const {
    auto it = attrs.find("value");
    if (it == attrs.end()) throw NotFoundError("node \"" + id + "\" carries no value");
    return SignalValue::from_json(*it, "node " + id);
}

const ProvNode* ProvGraph::find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &nodes[it->second];
}

const ProvNode& ProvGraph::at(const std::string& id) const {
    const ProvNode* n = find(id);
    if (!n) throw NotFoundError("no graph node \"" + id + "\"");
    return *n;
}

ProvNode& ProvGraph::mutable_at(const std::string& id) {
    auto it = index_.find(id);
    if (it == index_.end()) throw NotFoundError("no graph node \"" + id + "\"");
    return nodes[it->second];
}

void ProvGraph::add_node(ProvNode n) {
    if (index_.count(n.id)) throw ValidationError("duplicate graph node \"" + n.id + "\"");
    index_.emplace(n.id, nodes.size());
    nodes.push_back(std::move(n));
}

void ProvGraph::add_edge(const std::string& src, const std::string& dst, EdgeType t) {
    if (!index_.count(src)) throw ValidationError("edge from unknown node \"" + src + "\"");
    if (!index_.count(dst)) throw ValidationError("edge to unknown node \"" + dst + "\"");
    edges.push_back({src, dst, t});
}

void ProvGraph::finalize() {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    out_.clear();
    in_.clear();
    for (size_t i = 0; i < edges.size(); ++i) {
        out_[edges[i].src].push_back(i);
        in_[edges[i].dst].push_back(i);
    }
}

namespace {
const std::vector<size_t> kNoEdges;
}

const std::vector<size_t>& ProvGraph::edges_out(const std::string& id) const {
    auto it = out_.find(id);
    return it == out_.end() ? kNoEdges : it->second;
}

const std::vector<size_t>& ProvGraph::edges_in(const std::string& id) const {
    auto it = in_.find(id);
    return it == in_.end() ? kNoEdges : it->second;
}

std::set<std::string> ProvGraph::ancestors(const std::string& id) const {
    at(id);
    std::set<std::string> seen{id};
    std::deque<std::string> todo{id};
    while (!todo.empty()) {
        std::string cur = std::move(todo.front());
        todo.pop_front();
        for (size_t ei : edges_out(cur)) {
            const std::string& nxt = edges[ei].dst;
            if (seen.insert(nxt).second) todo.push_back(nxt);
        }
    }
    return seen;
}

std::set<std::string> ProvGraph::descendants(const std::string& id) const {
    at(id);
    std::set<std::string> seen{id};
    std::deque<std::string> todo{id};
    while (!todo.empty()) {
        std::string cur = std::move(todo.front());
        todo.pop_front();
        for (size_t ei : edges_in(cur)) {
            const std::string& nxt = edges[ei].src;
            if (seen.insert(nxt).second) todo.push_back(nxt);
        }
    }
    return seen;
}

ojson ProvGraph::to_json() const {
    ojson j;
    j["schema"] = kGraphSchema;
    j["level"] = level;
    ojson m;
    m["scenario"] = meta.scenario;
    m["attack"] = meta.attack;
    m["seed"] = meta.seed;
    m["ticks"] = meta.ticks;
    m["ms_per_tick"] = meta.ms_per_tick;
    j["meta"] = std::move(m);
    j["universe"] = universe.to_json();
    ojson ns = ojson::array();
    for (const auto& n : nodes) {
        ojson nj;
        nj["id"] = n.id;
        nj["kind"] = to_string(n.kind());
        nj["type"] = to_string(n.type);
        nj["tick"] = n.tick;
        nj["seq"] = n.seq;
        nj["attrs"] = n.attrs;
        ns.push_back(std::move(nj));
    }
    j["nodes"] = std::move(ns);
    ojson es = ojson::array();
    for (const auto& e : edges) {
        ojson ej;
        ej["src"] = e.src;
        ej["dst"] = e.dst;
        ej["type"] = to_string(e.type);
        es.push_back(std::move(ej));
    }
    j["edges"] = std::move(es);
    return j;
}

ProvGraph ProvGraph::from_json(const json& j) {
    const std::string where = "graph";
    jsonu::check_keys(j, where, {"schema", "level", "meta", "universe", "nodes", "edges"}, {});
    std::string schema = jsonu::require_string(j, "schema", where);
    if (schema != kGraphSchema)
        throw ParseError(where + ": unsupported schema \"" + schema + "\"");
    ProvGraph g;
    g.level = jsonu::require_string(j, "level", where);
    if (g.level != "micro" && g.level != "macro")
        throw ParseError(where + ".level: expected \"micro\" or \"macro\"");
    const json& m = j.at("meta");
    jsonu::check_keys(m, where + ".meta", {"scenario", "attack", "seed", "ticks", "ms_per_tick"},
                      {});
    g.meta.scenario = jsonu::require_string(m, "scenario", where + ".meta");
    g.meta.attack = jsonu::require_string(m, "attack", where + ".meta");
    g.meta.seed = jsonu::require_uint(m, "seed", where + ".meta");
    g.meta.ticks = jsonu::require_uint(m, "ticks", where + ".meta");
    g.meta.ms_per_tick = jsonu::require_uint(m, "ms_per_tick", where + ".meta");
    g.universe = Topology::from_json(j.at("universe"));
    size_t i = 0;
    for (const auto& nj : j.at("nodes")) {
        std::string w = where + ".nodes[" + std::to_string(i++) + "]";
        jsonu::check_keys(nj, w, {"id", "kind", "type", "tick", "seq", "attrs"}, {});
        ProvNode n;
        n.id = jsonu::require_string(nj, "id", w);
        n.type = node_type_from_string(jsonu::require_string(nj, "type", w), w + ".type");
        if (jsonu::require_string(nj, "kind", w) != to_string(n.kind()))
            throw ParseError(w + ": kind does not match type \"" + to_string(n.type) + "\"");
        n.tick = jsonu::require_uint(nj, "tick", w);
        n.seq = jsonu::require_uint(nj, "seq", w);
        if (!nj.at("attrs").is_object()) throw ParseError(w + ".attrs: expected object");
        n.attrs = nj.at("attrs");
        try {
            g.add_node(std::move(n));
        } catch (const ValidationError& e) {
            throw ParseError(w + ": " + e.what());
        }
    }
    i = 0;
    for (const auto& ej : j.at("edges")) {
        std::string w = where + ".edges[" + std::to_string(i++) + "]";
        jsonu::check_keys(ej, w, {"src", "dst", "type"}, {});
        try {
            g.add_edge(jsonu::require_string(ej, "src", w), jsonu::require_string(ej, "dst", w),
                       edge_type_from_string(jsonu::require_string(ej, "type", w), w + ".type"));
        } catch (const ValidationError& e) {
            throw ParseError(w + ": " + e.what());
        }
    }
    g.finalize();
    return g;
}

std::string ProvGraph::to_dot(const std::set<std::string>* restrict_to,
                              const std::set<std::string>* highlight) const {
    std::ostringstream os;
    // Ids never contain backslashes; label text uses \n as the dot line break.
    auto quote = [](const std::string& s) {
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += '\\';
            q += c;
        }
        return q + "\"";
    };
    auto kept = [&](const std::string& id) { return !restrict_to || restrict_to->count(id) > 0; };
    os << "digraph provenance {\n  rankdir=RL;\n  node [fontsize=10];\n";
    for (const auto& n : nodes) {
        if (!kept(n.id)) continue;
        const char* shape = n.kind() == NodeKind::Entity     ? "ellipse"
                            : n.kind() == NodeKind::Activity ? "box"
                                                             : "house";
        std::string label = n.id;
        auto v = n.attrs.find("value");
        if (v != n.attrs.end()) label += "\\n= " + v->dump();
        os << "  " << quote(n.id) << " [shape=" << shape << ", label=" << quote(label);
        if (highlight && highlight->count(n.id))
            os << ", style=filled, fillcolor=gold, penwidth=2";
        os << "];\n";
    }
    for (const auto& e : edges) {
        if (!kept(e.src) || !kept(e.dst)) continue;
        os << "  " << quote(e.src) << " -> " << quote(e.dst) << " [label=\"" << to_string(e.type)
           << "\", fontsize=8];\n";
    }
    os << "}\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Graph assembly

namespace {

std::string reading_id(const std::string& plc, const std::string& var, uint64_t t, uint64_t s) {
    return "reading:" + plc + "." + var + ":t" + std::to_string(t) + ":s" + std::to_string(s);
}
std::string state_id(const std::string& plc, const std::string& var, uint64_t t, uint64_t s) {
    return "state:" + plc + "." + var + ":t" + std::to_string(t) + ":s" + std::to_string(s);
}
std::string init_state_id(const std::string& plc, const std::string& var) {
    return "state:" + plc + "." + var + ":init";
}
std::string command_id(const std::string& actuator, uint64_t t, uint64_t s) {
    return "command:" + actuator + ":t" + std::to_string(t) + ":s" + std::to_string(s);
}
std::string message_id(const std::string& channel, uint64_t t, uint64_t s) {
    return "message:" + channel + ":t" + std::to_string(t) + ":s" + std::to_string(s);
}
std::string scan_id(const std::string& plc, uint64_t t) {
    return "scan:" + plc + ":t" + std::to_string(t);
}
std::string actuation_id(const std::string& actuator, uint64_t t) {
    return "actuation:" + actuator + ":t" + std::to_string(t);
}

struct Builder {
    const TraceLog& log;
    ProvGraph g;

    // Rolling resolution state.
    std::map<VarKey, std::string> cur_reading;   // delivered this tick
    std::map<VarKey, std::string> last_reading;  // latest ever delivered
    std::map<VarKey, std::string> last_state;    // latest finished VariableState
    std::map<std::string, std::string> cur_message;  // channel -> node, this tick
    // Snapshots from the end of the previous tick; messages sent back then
    // must resolve their sources against that view, not today's samples.
    std::map<VarKey, std::string> prev_reading;
    std::map<std::string, std::string> prev_message;
    std::map<std::pair<std::string, uint64_t>, std::string> scans;  // (plc, tick)
    uint64_t cur_tick = 0;

    explicit Builder(const TraceLog& l) : log(l) {
        g.universe = l.header.universe;
        g.meta.scenario = l.header.scenario;
        g.meta.attack = l.header.attack;
        g.meta.seed = l.header.seed;
        g.meta.ticks = l.header.ticks;
        g.meta.ms_per_tick = l.header.ms_per_tick;
    }

    void ensure_agent(NodeType type, const std::string& id, const std::string& key,
                      const std::string& val) {
        if (g.find(id)) return;
        ProvNode n;
        n.id = id;
        n.type = type;
        n.attrs = ojson{{key, val}};
        g.add_node(std::move(n));
    }

    void seed_agents() {
        for (const auto& p : g.universe.plcs) ensure_agent(NodeType::Plc, "plc:" + p.id, "plc", p.id);
        for (const auto& s : g.universe.sensors)
            ensure_agent(NodeType::SensorDevice, "sensor:" + s.id, "sensor", s.id);
        for (const auto& a : g.universe.attachment_points)
            ensure_agent(NodeType::OriginPoint, "origin:" + a, "origin", a);
    }

    // Initial-value entity backing reads that precede any write.
    std::string init_entity(const VarKey& key) {
        std::string id = init_state_id(key.plc_id, key.name);
        if (!g.find(id)) {
            ProvNode n;
            n.id = id;
            n.type = NodeType::VariableState;
            n.attrs = ojson{{"plc", key.plc_id}, {"var", key.name}, {"initial", true}};
            const VariableDecl* decl = g.universe.find_variable(key);
            if (decl) {
                SignalValue v = decl->initial ? *decl->initial : decl->type.default_value();
                n.attrs["value"] = v.to_json();
            }
            g.add_node(std::move(n));
        }
        return id;
    }

    // Where a value read from `var` on `plc` came from, as of the current
    // tick's scan phase: inputs resolve to readings, everything else to the
    // newest finished state.
    std::string resolve_var(const std::string& plc, const std::string& var) {
        VarKey key{plc, var};
        const VariableDecl* decl = g.universe.find_variable(key);
        if (decl && decl->dir == Direction::In) {
            auto it = cur_reading.find(key);
            if (it != cur_reading.end()) return it->second;
            auto it2 = last_reading.find(key);
            if (it2 != last_reading.end()) return it2->second;
            return init_entity(key);
        }
        auto it = last_state.find(key);
        if (it != last_state.end()) return it->second;
        return init_entity(key);
    }

    void tick_boundary(uint64_t t) {
        if (t == cur_tick) return;
        prev_reading = last_reading;
        prev_message = std::move(cur_message);
        cur_reading.clear();
        cur_message.clear();
        cur_tick = t;
    }

    // Like resolve_var, but as the sender saw things one tick ago.
    std::string resolve_sender_var(const std::string& plc, const std::string& var) {
        VarKey key{plc, var};
        const VariableDecl* decl = g.universe.find_variable(key);
        if (decl && decl->dir == Direction::In) {
            auto it = prev_reading.find(key);
            if (it != prev_reading.end()) return it->second;
            return init_entity(key);
        }
        auto it = last_state.find(key);
        if (it != last_state.end()) return it->second;
        return init_entity(key);
    }

    void on_reading(const TraceRecord& r) {
        VarKey key{r.plc, r.var->name};
        const SensorSpec* sensor = g.universe.sensor_on_variable(key);
        ProvNode n;
        n.id = reading_id(r.plc, r.var->name, r.tick, r.seq);
        n.type = NodeType::Reading;
        n.tick = r.tick;
        n.seq = r.seq;
        n.attrs["plc"] = r.plc;
        n.attrs["var"] = r.var->name;
        if (r.var->line) n.attrs["line"] = *r.var->line;
        n.attrs["value"] = r.value->to_json();
        n.attrs["origin"] = r.origin;
        if (sensor) {
            n.attrs["sensor"] = sensor->id;
            n.attrs["declared_origin"] = sensor->origin_point;
        }
        if (r.kind == RecordKind::OperatorInput) n.attrs["operator"] = true;
        std::string id = n.id;
        g.add_node(std::move(n));

        g.add_edge(id, "origin:" + r.origin, EdgeType::WasAttributedTo);
        if (sensor && r.origin == sensor->origin_point)
            g.add_edge(id, "sensor:" + sensor->id, EdgeType::WasAttributedTo);
        if (r.kind == RecordKind::OperatorInput) {
            std::string op = "operator:" + r.origin;
            ensure_agent(NodeType::Operator, op, "origin", r.origin);
            g.add_edge(id, op, EdgeType::WasAttributedTo);
        }
        cur_reading[key] = id;
        last_reading[key] = id;
    }

    void on_message(const TraceRecord& r) {
        ProvNode n;
        n.id = message_id(r.channel, r.tick, r.seq);
        n.type = NodeType::Message;
        n.tick = r.tick;
        n.seq = r.seq;
        n.attrs["channel"] = r.channel;
        n.attrs["from"] = r.from_plc;
        n.attrs["to"] = r.to_plc;
        n.attrs["value"] = r.value->to_json();
        n.attrs["origin"] = r.origin;
        n.attrs["injected"] = !r.sent_tick.has_value();
        std::string id = n.id;
        g.add_node(std::move(n));

        g.add_edge(id, "origin:" + r.origin, EdgeType::WasAttributedTo);
        if (r.sent_tick) {
            auto it = scans.find({r.from_plc, *r.sent_tick});
            if (it == scans.end())
                throw ParseError("trace: message " + id + " sent by unseen scan of \"" +
                                 r.from_plc + "\" at tick " + std::to_string(*r.sent_tick));
            g.add_edge(id, it->second, EdgeType::WasGeneratedBy);
            g.add_edge(id, "plc:" + r.from_plc, EdgeType::WasAttributedTo);
            std::set<std::string> sources;
            for (const auto& v : r.from_vars) sources.insert(resolve_sender_var(r.from_plc, v));
            for (const auto& ch : r.from_channels) {
                auto pm = prev_message.find(ch);
                if (pm != prev_message.end()) sources.insert(pm->second);
            }
            sources.erase(id);
            for (const auto& s : sources) g.add_edge(id, s, EdgeType::WasDerivedFrom);
        }
        cur_message[r.channel] = id;
    }

    void on_scan(const TraceRecord& r) {
        ProvNode n;
        n.id = scan_id(r.plc, r.tick);
        n.type = NodeType::Scan;
        n.tick = r.tick;
        n.seq = r.seq;
        n.attrs["plc"] = r.plc;
        n.attrs["fired"] = r.fired;
        std::string id = n.id;
        g.add_node(std::move(n));
        scans[{r.plc, r.tick}] = id;

        g.add_edge(id, "plc:" + r.plc, EdgeType::WasAssociatedWith);
        // The controller consumed its whole input image: every reading and
        // message that arrived this tick, plus the persisted states it read.
        for (const auto& [key, rid] : cur_reading)
            if (key.plc_id == r.plc) g.add_edge(id, rid, EdgeType::Used);
        for (const auto& [ch, mid] : cur_message) {
            const ChannelSpec* c = g.universe.find_channel(ch);
            if (!c || c->to_plc != r.plc) continue;
            g.add_edge(id, mid, EdgeType::Used);
            const ProvNode& m = g.at(mid);
            if (!m.attr_flag("injected")) {
                for (size_t ei : g.edges_out(mid))
                    if (g.edges[ei].type == EdgeType::WasGeneratedBy)
                        g.add_edge(id, g.edges[ei].dst, EdgeType::WasInformedBy);
            }
        }
        for (const auto& v : r.read_vars) {
            VarKey key{r.plc, v};
            const VariableDecl* decl = g.universe.find_variable(key);
            bool is_input = decl && decl->dir == Direction::In;
            if (is_input && cur_reading.count(key)) continue;  // already Used above
            g.add_edge(id, resolve_var(r.plc, v), EdgeType::Used);
        }
    }

    void derive_from(const std::string& id, const std::string& plc, const TraceRecord& r) {
        std::set<std::string> sources;
        for (const auto& v : r.from_vars) sources.insert(resolve_var(plc, v));
        for (const auto& ch : r.from_channels) {
            auto it = cur_message.find(ch);
            if (it != cur_message.end()) sources.insert(it->second);
        }
        sources.erase(id);
        for (const auto& s : sources) g.add_edge(id, s, EdgeType::WasDerivedFrom);
    }

    void on_state(const TraceRecord& r) {
        const VariableDecl* decl = g.universe.find_variable({r.plc, r.var->name});
        ProvNode n;
        n.id = state_id(r.plc, r.var->name, r.tick, r.seq);
        n.type = NodeType::VariableState;
        n.tick = r.tick;
        n.seq = r.seq;
        n.attrs["plc"] = r.plc;
        n.attrs["var"] = r.var->name;
        n.attrs["dir"] = to_string(decl ? decl->dir : r.var->dir);
        n.attrs["value"] = r.value->to_json();
        n.attrs["rule"] = r.rule;
        std::string id = n.id;
        g.add_node(std::move(n));

        auto it = scans.find({r.plc, r.tick});
        if (it == scans.end())
            throw ParseError("trace: state " + id + " precedes its scan record");
        g.add_edge(id, it->second, EdgeType::WasGeneratedBy);
        g.add_edge(id, "plc:" + r.plc, EdgeType::WasAttributedTo);
        derive_from(id, r.plc, r);
        // Visible to later ticks only; same-tick readers share the scan node.
        last_state[{r.plc, r.var->name}] = id;
    }

    void on_command(const TraceRecord& r) {
        const ActuatorSpec* act = g.universe.actuator_on_variable({r.plc, r.var->name});
        if (!act)
            throw ParseError("trace: command on \"" + r.plc + "." + r.var->name +
                             "\" matches no actuator");
        ProvNode n;
        n.id = command_id(act->id, r.tick, r.seq);
        n.type = NodeType::Command;
        n.tick = r.tick;
        n.seq = r.seq;
        n.attrs["actuator"] = act->id;
        n.attrs["plc"] = r.plc;
        n.attrs["var"] = r.var->name;
        n.attrs["value"] = r.value->to_json();
        n.attrs["rule"] = r.rule;
        std::string id = n.id;
        g.add_node(std::move(n));

        auto it = scans.find({r.plc, r.tick});
        if (it == scans.end())
            throw ParseError("trace: command " + id + " precedes its scan record");
        g.add_edge(id, it->second, EdgeType::WasGeneratedBy);
        g.add_edge(id, "plc:" + r.plc, EdgeType::WasAttributedTo);
        derive_from(id, r.plc, r);

        std::string aid = actuation_id(act->id, r.tick);
        if (!g.find(aid)) {
            ProvNode a;
            a.id = aid;
            a.type = NodeType::Actuation;
            a.tick = r.tick;
            a.seq = r.seq;
            a.attrs["actuator"] = act->id;
            g.add_node(std::move(a));
            g.add_edge(aid, "plc:" + r.plc, EdgeType::WasAssociatedWith);
        }
        g.add_edge(aid, id, EdgeType::Used);
    }

    void on_fault(const TraceRecord& r) {
        auto it = scans.find({r.plc, r.tick});
        if (it == scans.end())
            throw ParseError("trace: fault record precedes its scan record");
        g.mutable_at(it->second).attrs["fault"] = r.detail;
    }

    ProvGraph run() {
        seed_agents();
        for (const auto& r : log.records) {
            tick_boundary(r.tick);
            switch (r.kind) {
                case RecordKind::Reading:
                case RecordKind::OperatorInput: on_reading(r); break;
                case RecordKind::Message: on_message(r); break;
                case RecordKind::Scan: on_scan(r); break;
                case RecordKind::State: on_state(r); break;
                case RecordKind::Command: on_command(r); break;
                case RecordKind::Fault: on_fault(r); break;
            }
        }
        g.finalize();
        return std::move(g);
    }
};

}  // namespace

ProvGraph build_graph(const TraceLog& log) {
    Builder b(log);
    return b.run();
}

MacroResult build_macro(const ProvGraph& micro) {
    MacroResult res;
    ProvGraph& g = res.graph;
    g.level = "macro";
    g.meta = micro.meta;
    g.universe = micro.universe;

    auto ensure = [&g](NodeType type, const std::string& id, const std::string& key,
                       const std::string& val) {
        if (!g.find(id)) {
            ProvNode n;
            n.id = id;
            n.type = type;
            n.attrs = ojson{{key, val}};
            g.add_node(std::move(n));
        }
    };
    for (const auto& p : g.universe.plcs) ensure(NodeType::Plc, "plc:" + p.id, "plc", p.id);
    for (const auto& s : g.universe.sensors)
        ensure(NodeType::SensorDevice, "sensor:" + s.id, "sensor", s.id);
    for (const auto& a : g.universe.actuators)
        ensure(NodeType::Actuator, "actuator:" + a.id, "actuator", a.id);
    for (const auto& c : g.universe.channels)
        ensure(NodeType::Channel, "channel:" + c.id, "channel", c.id);
    for (const auto& ap : g.universe.attachment_points)
        ensure(NodeType::OriginPoint, "origin:" + ap, "origin", ap);

    auto project = [&](const ProvNode& n) -> std::string {
        switch (n.type) {
            case NodeType::Reading: {
                std::string s = n.attr("sensor");
                if (!s.empty()) return "sensor:" + s;
                std::string o = n.attr("origin");
                ensure(NodeType::Operator, "operator:" + o, "origin", o);
                return "operator:" + o;
            }
            case NodeType::VariableState:
            case NodeType::Scan: return "plc:" + n.attr("plc");
            case NodeType::Command:
            case NodeType::Actuation: return "actuator:" + n.attr("actuator");
            case NodeType::Message: return "channel:" + n.attr("channel");
            default: return n.id;  // agents map onto themselves
        }
    };

    // Agents carry their micro attrs over verbatim.
    for (const auto& n : micro.nodes)
        if (n.kind() == NodeKind::Agent && !g.find(n.id)) {
            ProvNode c = n;
            g.add_node(std::move(c));
        }

    for (const auto& n : micro.nodes) res.projection[n.id] = project(n);
    for (const auto& e : micro.edges) {
        const std::string& s = res.projection.at(e.src);
        const std::string& d = res.projection.at(e.dst);
        if (s == d) continue;
        g.add_edge(s, d, e.type);
    }
    g.finalize();
    return res;
}

std::vector<const ProvNode*> commands_at(const ProvGraph& g, const std::string& actuator,
                                         uint64_t tick) {
    std::vector<const ProvNode*> out;
    for (const auto& n : g.nodes)
        if (n.type == NodeType::Command && n.tick == tick && n.attr("actuator") == actuator)
            out.push_back(&n);
    std::sort(out.begin(), out.end(),
              [](const ProvNode* a, const ProvNode* b) { return a->seq < b->seq; });
    return out;
}

std::set<std::string> influencing_sensors(const ProvGraph& g, const std::string& node_id) {
    std::set<std::string> sensors;
    for (const auto& id : g.ancestors(node_id)) {
        const ProvNode& n = g.at(id);
        if (n.type != NodeType::Reading) continue;
        std::string s = n.attr("sensor");
        if (!s.empty()) sensors.insert(s);
    }
    return sensors;
}

}  // namespace plcprov
