#include "plcprov/trace.hpp"

#include <fstream>
#include <sstream>

#include "plcprov/errors.hpp"

namespace plcprov {

std::string to_string(Phase p) {
    switch (p) {
        case Phase::Sample: return "sample";
        case Phase::Attack: return "attack";
        case Phase::Deliver: return "deliver";
        case Phase::Scan: return "scan";
        case Phase::Publish: return "publish";
    }
    return "?";
}

Phase phase_from_string(const std::string& s, const std::string& where) {
    if (s == "sample") return Phase::Sample;
    if (s == "attack") return Phase::Attack;
    if (s == "deliver") return Phase::Deliver;
    if (s == "scan") return Phase::Scan;
    if (s == "publish") return Phase::Publish;
    throw ParseError(where + ": unknown phase \"" + s + "\"");
}

std::string to_string(RecordKind k) {
    switch (k) {
        case RecordKind::Reading: return "reading";
        case RecordKind::OperatorInput: return "operator_input";
        case RecordKind::Message: return "message";
        case RecordKind::Scan: return "scan";
        case RecordKind::State: return "state";
        case RecordKind::Fault: return "fault";
        case RecordKind::Command: return "command";
    }
    return "?";
}

RecordKind record_kind_from_string(const std::string& s, const std::string& where) {
    if (s == "reading") return RecordKind::Reading;
    if (s == "operator_input") return RecordKind::OperatorInput;
    if (s == "message") return RecordKind::Message;
    if (s == "scan") return RecordKind::Scan;
    if (s == "state") return RecordKind::State;
    if (s == "fault") return RecordKind::Fault;
    if (s == "command") return RecordKind::Command;
    throw ParseError(where + ": unknown record kind \"" + s + "\"");
}

namespace {

ojson var_to_json(const VarField& v) {
    ojson j;
    j["name"] = v.name;
    j["dir"] = to_string(v.dir);
    if (v.line) j["line"] = *v.line;
    return j;
}

VarField var_from_json(const json& j, const std::string& where) {
    jsonu::check_keys(j, where, {"name", "dir"}, {"line"});
    VarField v;
    v.name = jsonu::require_string(j, "name", where);
    v.dir = direction_from_string(jsonu::require_string(j, "dir", where), where + ".dir");
    if (j.contains("line")) v.line = jsonu::require_string(j, "line", where);
    return v;
}

std::vector<std::string> string_array(const json& j, const std::string& where) {
    if (!j.is_array()) throw ParseError(where + ": expected array of strings");
    std::vector<std::string> out;
    for (const auto& e : j) {
        if (!e.is_string()) throw ParseError(where + ": expected array of strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

}  // namespace

ojson TraceRecord::to_json() const {
    ojson j;
    j["tick"] = tick;
    j["ms"] = ms;
    j["phase"] = to_string(phase);
    j["kind"] = to_string(kind);
    j["seq"] = seq;
    switch (kind) {
        case RecordKind::Reading:
        case RecordKind::OperatorInput:
            j["plc"] = plc;
            j["var"] = var_to_json(*var);
            j["value"] = value->to_json();
            j["origin"] = origin;
            break;
        case RecordKind::Message:
            j["channel"] = channel;
            j["from"] = from_plc;
            j["to"] = to_plc;
            j["value"] = value->to_json();
            j["origin"] = origin;
            if (sent_tick) {
                j["sent_tick"] = *sent_tick;
                j["reads"] = ojson{{"vars", from_vars}, {"channels", from_channels}};
            }
            break;
        case RecordKind::Scan:
            j["plc"] = plc;
            j["fired"] = fired;
            j["reads"] = ojson{{"vars", read_vars}, {"channels", read_channels}};
            break;
        case RecordKind::State:
        case RecordKind::Command:
            j["plc"] = plc;
            j["var"] = var_to_json(*var);
            j["value"] = value->to_json();
            j["rule"] = rule;
            j["from"] = ojson{{"vars", from_vars}, {"channels", from_channels}};
            break;
        case RecordKind::Fault:
            j["plc"] = plc;
            j["detail"] = detail;
            break;
    }
    return j;
}

TraceRecord TraceRecord::from_json(const json& j, const std::string& where) {
    TraceRecord r;
    r.tick = jsonu::require_uint(j, "tick", where);
    r.ms = jsonu::require_uint(j, "ms", where);
    r.phase = phase_from_string(jsonu::require_string(j, "phase", where), where + ".phase");
    r.kind =
        record_kind_from_string(jsonu::require_string(j, "kind", where), where + ".kind");
    r.seq = jsonu::require_uint(j, "seq", where);
    const std::vector<std::string> base = {"tick", "ms", "phase", "kind", "seq"};
    auto with = [&base](std::initializer_list<std::string> extra) {
        std::vector<std::string> keys = base;
        keys.insert(keys.end(), extra.begin(), extra.end());
        return keys;
    };
    switch (r.kind) {
        case RecordKind::Reading:
        case RecordKind::OperatorInput:
            jsonu::check_keys(j, where, with({"plc", "var", "value", "origin"}), {});
            r.plc = jsonu::require_string(j, "plc", where);
            r.var = var_from_json(j.at("var"), where + ".var");
            r.value = SignalValue::from_json(j.at("value"), where + ".value");
            r.origin = jsonu::require_string(j, "origin", where);
            break;
        case RecordKind::Message: {
            jsonu::check_keys(j, where, with({"channel", "from", "to", "value", "origin"}),
                              {"sent_tick", "reads"});
            r.channel = jsonu::require_string(j, "channel", where);
            r.from_plc = jsonu::require_string(j, "from", where);
            r.to_plc = jsonu::require_string(j, "to", where);
            r.value = SignalValue::from_json(j.at("value"), where + ".value");
            r.origin = jsonu::require_string(j, "origin", where);
            if (j.contains("sent_tick")) r.sent_tick = jsonu::require_uint(j, "sent_tick", where);
            if (j.contains("reads") != r.sent_tick.has_value())
                throw ParseError(where + ": reads must accompany sent_tick exactly");
            if (j.contains("reads")) {
                const json& reads = j.at("reads");
                jsonu::check_keys(reads, where + ".reads", {"vars", "channels"}, {});
                r.from_vars = string_array(reads.at("vars"), where + ".reads.vars");
                r.from_channels = string_array(reads.at("channels"), where + ".reads.channels");
            }
            break;
        }
        case RecordKind::Scan: {
            jsonu::check_keys(j, where, with({"plc", "fired", "reads"}), {});
            r.plc = jsonu::require_string(j, "plc", where);
            r.fired = string_array(j.at("fired"), where + ".fired");
            const json& reads = j.at("reads");
            jsonu::check_keys(reads, where + ".reads", {"vars", "channels"}, {});
            r.read_vars = string_array(reads.at("vars"), where + ".reads.vars");
            r.read_channels = string_array(reads.at("channels"), where + ".reads.channels");
            break;
        }
        case RecordKind::State:
        case RecordKind::Command: {
            jsonu::check_keys(j, where, with({"plc", "var", "value", "rule", "from"}), {});
            r.plc = jsonu::require_string(j, "plc", where);
            r.var = var_from_json(j.at("var"), where + ".var");
            r.value = SignalValue::from_json(j.at("value"), where + ".value");
            r.rule = jsonu::require_string(j, "rule", where);
            const json& from = j.at("from");
            jsonu::check_keys(from, where + ".from", {"vars", "channels"}, {});
            r.from_vars = string_array(from.at("vars"), where + ".from.vars");
            r.from_channels = string_array(from.at("channels"), where + ".from.channels");
            break;
        }
        case RecordKind::Fault:
            jsonu::check_keys(j, where, with({"plc", "detail"}), {});
            r.plc = jsonu::require_string(j, "plc", where);
            r.detail = jsonu::require_string(j, "detail", where);
            break;
    }
    return r;
}

ojson TraceHeader::to_json() const {
    ojson j;
    j["schema"] = schema;
    j["seed"] = seed;
    j["scenario"] = scenario;
    j["attack"] = attack;
    j["ms_per_tick"] = ms_per_tick;
    j["ticks"] = ticks;
    j["universe"] = universe.to_json();
    return j;
}

TraceHeader TraceHeader::from_json(const json& j) {
    const std::string where = "trace header";
    jsonu::check_keys(j, where,
                      {"schema", "seed", "scenario", "attack", "ms_per_tick", "ticks",
                       "universe"},
                      {});
    TraceHeader h;
    h.schema = jsonu::require_string(j, "schema", where);
    if (h.schema != kTraceSchema)
        throw ParseError(where + ": unsupported schema \"" + h.schema + "\"");
    h.seed = jsonu::require_uint(j, "seed", where);
    h.scenario = jsonu::require_string(j, "scenario", where);
    h.attack = jsonu::require_string(j, "attack", where);
    h.ms_per_tick = jsonu::require_uint(j, "ms_per_tick", where);
    h.ticks = jsonu::require_uint(j, "ticks", where);
    h.universe = Topology::from_json(j.at("universe"));
    return h;
}

void write_trace(const TraceLog& log, std::ostream& os) {
    os << log.header.to_json().dump() << "\n";
    for (const auto& r : log.records) os << r.to_json().dump() << "\n";
}

void write_trace_file(const TraceLog& log, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open \"" + path + "\" for writing");
    write_trace(log, os);
    os.flush();
    if (!os) throw Error("failed writing \"" + path + "\"");
}

TraceLog read_trace(std::istream& is, const std::string& name) {
    TraceLog log;
    std::string line;
    size_t lineno = 0;
    bool have_header = false;
    uint64_t last_tick = 0;
    uint64_t last_seq = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::string where = name + ":" + std::to_string(lineno);
        json j = jsonu::parse_document(line, where);
        if (!have_header) {
            log.header = TraceHeader::from_json(j);
            have_header = true;
            continue;
        }
        TraceRecord r = TraceRecord::from_json(j, where);
        if (!log.records.empty() &&
            (r.tick < last_tick || (r.tick == last_tick && r.seq <= last_seq)))
            throw ParseError(where + ": records out of (tick, seq) order");
        last_tick = r.tick;
        last_seq = r.seq;
        log.records.push_back(std::move(r));
    }
    if (!have_header) throw ParseError(name + ": empty trace, header line missing");
    return log;
}

TraceLog read_trace_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open \"" + path + "\"");
    return read_trace(is, path);
}

}  // namespace plcprov
