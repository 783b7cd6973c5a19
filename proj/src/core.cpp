#include "plcprov/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "plcprov/errors.hpp"

namespace plcprov {

uint64_t timestamp_ms(const Timestamp& ts) {
    if (ts.tick >= kMaxTick)
        throw BoundsError("timestamp_ms: tick " + std::to_string(ts.tick) +
                          " outside checked domain [0, 2^40)");
    if (ts.ms_per_tick > kMaxMsPerTick)
        throw BoundsError("timestamp_ms: ms_per_tick " + std::to_string(ts.ms_per_tick) +
                          " outside checked domain [0, 10^4]");
    return ts.tick * ts.ms_per_tick;
}

std::string to_string(SignalType t) {
    switch (t) {
        case SignalType::Bool: return "bool";
        case SignalType::Int: return "int";
        case SignalType::Float: return "float";
        case SignalType::Enum: return "enum";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// SignalValue

SignalValue SignalValue::of_float(double d) {
    if (!std::isfinite(d))
        throw BoundsError("SignalValue: float payload must be finite");
    return SignalValue(d);
}

SignalType SignalValue::type() const {
    switch (v_.index()) {
        case 0: return SignalType::Bool;
        case 1: return SignalType::Int;
        case 2: return SignalType::Float;
        default: return SignalType::Enum;
    }
}

bool SignalValue::as_bool() const {
    if (auto* p = std::get_if<bool>(&v_)) return *p;
    throw ValidationError("SignalValue: not a bool (holds " + canonical() + ")");
}

int64_t SignalValue::as_int() const {
    if (auto* p = std::get_if<int64_t>(&v_)) return *p;
    throw ValidationError("SignalValue: not an int (holds " + canonical() + ")");
}

double SignalValue::as_float() const {
    if (auto* p = std::get_if<double>(&v_)) return *p;
    throw ValidationError("SignalValue: not a float (holds " + canonical() + ")");
}

const std::string& SignalValue::as_enum() const {
    if (auto* p = std::get_if<std::string>(&v_)) return *p;
    throw ValidationError("SignalValue: not an enum state (holds " + canonical() + ")");
}

bool SignalValue::operator<(const SignalValue& o) const {
    return v_ < o.v_;  // index order first, then value; total and deterministic
}

std::string SignalValue::canonical() const {
    switch (v_.index()) {
        case 0: return std::get<bool>(v_) ? "true" : "false";
        case 1: return std::to_string(std::get<int64_t>(v_));
        case 2: return json(std::get<double>(v_)).dump();  // shortest round-trip form
        default: return std::get<std::string>(v_);
    }
}

ojson SignalValue::to_json() const {
    switch (v_.index()) {
        case 0: return ojson(std::get<bool>(v_));
        case 1: return ojson(std::get<int64_t>(v_));
        case 2: return ojson(std::get<double>(v_));
        default: return ojson(std::get<std::string>(v_));
    }
}

SignalValue SignalValue::from_json(const json& j, const std::string& where) {
    if (j.is_boolean()) return of_bool(j.get<bool>());
    if (j.is_number_integer()) return of_int(j.get<int64_t>());
    if (j.is_number_float()) {
        double d = j.get<double>();
        if (!std::isfinite(d)) throw ParseError(where + ": non-finite number");
        return of_float(d);
    }
    if (j.is_string()) return of_enum(j.get<std::string>());
    throw ParseError(where + ": expected scalar value, got " + std::string(j.type_name()));
}

// ---------------------------------------------------------------------------
// ValueType

bool ValueType::admits(const SignalValue& v) const {
    if (v.type() != kind) return false;
    if (kind == SignalType::Enum)
        return std::find(enum_values.begin(), enum_values.end(), v.as_enum()) !=
               enum_values.end();
    return true;
}

bool ValueType::same_as(const ValueType& o) const {
    if (kind != o.kind) return false;
    if (kind != SignalType::Enum) return true;
    std::set<std::string> a(enum_values.begin(), enum_values.end());
    std::set<std::string> b(o.enum_values.begin(), o.enum_values.end());
    return a == b;
}

SignalValue ValueType::default_value() const {
    switch (kind) {
        case SignalType::Bool: return SignalValue::of_bool(false);
        case SignalType::Int: return SignalValue::of_int(0);
        case SignalType::Float: return SignalValue::of_float(0.0);
        case SignalType::Enum:
            if (enum_values.empty())
                throw ValidationError("ValueType: enum with no states has no default");
            return SignalValue::of_enum(enum_values.front());
    }
    throw ValidationError("ValueType: unknown kind");
}

std::string ValueType::describe() const {
    if (kind != SignalType::Enum) return to_string(kind);
    std::string s = "enum{";
    for (size_t i = 0; i < enum_values.size(); ++i) {
        if (i) s += ",";
        s += enum_values[i];
    }
    return s + "}";
}

SignalValue ValueType::parse_value(const json& j, const std::string& where) const {
    switch (kind) {
        case SignalType::Bool:
            if (!j.is_boolean()) throw ParseError(where + ": expected bool");
            return SignalValue::of_bool(j.get<bool>());
        case SignalType::Int:
            if (!j.is_number_integer()) throw ParseError(where + ": expected integer");
            return SignalValue::of_int(j.get<int64_t>());
        case SignalType::Float: {
            if (!j.is_number()) throw ParseError(where + ": expected number");
            double d = j.get<double>();
            if (!std::isfinite(d)) throw ParseError(where + ": non-finite number");
            return SignalValue::of_float(d);
        }
        case SignalType::Enum: {
            if (!j.is_string()) throw ParseError(where + ": expected enum state string");
            std::string s = j.get<std::string>();
            if (std::find(enum_values.begin(), enum_values.end(), s) == enum_values.end())
                throw ParseError(where + ": \"" + s + "\" is not a state of " + describe());
            return SignalValue::of_enum(std::move(s));
        }
    }
    throw ParseError(where + ": unknown value type");
}

ojson ValueType::to_json() const {
    ojson j;
    j["kind"] = to_string(kind);
    if (kind == SignalType::Enum) j["values"] = enum_values;
    return j;
}

ValueType ValueType::from_json(const json& j, const std::string& where) {
    jsonu::check_keys(j, where, {"kind"}, {"values"});
    std::string k = jsonu::require_string(j, "kind", where);
    ValueType t;
    if (k == "bool") t.kind = SignalType::Bool;
    else if (k == "int") t.kind = SignalType::Int;
    else if (k == "float") t.kind = SignalType::Float;
    else if (k == "enum") t.kind = SignalType::Enum;
    else throw ParseError(where + ".kind: unknown type \"" + k + "\"");

    if (t.kind == SignalType::Enum) {
        const json& vals = jsonu::require(j, "values", where);
        if (!vals.is_array() || vals.empty())
            throw ParseError(where + ".values: enum needs a non-empty state array");
        std::set<std::string> seen;
        for (const auto& v : vals) {
            if (!v.is_string()) throw ParseError(where + ".values: states must be strings");
            std::string s = v.get<std::string>();
            if (!seen.insert(s).second)
                throw ParseError(where + ".values: duplicate state \"" + s + "\"");
            t.enum_values.push_back(std::move(s));
        }
    } else if (j.contains("values")) {
        throw ParseError(where + ".values: only enum types list states");
    }
    return t;
}

// ---------------------------------------------------------------------------
// Direction

std::string to_string(Direction d) {
    switch (d) {
        case Direction::In: return "in";
        case Direction::Out: return "out";
        case Direction::Internal: return "internal";
    }
    return "?";
}

Direction direction_from_string(const std::string& s, const std::string& where) {
    if (s == "in") return Direction::In;
    if (s == "out") return Direction::Out;
    if (s == "internal") return Direction::Internal;
    throw ParseError(where + ": unknown direction \"" + s + "\"");
}

// ---------------------------------------------------------------------------
// Topology lookups

const PlcSpec* Topology::find_plc(const std::string& id) const {
    for (const auto& p : plcs)
        if (p.id == id) return &p;
    return nullptr;
}

const VariableDecl* Topology::find_variable(const VarKey& key) const {
    const PlcSpec* p = find_plc(key.plc_id);
    if (!p) return nullptr;
    for (const auto& v : p->variables)
        if (v.name == key.name) return &v;
    return nullptr;
}

const SensorSpec* Topology::find_sensor(const std::string& id) const {
    for (const auto& s : sensors)
        if (s.id == id) return &s;
    return nullptr;
}

const ActuatorSpec* Topology::find_actuator(const std::string& id) const {
    for (const auto& a : actuators)
        if (a.id == id) return &a;
    return nullptr;
}

const EnvironmentFeature* Topology::find_feature(const std::string& id) const {
    for (const auto& f : features)
        if (f.id == id) return &f;
    return nullptr;
}

const ChannelSpec* Topology::find_channel(const std::string& id) const {
    for (const auto& c : channels)
        if (c.id == id) return &c;
    return nullptr;
}

bool Topology::has_attachment(const std::string& id) const {
    return std::find(attachment_points.begin(), attachment_points.end(), id) !=
           attachment_points.end();
}

const SensorSpec* Topology::sensor_on_variable(const VarKey& key) const {
    for (const auto& s : sensors)
        if (s.attaches_to == key) return &s;
    return nullptr;
}

const ActuatorSpec* Topology::actuator_on_variable(const VarKey& key) const {
    for (const auto& a : actuators)
        if (a.attaches_to == key) return &a;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Topology JSON

namespace {

ojson varkey_to_json(const VarKey& k) {
    ojson j;
    j["plc"] = k.plc_id;
    j["var"] = k.name;
    return j;
}

VarKey varkey_from_json(const json& j, const std::string& where) {
    jsonu::check_keys(j, where, {"plc", "var"}, {});
    return {jsonu::require_string(j, "plc", where), jsonu::require_string(j, "var", where)};
}

VariableDecl variable_from_json(const json& j, const std::string& where) {
    jsonu::check_keys(j, where, {"name", "dir", "type"}, {"input_line", "initial"});
    VariableDecl v;
    v.name = jsonu::require_string(j, "name", where);
    v.dir = direction_from_string(jsonu::require_string(j, "dir", where), where + ".dir");
    v.type = ValueType::from_json(jsonu::require(j, "type", where), where + ".type");
    if (j.contains("input_line"))
        v.input_line = jsonu::require_string(j, "input_line", where);
    if (j.contains("initial"))
        v.initial = v.type.parse_value(j.at("initial"), where + ".initial");
    return v;
}

}  // namespace

ojson Topology::to_json() const {
    ojson j;
    j["attachment_points"] = attachment_points;
    j["features"] = ojson::array();
    for (const auto& f : features) {
        ojson fj;
        fj["id"] = f.id;
        fj["type"] = f.type.to_json();
        fj["unit"] = f.unit;
        fj["initial"] = f.initial_value.to_json();
        j["features"].push_back(std::move(fj));
    }
    j["plcs"] = ojson::array();
    for (const auto& p : plcs) {
        ojson pj;
        pj["id"] = p.id;
        pj["attachment_point"] = p.attachment_point;
        pj["variables"] = ojson::array();
        for (const auto& v : p.variables) {
            ojson vj;
            vj["name"] = v.name;
            vj["dir"] = to_string(v.dir);
            vj["type"] = v.type.to_json();
            if (v.input_line) vj["input_line"] = *v.input_line;
            if (v.initial) vj["initial"] = v.initial->to_json();
            pj["variables"].push_back(std::move(vj));
        }
        j["plcs"].push_back(std::move(pj));
    }
    j["sensors"] = ojson::array();
    for (const auto& s : sensors) {
        ojson sj;
        sj["id"] = s.id;
        sj["measures"] = s.measures;
        sj["attaches_to"] = varkey_to_json(s.attaches_to);
        if (s.normal_range)
            sj["normal_range"] = ojson::array({s.normal_range->first, s.normal_range->second});
        sj["unit"] = s.unit;
        sj["origin_point"] = s.origin_point;
        j["sensors"].push_back(std::move(sj));
    }
    j["actuators"] = ojson::array();
    for (const auto& a : actuators) {
        ojson aj;
        aj["id"] = a.id;
        aj["affects"] = a.affects;
        aj["attaches_to"] = varkey_to_json(a.attaches_to);
        aj["command_set"] = a.command_set.to_json();
        j["actuators"].push_back(std::move(aj));
    }
    j["channels"] = ojson::array();
    for (const auto& c : channels) {
        ojson cj;
        cj["id"] = c.id;
        cj["from"] = c.from_plc;
        cj["to"] = c.to_plc;
        cj["payload"] = c.payload_type.to_json();
        j["channels"].push_back(std::move(cj));
    }
    return j;
}

Topology Topology::from_json(const json& j) {
    const std::string where = "topology";
    jsonu::check_keys(j, where, {},
                      {"attachment_points", "features", "plcs", "sensors", "actuators",
                       "channels"});
    Topology t;
    if (j.contains("attachment_points")) {
        const json& arr = j.at("attachment_points");
        if (!arr.is_array()) throw ParseError(where + ".attachment_points: expected array");
        for (const auto& a : arr) {
            if (!a.is_string())
                throw ParseError(where + ".attachment_points: entries must be strings");
            t.attachment_points.push_back(a.get<std::string>());
        }
    }
    if (j.contains("features")) {
        size_t i = 0;
        for (const auto& fj : j.at("features")) {
            std::string w = where + ".features[" + std::to_string(i++) + "]";
            jsonu::check_keys(fj, w, {"id", "type", "unit", "initial"}, {});
            EnvironmentFeature f;
            f.id = jsonu::require_string(fj, "id", w);
            f.type = ValueType::from_json(fj.at("type"), w + ".type");
            f.unit = jsonu::require_string(fj, "unit", w);
            f.initial_value = f.type.parse_value(fj.at("initial"), w + ".initial");
            t.features.push_back(std::move(f));
        }
    }
    if (j.contains("plcs")) {
        size_t i = 0;
        for (const auto& pj : j.at("plcs")) {
            std::string w = where + ".plcs[" + std::to_string(i++) + "]";
            jsonu::check_keys(pj, w, {"id", "attachment_point", "variables"}, {});
            PlcSpec p;
            p.id = jsonu::require_string(pj, "id", w);
            p.attachment_point = jsonu::require_string(pj, "attachment_point", w);
            size_t k = 0;
            for (const auto& vj : pj.at("variables"))
                p.variables.push_back(
                    variable_from_json(vj, w + ".variables[" + std::to_string(k++) + "]"));
            t.plcs.push_back(std::move(p));
        }
    }
    if (j.contains("sensors")) {
        size_t i = 0;
        for (const auto& sj : j.at("sensors")) {
            std::string w = where + ".sensors[" + std::to_string(i++) + "]";
            jsonu::check_keys(sj, w, {"id", "measures", "attaches_to", "unit", "origin_point"},
                              {"normal_range"});
            SensorSpec s;
            s.id = jsonu::require_string(sj, "id", w);
            s.measures = jsonu::require_string(sj, "measures", w);
            s.attaches_to = varkey_from_json(sj.at("attaches_to"), w + ".attaches_to");
            s.unit = jsonu::require_string(sj, "unit", w);
            s.origin_point = jsonu::require_string(sj, "origin_point", w);
            if (sj.contains("normal_range")) {
                const json& r = sj.at("normal_range");
                if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
                    throw ParseError(w + ".normal_range: expected [lo, hi]");
                s.normal_range = {r[0].get<double>(), r[1].get<double>()};
            }
            t.sensors.push_back(std::move(s));
        }
    }
    if (j.contains("actuators")) {
        size_t i = 0;
        for (const auto& aj : j.at("actuators")) {
            std::string w = where + ".actuators[" + std::to_string(i++) + "]";
            jsonu::check_keys(aj, w, {"id", "affects", "attaches_to", "command_set"}, {});
            ActuatorSpec a;
            a.id = jsonu::require_string(aj, "id", w);
            const json& aff = aj.at("affects");
            if (!aff.is_array()) throw ParseError(w + ".affects: expected array");
            for (const auto& f : aff) {
                if (!f.is_string()) throw ParseError(w + ".affects: entries must be strings");
                a.affects.push_back(f.get<std::string>());
            }
            a.attaches_to = varkey_from_json(aj.at("attaches_to"), w + ".attaches_to");
            a.command_set = ValueType::from_json(aj.at("command_set"), w + ".command_set");
            t.actuators.push_back(std::move(a));
        }
    }
    if (j.contains("channels")) {
        size_t i = 0;
        for (const auto& cj : j.at("channels")) {
            std::string w = where + ".channels[" + std::to_string(i++) + "]";
            jsonu::check_keys(cj, w, {"id", "from", "to", "payload"}, {});
            ChannelSpec c;
            c.id = jsonu::require_string(cj, "id", w);
            c.from_plc = jsonu::require_string(cj, "from", w);
            c.to_plc = jsonu::require_string(cj, "to", w);
            c.payload_type = ValueType::from_json(cj.at("payload"), w + ".payload");
            t.channels.push_back(std::move(c));
        }
    }
    return t;
}

// ---------------------------------------------------------------------------
// Validation

std::vector<ConfigError> validate_topology(const Topology& t) {
    std::vector<ConfigError> errs;
    auto add = [&](std::string element, std::string rule, std::string message) {
        errs.push_back({std::move(element), std::move(rule), std::move(message)});
    };
    auto check_unique = [&](const std::string& category, const std::string& id,
                            std::set<std::string>& seen) {
        if (id.empty()) add(category, "empty-id", category + " with empty id");
        else if (!seen.insert(id).second)
            add(id, "duplicate-id", "duplicate " + category + " id \"" + id + "\"");
    };

    std::set<std::string> ap_seen, feat_seen, plc_seen, sensor_seen, act_seen, chan_seen;
    for (const auto& a : t.attachment_points) check_unique("attachment point", a, ap_seen);
    for (const auto& f : t.features) check_unique("feature", f.id, feat_seen);
    for (const auto& p : t.plcs) check_unique("plc", p.id, plc_seen);
    for (const auto& s : t.sensors) check_unique("sensor", s.id, sensor_seen);
    for (const auto& a : t.actuators) check_unique("actuator", a.id, act_seen);
    for (const auto& c : t.channels) check_unique("channel", c.id, chan_seen);

    for (const auto& f : t.features) {
        if (f.type.kind == SignalType::Enum &&
            (f.type.enum_values.empty() ||
             std::set<std::string>(f.type.enum_values.begin(), f.type.enum_values.end()).size() !=
                 f.type.enum_values.size()))
            add(f.id, "bad-enum", "feature \"" + f.id + "\" has an invalid enum state set");
        else if (!f.type.admits(f.initial_value))
            add(f.id, "bad-initial",
                "feature \"" + f.id + "\" initial value " + f.initial_value.canonical() +
                    " is not admitted by " + f.type.describe());
    }

    for (const auto& p : t.plcs) {
        if (!t.has_attachment(p.attachment_point))
            add(p.id, "unknown-attachment",
                "plc \"" + p.id + "\" sits at undeclared attachment point \"" +
                    p.attachment_point + "\"");
        std::set<std::string> var_seen;
        for (const auto& v : p.variables) {
            std::string el = p.id + "." + v.name;
            if (!var_seen.insert(v.name).second)
                add(el, "duplicate-variable",
                    "plc \"" + p.id + "\" declares variable \"" + v.name + "\" twice");
            if (v.dir == Direction::Internal)
                add(el, "internal-in-topology",
                    "variable \"" + el + "\" is internal; internal state belongs to programs");
            if (v.input_line && v.dir != Direction::In)
                add(el, "line-on-output",
                    "variable \"" + el + "\" has an input line but is not an input");
            if (v.type.kind == SignalType::Enum &&
                (v.type.enum_values.empty() ||
                 std::set<std::string>(v.type.enum_values.begin(), v.type.enum_values.end())
                         .size() != v.type.enum_values.size()))
                add(el, "bad-enum", "variable \"" + el + "\" has an invalid enum state set");
            else if (v.initial && !v.type.admits(*v.initial))
                add(el, "bad-initial",
                    "variable \"" + el + "\" initial value " + v.initial->canonical() +
                        " is not admitted by " + v.type.describe());
        }
    }

    std::set<std::string> bound_inputs;
    for (const auto& s : t.sensors) {
        if (!t.find_feature(s.measures))
            add(s.id, "unknown-feature",
                "sensor \"" + s.id + "\" measures undeclared feature \"" + s.measures + "\"");
        if (!t.has_attachment(s.origin_point))
            add(s.id, "unknown-attachment",
                "sensor \"" + s.id + "\" claims undeclared origin point \"" + s.origin_point +
                    "\"");
        if (!t.find_plc(s.attaches_to.plc_id)) {
            add(s.id, "unknown-plc",
                "sensor \"" + s.id + "\" attaches to undeclared plc \"" + s.attaches_to.plc_id +
                    "\"");
        } else if (const VariableDecl* v = t.find_variable(s.attaches_to); !v) {
            add(s.id, "unknown-variable",
                "sensor \"" + s.id + "\" attaches to undeclared variable \"" +
                    s.attaches_to.str() + "\"");
        } else {
            if (v->dir != Direction::In)
                add(s.id, "direction-mismatch",
                    "sensor \"" + s.id + "\" attaches to non-input \"" + s.attaches_to.str() +
                        "\"");
            if (const EnvironmentFeature* f = t.find_feature(s.measures);
                f && !v->type.same_as(f->type))
                add(s.id, "type-mismatch",
                    "sensor \"" + s.id + "\" delivers " + f->type.describe() + " but \"" +
                        s.attaches_to.str() + "\" is " + v->type.describe());
            if (!bound_inputs.insert(s.attaches_to.str()).second)
                add(s.id, "duplicate-binding",
                    "input \"" + s.attaches_to.str() + "\" is fed by more than one sensor");
        }
        if (s.normal_range &&
            (!std::isfinite(s.normal_range->first) || !std::isfinite(s.normal_range->second) ||
             s.normal_range->first > s.normal_range->second))
            add(s.id, "bad-range", "sensor \"" + s.id + "\" normal range is not a valid [lo, hi]");
    }

    std::set<std::string> bound_outputs;
    for (const auto& a : t.actuators) {
        if (a.affects.empty())
            add(a.id, "unknown-feature", "actuator \"" + a.id + "\" affects no feature");
        for (const auto& f : a.affects)
            if (!t.find_feature(f))
                add(a.id, "unknown-feature",
                    "actuator \"" + a.id + "\" affects undeclared feature \"" + f + "\"");
        if (!t.find_plc(a.attaches_to.plc_id)) {
            add(a.id, "unknown-plc",
                "actuator \"" + a.id + "\" attaches to undeclared plc \"" + a.attaches_to.plc_id +
                    "\"");
        } else if (const VariableDecl* v = t.find_variable(a.attaches_to); !v) {
            add(a.id, "unknown-variable",
                "actuator \"" + a.id + "\" attaches to undeclared variable \"" +
                    a.attaches_to.str() + "\"");
        } else {
            if (v->dir != Direction::Out)
                add(a.id, "direction-mismatch",
                    "actuator \"" + a.id + "\" attaches to non-output \"" + a.attaches_to.str() +
                        "\"");
            if (!v->type.same_as(a.command_set))
                add(a.id, "type-mismatch",
                    "actuator \"" + a.id + "\" accepts " + a.command_set.describe() + " but \"" +
                        a.attaches_to.str() + "\" is " + v->type.describe());
            if (!bound_outputs.insert(a.attaches_to.str()).second)
                add(a.id, "duplicate-binding",
                    "output \"" + a.attaches_to.str() + "\" drives more than one actuator");
        }
    }

    for (const auto& c : t.channels) {
        if (!t.find_plc(c.from_plc))
            add(c.id, "unknown-plc",
                "channel \"" + c.id + "\" starts at undeclared plc \"" + c.from_plc + "\"");
        if (!t.find_plc(c.to_plc))
            add(c.id, "unknown-plc",
                "channel \"" + c.id + "\" ends at undeclared plc \"" + c.to_plc + "\"");
        if (c.from_plc == c.to_plc)
            add(c.id, "self-channel", "channel \"" + c.id + "\" connects a plc to itself");
    }

    std::sort(errs.begin(), errs.end());
    errs.erase(std::unique(errs.begin(), errs.end()), errs.end());
    return errs;
}

}  // namespace plcprov
