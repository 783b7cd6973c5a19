#include "plcprov/attack.hpp"

#include <algorithm>
#include <cmath>

#include "plcprov/errors.hpp"

namespace plcprov {

uint64_t AttackScript::horizon() const {
    uint64_t h = 0;
    auto bump = [&h](uint64_t t) { h = std::max(h, t); };
    for (const auto& f : forge) bump(f.to_tick);
    for (const auto& i : inject) bump(i.tick + 1);  // arrival tick
    for (const auto& r : replay) bump(r.replay_at + (r.record_to - r.record_from));
    for (const auto& e : env_sets) bump(e.tick);
    for (const auto& d : env_drives) bump(d.to_tick);
    for (const auto& o : operator_inputs) bump(o.tick);
    return h;
}

ojson AttackScript::to_json() const {
    ojson j;
    j["id"] = id;
    if (!forge.empty()) {
        ojson arr = ojson::array();
        for (const auto& f : forge) {
            ojson e;
            e["sensor"] = f.sensor;
            e["from_tick"] = f.from_tick;
            e["to_tick"] = f.to_tick;
            e["value"] = f.value.to_json();
            e["origin"] = f.origin;
            arr.push_back(std::move(e));
        }
        j["forge_sensor"] = std::move(arr);
    }
    if (!inject.empty()) {
        ojson arr = ojson::array();
        for (const auto& m : inject) {
            ojson e;
            e["channel"] = m.channel;
            e["tick"] = m.tick;
            e["value"] = m.value.to_json();
            e["origin"] = m.origin;
            arr.push_back(std::move(e));
        }
        j["inject_message"] = std::move(arr);
    }
    if (!replay.empty()) {
        ojson arr = ojson::array();
        for (const auto& r : replay) {
            ojson e;
            e["sensor"] = r.sensor;
            e["record_from"] = r.record_from;
            e["record_to"] = r.record_to;
            e["replay_at"] = r.replay_at;
            e["origin"] = r.origin;
            arr.push_back(std::move(e));
        }
        j["replay"] = std::move(arr);
    }
    if (!env_sets.empty()) {
        ojson arr = ojson::array();
        for (const auto& s : env_sets) {
            ojson e;
            e["feature"] = s.feature;
            e["tick"] = s.tick;
            e["value"] = s.value.to_json();
            arr.push_back(std::move(e));
        }
        j["env_set"] = std::move(arr);
    }
    if (!env_drives.empty()) {
        ojson arr = ojson::array();
        for (const auto& d : env_drives) {
            ojson e;
            e["feature"] = d.feature;
            e["from_tick"] = d.from_tick;
            e["to_tick"] = d.to_tick;
            e["target"] = d.target;
            arr.push_back(std::move(e));
        }
        j["env_drive"] = std::move(arr);
    }
    if (!operator_inputs.empty()) {
        ojson arr = ojson::array();
        for (const auto& o : operator_inputs) {
            ojson e;
            e["plc"] = o.target.plc_id;
            e["var"] = o.target.name;
            e["tick"] = o.tick;
            e["value"] = o.value.to_json();
            e["origin"] = o.origin;
            arr.push_back(std::move(e));
        }
        j["operator"] = std::move(arr);
    }
    return j;
}

AttackScript AttackScript::from_json(const json& j, const Topology& topo) {
    const std::string where = "attack";
    jsonu::check_keys(j, where, {"id"},
                      {"forge_sensor", "inject_message", "replay", "env_set", "env_drive",
                       "operator"});
    AttackScript a;
    a.id = jsonu::require_string(j, "id", where);

    auto reading_type = [&topo](const SensorSpec& s) -> const ValueType& {
        const EnvironmentFeature* f = topo.find_feature(s.measures);
        if (!f) throw ParseError("attack: sensor \"" + s.id + "\" measures unknown feature");
        return f->type;
    };
    auto check_origin = [&topo, &where](const std::string& o, const std::string& w) {
        if (!topo.has_attachment(o))
            throw ParseError(w + ": unknown attachment point \"" + o + "\"");
        (void)where;
    };

    if (j.contains("forge_sensor")) {
        size_t i = 0;
        for (const auto& fj : j.at("forge_sensor")) {
            std::string w = where + ".forge_sensor[" + std::to_string(i++) + "]";
            jsonu::check_keys(fj, w, {"sensor", "from_tick", "to_tick", "value", "origin"}, {});
            ForgeSensor f;
            f.sensor = jsonu::require_string(fj, "sensor", w);
            const SensorSpec* s = topo.find_sensor(f.sensor);
            if (!s) throw ParseError(w + ": unknown sensor \"" + f.sensor + "\"");
            f.from_tick = jsonu::require_uint(fj, "from_tick", w);
            f.to_tick = jsonu::require_uint(fj, "to_tick", w);
            if (f.to_tick < f.from_tick) throw ParseError(w + ": to_tick before from_tick");
            f.value = reading_type(*s).parse_value(fj.at("value"), w + ".value");
            f.origin = jsonu::require_string(fj, "origin", w);
            check_origin(f.origin, w);
            a.forge.push_back(std::move(f));
        }
    }
    if (j.contains("inject_message")) {
        size_t i = 0;
        for (const auto& mj : j.at("inject_message")) {
            std::string w = where + ".inject_message[" + std::to_string(i++) + "]";
            jsonu::check_keys(mj, w, {"channel", "tick", "value", "origin"}, {});
            InjectMessage m;
            m.channel = jsonu::require_string(mj, "channel", w);
            const ChannelSpec* c = topo.find_channel(m.channel);
            if (!c) throw ParseError(w + ": unknown channel \"" + m.channel + "\"");
            m.tick = jsonu::require_uint(mj, "tick", w);
            m.value = c->payload_type.parse_value(mj.at("value"), w + ".value");
            m.origin = jsonu::require_string(mj, "origin", w);
            check_origin(m.origin, w);
            a.inject.push_back(std::move(m));
        }
    }
    if (j.contains("replay")) {
        size_t i = 0;
        for (const auto& rj : j.at("replay")) {
            std::string w = where + ".replay[" + std::to_string(i++) + "]";
            jsonu::check_keys(rj, w, {"sensor", "record_from", "record_to", "replay_at", "origin"},
                              {});
            ReplayWindow r;
            r.sensor = jsonu::require_string(rj, "sensor", w);
            if (!topo.find_sensor(r.sensor))
                throw ParseError(w + ": unknown sensor \"" + r.sensor + "\"");
            r.record_from = jsonu::require_uint(rj, "record_from", w);
            r.record_to = jsonu::require_uint(rj, "record_to", w);
            if (r.record_to < r.record_from) throw ParseError(w + ": record_to before record_from");
            r.replay_at = jsonu::require_uint(rj, "replay_at", w);
            if (r.replay_at <= r.record_to)
                throw ParseError(w + ": replay must start after the recorded window");
            r.origin = jsonu::require_string(rj, "origin", w);
            check_origin(r.origin, w);
            a.replay.push_back(std::move(r));
        }
    }
    if (j.contains("env_set")) {
        size_t i = 0;
        for (const auto& sj : j.at("env_set")) {
            std::string w = where + ".env_set[" + std::to_string(i++) + "]";
            jsonu::check_keys(sj, w, {"feature", "tick", "value"}, {});
            EnvSet s;
            s.feature = jsonu::require_string(sj, "feature", w);
            const EnvironmentFeature* f = topo.find_feature(s.feature);
            if (!f) throw ParseError(w + ": unknown feature \"" + s.feature + "\"");
            s.tick = jsonu::require_uint(sj, "tick", w);
            s.value = f->type.parse_value(sj.at("value"), w + ".value");
            a.env_sets.push_back(std::move(s));
        }
    }
    if (j.contains("env_drive")) {
        size_t i = 0;
        for (const auto& dj : j.at("env_drive")) {
            std::string w = where + ".env_drive[" + std::to_string(i++) + "]";
            jsonu::check_keys(dj, w, {"feature", "from_tick", "to_tick", "target"}, {});
            EnvDrive d;
            d.feature = jsonu::require_string(dj, "feature", w);
            const EnvironmentFeature* f = topo.find_feature(d.feature);
            if (!f) throw ParseError(w + ": unknown feature \"" + d.feature + "\"");
            if (f->kind() != FeatureKind::Continuous)
                throw ParseError(w + ": \"" + d.feature + "\" is not continuous");
            d.from_tick = jsonu::require_uint(dj, "from_tick", w);
            d.to_tick = jsonu::require_uint(dj, "to_tick", w);
            if (d.to_tick < d.from_tick) throw ParseError(w + ": to_tick before from_tick");
            d.target = jsonu::require_double(dj, "target", w);
            if (!std::isfinite(d.target)) throw ParseError(w + ".target: expected finite number");
            a.env_drives.push_back(std::move(d));
        }
    }
    if (j.contains("operator")) {
        size_t i = 0;
        for (const auto& oj : j.at("operator")) {
            std::string w = where + ".operator[" + std::to_string(i++) + "]";
            jsonu::check_keys(oj, w, {"plc", "var", "tick", "value", "origin"}, {});
            OperatorInput o;
            o.target = {jsonu::require_string(oj, "plc", w), jsonu::require_string(oj, "var", w)};
            const VariableDecl* v = topo.find_variable(o.target);
            if (!v) throw ParseError(w + ": unknown variable \"" + o.target.str() + "\"");
            if (v->dir != Direction::In)
                throw ParseError(w + ": \"" + o.target.str() + "\" is not an input");
            if (topo.sensor_on_variable(o.target))
                throw ParseError(w + ": \"" + o.target.str() + "\" is sensor-fed");
            o.tick = jsonu::require_uint(oj, "tick", w);
            o.value = v->type.parse_value(oj.at("value"), w + ".value");
            o.origin = jsonu::require_string(oj, "origin", w);
            check_origin(o.origin, w);
            a.operator_inputs.push_back(std::move(o));
        }
    }
    return a;
}

}  // namespace plcprov
