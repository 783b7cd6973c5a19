#include "plcprov/plant.hpp"

#include <cmath>

#include "plcprov/errors.hpp"
#include "plcprov/rng.hpp"

namespace plcprov {

ojson PlantParams::to_json() const {
    ojson j;
    j["alpha"] = alpha;
    j["decay"] = decay;
    ojson amb = ojson::object();
    for (const auto& [k, v] : ambient) amb[k] = v;
    j["ambient"] = std::move(amb);
    ojson eff = ojson::array();
    for (const auto& e : effects) {
        ojson ej;
        ej["actuator"] = e.actuator;
        ej["when"] = e.when.to_json();
        ej["feature"] = e.feature;
        if (e.drive) ej["drive"] = *e.drive;
        if (e.set) ej["set"] = e.set->to_json();
        eff.push_back(std::move(ej));
    }
    j["effects"] = std::move(eff);
    ojson noi = ojson::object();
    for (const auto& [k, v] : noise) noi[k] = v;
    j["noise"] = std::move(noi);
    ojson init = ojson::object();
    for (const auto& [k, v] : initial_commands) init[k] = v.to_json();
    j["initial_commands"] = std::move(init);
    return j;
}

PlantParams PlantParams::from_json(const json& j, const Topology& topo) {
    const std::string where = "plant";
    jsonu::check_keys(j, where, {"alpha", "decay"},
                      {"ambient", "effects", "noise", "initial_commands"});
    PlantParams p;
    p.alpha = jsonu::require_double(j, "alpha", where);
    p.decay = jsonu::require_double(j, "decay", where);
    if (!(p.alpha >= 0.0 && p.alpha <= 1.0))
        throw ParseError(where + ".alpha: must lie in [0, 1]");
    if (!(p.decay >= 0.0 && p.decay <= 1.0))
        throw ParseError(where + ".decay: must lie in [0, 1]");

    if (j.contains("ambient")) {
        for (const auto& [k, v] : j.at("ambient").items()) {
            const EnvironmentFeature* f = topo.find_feature(k);
            if (!f) throw ParseError(where + ".ambient: unknown feature \"" + k + "\"");
            if (f->kind() != FeatureKind::Continuous)
                throw ParseError(where + ".ambient: \"" + k + "\" is not continuous");
            if (!v.is_number() || !std::isfinite(v.get<double>()))
                throw ParseError(where + ".ambient." + k + ": expected finite number");
            p.ambient[k] = v.get<double>();
        }
    }
    if (j.contains("effects")) {
        size_t i = 0;
        for (const auto& ej : j.at("effects")) {
            std::string w = where + ".effects[" + std::to_string(i++) + "]";
            jsonu::check_keys(ej, w, {"actuator", "when", "feature"}, {"drive", "set"});
            ActuatorEffect e;
            e.actuator = jsonu::require_string(ej, "actuator", w);
            const ActuatorSpec* act = topo.find_actuator(e.actuator);
            if (!act) throw ParseError(w + ": unknown actuator \"" + e.actuator + "\"");
            e.when = act->command_set.parse_value(ej.at("when"), w + ".when");
            e.feature = jsonu::require_string(ej, "feature", w);
            const EnvironmentFeature* f = topo.find_feature(e.feature);
            if (!f) throw ParseError(w + ": unknown feature \"" + e.feature + "\"");
            bool affects = false;
            for (const auto& fid : act->affects) affects = affects || fid == e.feature;
            if (!affects)
                throw ParseError(w + ": actuator \"" + e.actuator + "\" does not affect \"" +
                                 e.feature + "\"");
            if (ej.contains("drive") == ej.contains("set"))
                throw ParseError(w + ": exactly one of \"drive\" or \"set\" is required");
            if (ej.contains("drive")) {
                if (f->kind() != FeatureKind::Continuous)
                    throw ParseError(w + ".drive: \"" + e.feature + "\" is not continuous");
                double d = jsonu::require_double(ej, "drive", w);
                if (!std::isfinite(d)) throw ParseError(w + ".drive: expected finite number");
                e.drive = d;
            } else {
                if (f->kind() != FeatureKind::Discrete)
                    throw ParseError(w + ".set: \"" + e.feature + "\" is not discrete");
                e.set = f->type.parse_value(ej.at("set"), w + ".set");
            }
            p.effects.push_back(std::move(e));
        }
    }
    if (j.contains("noise")) {
        for (const auto& [k, v] : j.at("noise").items()) {
            const SensorSpec* s = topo.find_sensor(k);
            if (!s) throw ParseError(where + ".noise: unknown sensor \"" + k + "\"");
            const EnvironmentFeature* f = topo.find_feature(s->measures);
            if (!f || f->kind() != FeatureKind::Continuous)
                throw ParseError(where + ".noise: \"" + k + "\" does not read a continuous feature");
            if (!v.is_number() || !(v.get<double>() >= 0.0) || !std::isfinite(v.get<double>()))
                throw ParseError(where + ".noise." + k + ": expected finite sigma >= 0");
            p.noise[k] = v.get<double>();
        }
    }
    if (j.contains("initial_commands")) {
        for (const auto& [k, v] : j.at("initial_commands").items()) {
            const ActuatorSpec* a = topo.find_actuator(k);
            if (!a) throw ParseError(where + ".initial_commands: unknown actuator \"" + k + "\"");
            p.initial_commands.emplace(
                k, a->command_set.parse_value(v, where + ".initial_commands." + k));
        }
    }
    return p;
}

PlantState PlantState::initial(const Topology& topo, const PlantParams& params) {
    PlantState st;
    for (const auto& f : topo.features) st.features.emplace(f.id, f.initial_value);
    for (const auto& a : topo.actuators) {
        auto it = params.initial_commands.find(a.id);
        st.held.emplace(a.id, it != params.initial_commands.end() ? it->second
                                                                  : a.command_set.default_value());
    }
    return st;
}

void step_plant(const PlantParams& params, const Topology& topo,
                const std::vector<EnvDriveState>& env_drives, PlantState& state) {
    std::map<std::string, SignalValue> next = state.features;
    for (const auto& f : topo.features) {
        if (f.kind() == FeatureKind::Continuous) {
            double x = state.features.at(f.id).as_float();
            double sum = 0.0;
            int n = 0;
            for (const auto& d : env_drives) {
                if (d.feature != f.id) continue;
                sum += d.target;
                ++n;
            }
            if (n == 0) {
                // Actuator drives only count while no script holds the feature.
                for (const auto& e : params.effects) {
                    if (e.feature != f.id || !e.drive) continue;
                    if (state.held.at(e.actuator) == e.when) {
                        sum += *e.drive;
                        ++n;
                    }
                }
            }
            double x1;
            if (n > 0) {
                x1 = x + params.alpha * (sum / n - x);
            } else {
                auto amb = params.ambient.find(f.id);
                x1 = amb != params.ambient.end() ? x + params.decay * (amb->second - x) : x;
            }
            if (!std::isfinite(x1)) throw BoundsError("plant: feature \"" + f.id + "\" diverged");
            next[f.id] = SignalValue::of_float(x1);
        } else {
            for (const auto& e : params.effects) {
                if (e.feature != f.id || !e.set) continue;
                if (state.held.at(e.actuator) == e.when) next[f.id] = *e.set;
            }
        }
    }
    state.features = std::move(next);
}

SignalValue sample_sensor(const PlantParams& params, const Topology& topo,
                          const PlantState& state, const SensorSpec& sensor, uint64_t seed,
                          uint64_t tick) {
    const EnvironmentFeature* f = topo.find_feature(sensor.measures);
    if (!f) throw NotFoundError("sample_sensor: unknown feature \"" + sensor.measures + "\"");
    const SignalValue& truth = state.features.at(f->id);
    if (f->kind() != FeatureKind::Continuous) return truth;
    double sigma = 0.0;
    auto it = params.noise.find(sensor.id);
    if (it != params.noise.end()) sigma = it->second;
    double v = truth.as_float();
    if (sigma > 0.0) v += sigma * gauss_draw(seed, sensor.id, tick);
    if (!std::isfinite(v)) throw BoundsError("sample_sensor: non-finite reading");
    return SignalValue::of_float(v);
}

}  // namespace plcprov
