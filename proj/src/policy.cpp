#include "plcprov/policy.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "plcprov/errors.hpp"

namespace plcprov {

std::string to_string(PolicyKind k) {
    switch (k) {
        case PolicyKind::DuplicateActuation: return "duplicate_actuation";
        case PolicyKind::ConflictingCommands: return "conflicting_commands";
        case PolicyKind::RangeExcursion: return "range_excursion";
        case PolicyKind::FeatureContention: return "feature_contention";
        case PolicyKind::Guard: return "guard";
        case PolicyKind::Correlation: return "correlation";
        case PolicyKind::SourceBinding: return "source_binding";
    }
    return "?";
}

PolicyKind policy_kind_from_string(const std::string& s, const std::string& where) {
    if (s == "duplicate_actuation") return PolicyKind::DuplicateActuation;
    if (s == "conflicting_commands") return PolicyKind::ConflictingCommands;
    if (s == "range_excursion") return PolicyKind::RangeExcursion;
    if (s == "feature_contention") return PolicyKind::FeatureContention;
    if (s == "guard") return PolicyKind::Guard;
    if (s == "correlation") return PolicyKind::Correlation;
    if (s == "source_binding") return PolicyKind::SourceBinding;
    throw ParseError(where + ": unknown policy kind \"" + s + "\"");
}

// ---------------------------------------------------------------------------
// Predicate

namespace {

const char* pred_op_name(Predicate::Op op) {
    switch (op) {
        case Predicate::Op::Eq: return "eq";
        case Predicate::Op::Ne: return "ne";
        case Predicate::Op::Lt: return "lt";
        case Predicate::Op::Le: return "le";
        case Predicate::Op::Gt: return "gt";
        case Predicate::Op::Ge: return "ge";
        case Predicate::Op::In: return "in";
    }
    return "?";
}

int order_cmp(const SignalValue& a, const SignalValue& b) {
    if (a.type() == SignalType::Int) {
        int64_t x = a.as_int(), y = b.as_int();
        return x < y ? -1 : x > y ? 1 : 0;
    }
    double x = a.as_float(), y = b.as_float();
    return x < y ? -1 : x > y ? 1 : 0;
}

}  // namespace

bool Predicate::holds(const SignalValue& v) const {
    switch (op) {
        case Op::Eq: return v == args[0];
        case Op::Ne: return v != args[0];
        case Op::Lt: return order_cmp(v, args[0]) < 0;
        case Op::Le: return order_cmp(v, args[0]) <= 0;
        case Op::Gt: return order_cmp(v, args[0]) > 0;
        case Op::Ge: return order_cmp(v, args[0]) >= 0;
        case Op::In:
            return std::find(args.begin(), args.end(), v) != args.end();
    }
    return false;
}

std::string Predicate::describe() const {
    if (op == Op::In) {
        std::string s = "in {";
        for (size_t i = 0; i < args.size(); ++i) {
            if (i) s += ", ";
            s += args[i].canonical();
        }
        return s + "}";
    }
    return std::string(pred_op_name(op)) + " " + args[0].canonical();
}

ojson Predicate::to_json() const {
    ojson j;
    j["op"] = pred_op_name(op);
    if (op == Op::In) {
        ojson arr = ojson::array();
        for (const auto& a : args) arr.push_back(a.to_json());
        j["values"] = std::move(arr);
    } else {
        j["value"] = args[0].to_json();
    }
    return j;
}

Predicate Predicate::parse(const json& j, const ValueType& domain, const std::string& where) {
    Predicate p;
    std::string op = jsonu::require_string(j, "op", where);
    if (op == "eq") p.op = Op::Eq;
    else if (op == "ne") p.op = Op::Ne;
    else if (op == "lt") p.op = Op::Lt;
    else if (op == "le") p.op = Op::Le;
    else if (op == "gt") p.op = Op::Gt;
    else if (op == "ge") p.op = Op::Ge;
    else if (op == "in") p.op = Op::In;
    else throw ParseError(where + ".op: unknown operator \"" + op + "\"");

    bool ordering = p.op == Op::Lt || p.op == Op::Le || p.op == Op::Gt || p.op == Op::Ge;
    if (ordering && domain.kind != SignalType::Int && domain.kind != SignalType::Float)
        throw ParseError(where + ": ordering comparison over " + domain.describe());

    if (p.op == Op::In) {
        jsonu::check_keys(j, where, {"op", "values"}, {});
        const json& vals = j.at("values");
        if (!vals.is_array() || vals.empty())
            throw ParseError(where + ".values: expected non-empty array");
        size_t i = 0;
        for (const auto& v : vals)
            p.args.push_back(
                domain.parse_value(v, where + ".values[" + std::to_string(i++) + "]"));
    } else {
        jsonu::check_keys(j, where, {"op", "value"}, {});
        p.args.push_back(domain.parse_value(j.at("value"), where + ".value"));
    }
    return p;
}

// ---------------------------------------------------------------------------
// Policy loading

namespace {

const ValueType& reading_domain(const Topology& topo, const std::string& sensor_id,
                                const std::string& where) {
    const SensorSpec* s = topo.find_sensor(sensor_id);
    if (!s) throw ParseError(where + ": unknown sensor \"" + sensor_id + "\"");
    const EnvironmentFeature* f = topo.find_feature(s->measures);
    if (!f) throw ParseError(where + ": sensor \"" + sensor_id + "\" measures unknown feature");
    return f->type;
}

GuardExpr parse_guard(const json& j, const Topology& topo, const std::string& where) {
    if (!j.is_object()) throw ParseError(where + ": expected object");
    GuardExpr e;
    if (j.contains("any") || j.contains("all")) {
        bool any = j.contains("any");
        jsonu::check_keys(j, where, {any ? "any" : "all"}, {});
        e.kind = any ? GuardExpr::Kind::Any : GuardExpr::Kind::All;
        const json& kids = j.at(any ? "any" : "all");
        if (!kids.is_array() || kids.empty())
            throw ParseError(where + ": expected non-empty branch array");
        size_t i = 0;
        for (const auto& k : kids)
            e.kids.push_back(
                parse_guard(k, topo, where + (any ? ".any[" : ".all[") + std::to_string(i++) + "]"));
        return e;
    }
    jsonu::check_keys(j, where, {"sensor"}, {"predicate", "origin"});
    e.kind = GuardExpr::Kind::Leaf;
    e.sensor = jsonu::require_string(j, "sensor", where);
    const ValueType& domain = reading_domain(topo, e.sensor, where);
    if (j.contains("predicate"))
        e.predicate = Predicate::parse(j.at("predicate"), domain, where + ".predicate");
    if (j.contains("origin")) {
        e.origin = jsonu::require_string(j, "origin", where);
        if (!topo.has_attachment(*e.origin))
            throw ParseError(where + ".origin: unknown attachment point \"" + *e.origin + "\"");
    }
    return e;
}

}  // namespace

ojson GuardExpr::to_json() const {
    if (kind == Kind::Any || kind == Kind::All) {
        ojson arr = ojson::array();
        for (const auto& k : kids) arr.push_back(k.to_json());
        return ojson{{kind == Kind::Any ? "any" : "all", std::move(arr)}};
    }
    ojson j;
    j["sensor"] = sensor;
    if (predicate) j["predicate"] = predicate->to_json();
    if (origin) j["origin"] = *origin;
    return j;
}

std::vector<PolicySpec> load_policies(const json& j, const Topology& topo) {
    jsonu::check_keys(j, "policies", {"policies"}, {});
    std::vector<PolicySpec> out;
    std::set<std::string> ids;
    size_t i = 0;
    for (const auto& pj : j.at("policies")) {
        std::string w = "policies[" + std::to_string(i++) + "]";
        PolicySpec p;
        p.id = jsonu::require_string(pj, "id", w);
        if (!ids.insert(p.id).second) throw ParseError(w + ": duplicate policy id \"" + p.id + "\"");
        w = "policy \"" + p.id + "\"";
        p.kind = policy_kind_from_string(jsonu::require_string(pj, "kind", w), w + ".kind");
        if (pj.contains("description")) p.description = jsonu::require_string(pj, "description", w);

        auto need_actuator = [&]() -> const ActuatorSpec& {
            p.actuator = jsonu::require_string(pj, "actuator", w);
            const ActuatorSpec* a = topo.find_actuator(p.actuator);
            if (!a) throw ParseError(w + ": unknown actuator \"" + p.actuator + "\"");
            return *a;
        };
        auto need_window = [&](uint64_t least) {
            p.window = jsonu::require_uint(pj, "window", w);
            if (p.window < least)
                throw ParseError(w + ".window: must be at least " + std::to_string(least));
        };

        switch (p.kind) {
            case PolicyKind::DuplicateActuation:
                jsonu::check_keys(pj, w, {"id", "kind", "actuator", "window"}, {"description"});
                need_actuator();
                need_window(1);
                break;
            case PolicyKind::ConflictingCommands: {
                jsonu::check_keys(pj, w, {"id", "kind", "actuator", "window"},
                                  {"values", "description"});
                const ActuatorSpec& a = need_actuator();
                need_window(1);
                if (pj.contains("values")) {
                    const json& vals = pj.at("values");
                    if (!vals.is_array() || vals.size() < 2)
                        throw ParseError(w + ".values: need at least two command values");
                    size_t k = 0;
                    for (const auto& v : vals) {
                        SignalValue sv = a.command_set.parse_value(
                            v, w + ".values[" + std::to_string(k++) + "]");
                        if (std::find(p.conflict_values.begin(), p.conflict_values.end(), sv) !=
                            p.conflict_values.end())
                            throw ParseError(w + ".values: duplicate value " + sv.canonical());
                        p.conflict_values.push_back(std::move(sv));
                    }
                }
                break;
            }
            case PolicyKind::RangeExcursion: {
                jsonu::check_keys(pj, w, {"id", "kind", "sensor"},
                                  {"lo", "hi", "min_duration", "description"});
                p.sensor = jsonu::require_string(pj, "sensor", w);
                const SensorSpec* s = topo.find_sensor(p.sensor);
                if (!s) throw ParseError(w + ": unknown sensor \"" + p.sensor + "\"");
                if (reading_domain(topo, p.sensor, w).kind != SignalType::Float)
                    throw ParseError(w + ": \"" + p.sensor + "\" does not yield float readings");
                if (pj.contains("lo") != pj.contains("hi"))
                    throw ParseError(w + ": lo and hi must be given together");
                if (pj.contains("lo")) {
                    p.lo = jsonu::require_double(pj, "lo", w);
                    p.hi = jsonu::require_double(pj, "hi", w);
                } else if (s->normal_range) {
                    p.lo = s->normal_range->first;
                    p.hi = s->normal_range->second;
                } else {
                    throw ParseError(w + ": sensor declares no normal range; give lo and hi");
                }
                if (!std::isfinite(p.lo) || !std::isfinite(p.hi) || p.lo > p.hi)
                    throw ParseError(w + ": bounds are not a valid [lo, hi]");
                if (pj.contains("min_duration")) {
                    p.min_duration = jsonu::require_uint(pj, "min_duration", w);
                    if (p.min_duration < 1)
                        throw ParseError(w + ".min_duration: must be at least 1");
                }
                break;
            }
            case PolicyKind::FeatureContention:
                jsonu::check_keys(pj, w, {"id", "kind", "feature", "max_actuators", "window"},
                                  {"description"});
                p.feature = jsonu::require_string(pj, "feature", w);
                if (!topo.find_feature(p.feature))
                    throw ParseError(w + ": unknown feature \"" + p.feature + "\"");
                p.max_actuators = jsonu::require_uint(pj, "max_actuators", w);
                if (p.max_actuators < 1)
                    throw ParseError(w + ".max_actuators: must be at least 1");
                need_window(1);
                break;
            case PolicyKind::Guard: {
                jsonu::check_keys(pj, w, {"id", "kind", "actuator", "command", "window", "permit"},
                                  {"description"});
                const ActuatorSpec& a = need_actuator();
                p.guard_command = a.command_set.parse_value(pj.at("command"), w + ".command");
                p.window = jsonu::require_uint(pj, "window", w);
                p.permit = parse_guard(pj.at("permit"), topo, w + ".permit");
                break;
            }
            case PolicyKind::Correlation: {
                jsonu::check_keys(pj, w, {"id", "kind", "trigger", "corroborate", "window"},
                                  {"description"});
                CorrelationSpec c;
                const json& tj = pj.at("trigger");
                jsonu::check_keys(tj, w + ".trigger", {"sensor", "predicate"}, {});
                c.trigger_sensor = jsonu::require_string(tj, "sensor", w + ".trigger");
                c.trigger = Predicate::parse(tj.at("predicate"),
                                             reading_domain(topo, c.trigger_sensor, w + ".trigger"),
                                             w + ".trigger.predicate");
                const json& cj = pj.at("corroborate");
                jsonu::check_keys(cj, w + ".corroborate", {"sensor", "rise"}, {});
                c.corroborate_sensor = jsonu::require_string(cj, "sensor", w + ".corroborate");
                if (reading_domain(topo, c.corroborate_sensor, w + ".corroborate").kind !=
                    SignalType::Float)
                    throw ParseError(w + ".corroborate: \"" + c.corroborate_sensor +
                                     "\" does not yield float readings");
                c.rise = jsonu::require_double(cj, "rise", w + ".corroborate");
                if (!std::isfinite(c.rise) || c.rise <= 0.0)
                    throw ParseError(w + ".corroborate.rise: expected positive finite number");
                need_window(1);
                p.corr = std::move(c);
                break;
            }
            case PolicyKind::SourceBinding:
                jsonu::check_keys(pj, w, {"id", "kind"}, {"sensor", "description"});
                if (pj.contains("sensor")) {
                    p.sensor = jsonu::require_string(pj, "sensor", w);
                    if (!topo.find_sensor(p.sensor))
                        throw ParseError(w + ": unknown sensor \"" + p.sensor + "\"");
                }
                break;
        }
        out.push_back(std::move(p));
    }
    return out;
}

ojson PolicySpec::to_json() const {
    ojson j;
    j["id"] = id;
    j["kind"] = to_string(kind);
    switch (kind) {
        case PolicyKind::DuplicateActuation:
            j["actuator"] = actuator;
            j["window"] = window;
            break;
        case PolicyKind::ConflictingCommands:
            j["actuator"] = actuator;
            j["window"] = window;
            if (!conflict_values.empty()) {
                ojson arr = ojson::array();
                for (const auto& v : conflict_values) arr.push_back(v.to_json());
                j["values"] = std::move(arr);
            }
            break;
        case PolicyKind::RangeExcursion:
            j["sensor"] = sensor;
            j["lo"] = lo;
            j["hi"] = hi;
            j["min_duration"] = min_duration;
            break;
        case PolicyKind::FeatureContention:
            j["feature"] = feature;
            j["max_actuators"] = max_actuators;
            j["window"] = window;
            break;
        case PolicyKind::Guard:
            j["actuator"] = actuator;
            j["command"] = guard_command->to_json();
            j["window"] = window;
            j["permit"] = permit->to_json();
            break;
        case PolicyKind::Correlation: {
            ojson t;
            t["sensor"] = corr->trigger_sensor;
            t["predicate"] = corr->trigger.to_json();
            j["trigger"] = std::move(t);
            ojson c;
            c["sensor"] = corr->corroborate_sensor;
            c["rise"] = corr->rise;
            j["corroborate"] = std::move(c);
            j["window"] = window;
            break;
        }
        case PolicyKind::SourceBinding:
            if (!sensor.empty()) j["sensor"] = sensor;
            break;
    }
    if (!description.empty()) j["description"] = description;
    return j;
}

ojson policies_to_json(const std::vector<PolicySpec>& policies) {
    ojson arr = ojson::array();
    for (const auto& p : policies) arr.push_back(p.to_json());
    return ojson{{"policies", std::move(arr)}};
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

struct GraphView {
    const ProvGraph& g;
    std::vector<const ProvNode*> readings;                          // sensor-fed only
    std::map<std::string, std::vector<const ProvNode*>> by_sensor;  // sorted (tick, seq)
    std::map<std::string, std::vector<const ProvNode*>> by_actuator;

    explicit GraphView(const ProvGraph& graph) : g(graph) {
        for (const auto& n : g.nodes) {
            if (n.type == NodeType::Reading) {
                std::string s = n.attr("sensor");
                if (s.empty()) continue;  // operator input
                readings.push_back(&n);
                by_sensor[s].push_back(&n);
            } else if (n.type == NodeType::Command) {
                by_actuator[n.attr("actuator")].push_back(&n);
            }
        }
        auto order = [](const ProvNode* a, const ProvNode* b) {
            if (a->tick != b->tick) return a->tick < b->tick;
            if (a->seq != b->seq) return a->seq < b->seq;
            return a->id < b->id;
        };
        std::sort(readings.begin(), readings.end(), order);
        for (auto& [k, v] : by_sensor) std::sort(v.begin(), v.end(), order);
        for (auto& [k, v] : by_actuator) std::sort(v.begin(), v.end(), order);
    }

    const std::vector<const ProvNode*>& sensor(const std::string& id) const {
        static const std::vector<const ProvNode*> none;
        auto it = by_sensor.find(id);
        return it == by_sensor.end() ? none : it->second;
    }
    const std::vector<const ProvNode*>& actuator(const std::string& id) const {
        static const std::vector<const ProvNode*> none;
        auto it = by_actuator.find(id);
        return it == by_actuator.end() ? none : it->second;
    }
};

std::string join_values(const std::set<std::string>& vs) {
    std::string s = "{";
    bool first = true;
    for (const auto& v : vs) {
        if (!first) s += ", ";
        s += v;
        first = false;
    }
    return s + "}";
}

void eval_duplicate(const PolicySpec& p, const GraphView& view,
                    std::vector<PolicyViolation>& out) {
    const auto& cmds = view.actuator(p.actuator);
    size_t i = 0;
    while (i < cmds.size()) {
        uint64_t t0 = cmds[i]->tick;
        size_t j = i;
        while (j < cmds.size() && cmds[j]->tick < t0 + p.window) ++j;
        if (j - i >= 2) {
            PolicyViolation v;
            v.policy_id = p.id;
            v.kind = p.kind;
            v.tick = t0;
            for (size_t k = i; k < j; ++k) v.witness.push_back(cmds[k]->id);
            v.detail = "actuator \"" + p.actuator + "\" received " + std::to_string(j - i) +
                       " commands within " + std::to_string(p.window) +
                       " tick(s) starting at tick " + std::to_string(t0);
            out.push_back(std::move(v));
            i = j;
        } else {
            ++i;
        }
    }
}

void eval_conflicting(const PolicySpec& p, const GraphView& view,
                      std::vector<PolicyViolation>& out) {
    const auto& cmds = view.actuator(p.actuator);
    size_t i = 0;
    while (i < cmds.size()) {
        uint64_t t0 = cmds[i]->tick;
        size_t j = i;
        while (j < cmds.size() && cmds[j]->tick < t0 + p.window) ++j;

        bool clash = false;
        std::vector<const ProvNode*> involved;
        std::set<std::string> values;
        if (p.conflict_values.empty()) {
            std::set<SignalValue> distinct;
            for (size_t k = i; k < j; ++k) distinct.insert(cmds[k]->value());
            clash = distinct.size() >= 2;
            if (clash)
                for (size_t k = i; k < j; ++k) {
                    involved.push_back(cmds[k]);
                    values.insert(cmds[k]->value().canonical());
                }
        } else {
            std::set<SignalValue> present;
            for (size_t k = i; k < j; ++k) present.insert(cmds[k]->value());
            clash = true;
            for (const auto& cv : p.conflict_values) clash = clash && present.count(cv) > 0;
            if (clash)
                for (size_t k = i; k < j; ++k) {
                    if (std::find(p.conflict_values.begin(), p.conflict_values.end(),
                                  cmds[k]->value()) == p.conflict_values.end())
                        continue;
                    involved.push_back(cmds[k]);
                    values.insert(cmds[k]->value().canonical());
                }
        }
        if (clash) {
            PolicyViolation v;
            v.policy_id = p.id;
            v.kind = p.kind;
            v.tick = t0;
            for (const auto* c : involved) v.witness.push_back(c->id);
            v.detail = "actuator \"" + p.actuator + "\" received conflicting commands " +
                       join_values(values) + " within " + std::to_string(p.window) +
                       " tick(s) starting at tick " + std::to_string(t0);
            out.push_back(std::move(v));
            i = j;
        } else {
            ++i;
        }
    }
}

void eval_range(const PolicySpec& p, const GraphView& view, std::vector<PolicyViolation>& out) {
    const auto& rs = view.sensor(p.sensor);
    size_t i = 0;
    auto outside = [&p](const ProvNode* r) {
        double v = r->value().as_float();
        return v < p.lo || v > p.hi;
    };
    while (i < rs.size()) {
        if (!outside(rs[i])) {
            ++i;
            continue;
        }
        size_t j = i + 1;
        while (j < rs.size() && rs[j]->tick == rs[j - 1]->tick + 1 && outside(rs[j])) ++j;
        if (j - i >= p.min_duration) {
            PolicyViolation v;
            v.policy_id = p.id;
            v.kind = p.kind;
            v.tick = rs[i]->tick;
            for (size_t k = i; k < j; ++k) v.witness.push_back(rs[k]->id);
            v.detail = "sensor \"" + p.sensor + "\" read outside [" + json(p.lo).dump() + ", " +
                       json(p.hi).dump() + "] for " + std::to_string(j - i) +
                       " consecutive tick(s) starting at tick " + std::to_string(rs[i]->tick);
            out.push_back(std::move(v));
        }
        i = j;
    }
}

void eval_contention(const PolicySpec& p, const GraphView& view,
                     std::vector<PolicyViolation>& out) {
    std::set<std::string> affecting;
    for (const auto& a : view.g.universe.actuators)
        for (const auto& f : a.affects)
            if (f == p.feature) affecting.insert(a.id);

    std::vector<const ProvNode*> cmds;
    for (const auto& [act, list] : view.by_actuator) {
        if (!affecting.count(act)) continue;
        cmds.insert(cmds.end(), list.begin(), list.end());
    }
    std::sort(cmds.begin(), cmds.end(), [](const ProvNode* a, const ProvNode* b) {
        if (a->tick != b->tick) return a->tick < b->tick;
        if (a->seq != b->seq) return a->seq < b->seq;
        return a->id < b->id;
    });

    size_t i = 0;
    while (i < cmds.size()) {
        uint64_t t0 = cmds[i]->tick;
        size_t j = i;
        std::set<std::string> actors;
        while (j < cmds.size() && cmds[j]->tick < t0 + p.window)
            actors.insert(cmds[j++]->attr("actuator"));
        if (actors.size() > p.max_actuators) {
            PolicyViolation v;
            v.policy_id = p.id;
            v.kind = p.kind;
            v.tick = t0;
            for (size_t k = i; k < j; ++k) v.witness.push_back(cmds[k]->id);
            v.detail = "feature \"" + p.feature + "\" commanded by " +
                       std::to_string(actors.size()) + " actuators " + join_values(actors) +
                       " within " + std::to_string(p.window) + " tick(s) starting at tick " +
                       std::to_string(t0) + " (allowed: " + std::to_string(p.max_actuators) + ")";
            out.push_back(std::move(v));
            i = j;
        } else {
            ++i;
        }
    }
}

bool permit_holds(const GuardExpr& e, const std::vector<const ProvNode*>& readings) {
    switch (e.kind) {
        case GuardExpr::Kind::Any:
            for (const auto& k : e.kids)
                if (permit_holds(k, readings)) return true;
            return false;
        case GuardExpr::Kind::All:
            for (const auto& k : e.kids)
                if (!permit_holds(k, readings)) return false;
            return true;
        case GuardExpr::Kind::Leaf:
            for (const auto* r : readings) {
                if (r->attr("sensor") != e.sensor) continue;
                if (e.predicate && !e.predicate->holds(r->value())) continue;
                if (e.origin && r->attr("origin") != *e.origin) continue;
                return true;
            }
            return false;
    }
    return false;
}

void eval_guard(const PolicySpec& p, const GraphView& view, std::vector<PolicyViolation>& out) {
    for (const ProvNode* cmd : view.actuator(p.actuator)) {
        if (cmd->value() != *p.guard_command) continue;
        uint64_t lo = cmd->tick >= p.window ? cmd->tick - p.window : 0;
        std::vector<const ProvNode*> evidence;
        for (const auto& id : view.g.ancestors(cmd->id)) {
            const ProvNode& n = view.g.at(id);
            if (n.type != NodeType::Reading) continue;
            if (n.tick < lo || n.tick > cmd->tick) continue;
            evidence.push_back(&n);
        }
        if (permit_holds(*p.permit, evidence)) continue;
        PolicyViolation v;
        v.policy_id = p.id;
        v.kind = p.kind;
        v.tick = cmd->tick;
        v.witness.push_back(cmd->id);
        v.detail = "command " + p.guard_command->canonical() + " on \"" + p.actuator +
                   "\" at tick " + std::to_string(cmd->tick) +
                   " has no qualifying authorization among the readings that led to it";
        out.push_back(std::move(v));
    }
}

void eval_correlation(const PolicySpec& p, const GraphView& view,
                      std::vector<PolicyViolation>& out) {
    const CorrelationSpec& c = *p.corr;
    std::map<uint64_t, double> series;
    for (const ProvNode* r : view.sensor(c.corroborate_sensor))
        series[r->tick] = r->value().as_float();  // later seq wins

    for (const ProvNode* trig : view.sensor(c.trigger_sensor)) {
        if (!c.trigger.holds(trig->value())) continue;
        uint64_t t = trig->tick;
        uint64_t lo = t >= p.window ? t - p.window : 0;
        bool ok = false;
        for (uint64_t u = lo; u <= t + p.window && !ok; ++u) {
            auto fu = series.find(u);
            if (fu == series.end()) continue;
            uint64_t base = u >= p.window ? u - p.window : 0;
            auto fb = series.find(base);
            if (fb == series.end()) continue;
            ok = fu->second - fb->second >= c.rise;
        }
        if (ok) continue;
        PolicyViolation v;
        v.policy_id = p.id;
        v.kind = p.kind;
        v.tick = t;
        v.witness.push_back(trig->id);
        v.detail = "reading " + trig->value().canonical() + " of \"" + c.trigger_sensor +
                   "\" at tick " + std::to_string(t) + " is uncorroborated: \"" +
                   c.corroborate_sensor + "\" never rose by " + json(c.rise).dump() +
                   " within " + std::to_string(p.window) + " tick(s) of it";
        out.push_back(std::move(v));
    }
}

void eval_source_binding(const PolicySpec& p, const GraphView& view,
                         std::vector<PolicyViolation>& out) {
    for (const ProvNode* r : view.readings) {
        if (!p.sensor.empty() && r->attr("sensor") != p.sensor) continue;
        std::string declared = r->attr("declared_origin");
        std::string origin = r->attr("origin");
        if (origin == declared) continue;
        PolicyViolation v;
        v.policy_id = p.id;
        v.kind = p.kind;
        v.tick = r->tick;
        v.witness.push_back(r->id);
        v.detail = "reading for \"" + r->attr("sensor") + "\" at tick " + std::to_string(r->tick) +
                   " originated at \"" + origin + "\" instead of its declared point \"" +
                   declared + "\"";
        out.push_back(std::move(v));
    }
}

}  // namespace

std::vector<PolicyViolation> evaluate_policies(const ProvGraph& g,
                                               const std::vector<PolicySpec>& policies) {
    GraphView view(g);
    std::vector<PolicyViolation> out;
    for (const auto& p : policies) {
        switch (p.kind) {
            case PolicyKind::DuplicateActuation: eval_duplicate(p, view, out); break;
            case PolicyKind::ConflictingCommands: eval_conflicting(p, view, out); break;
            case PolicyKind::RangeExcursion: eval_range(p, view, out); break;
            case PolicyKind::FeatureContention: eval_contention(p, view, out); break;
            case PolicyKind::Guard: eval_guard(p, view, out); break;
            case PolicyKind::Correlation: eval_correlation(p, view, out); break;
            case PolicyKind::SourceBinding: eval_source_binding(p, view, out); break;
        }
    }
    return out;
}

}  // namespace plcprov
