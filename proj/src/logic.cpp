#include "plcprov/logic.hpp"

#include <algorithm>

#include "plcprov/errors.hpp"

namespace plcprov {

std::set<std::string> RuleSpec::read_vars() const {
    std::set<std::string> s = cond_vars;
    s.insert(act_vars.begin(), act_vars.end());
    return s;
}

std::set<std::string> RuleSpec::read_channels() const {
    std::set<std::string> s = cond_channels;
    s.insert(act_channels.begin(), act_channels.end());
    return s;
}

const VariableDecl* PlcProgram::find_variable(const std::string& name) const {
    for (const auto& v : variables)
        if (v.name == name) return &v;
    return nullptr;
}

std::map<std::string, SignalValue> PlcProgram::initial_state() const {
    std::map<std::string, SignalValue> st;
    for (const auto& v : variables)
        st.emplace(v.name, v.initial ? *v.initial : v.type.default_value());
    return st;
}

ScanResult scan(const PlcProgram& prog, const ScanInput& in) {
    ScanResult out;
    out.vars = in.vars;
    EvalContext ctx{in.tick, &out.vars, &in.inbox};

    for (const auto& rule : prog.rules) {
        out.read_vars.insert(rule.cond_vars.begin(), rule.cond_vars.end());
        out.read_channels.insert(rule.cond_channels.begin(), rule.cond_channels.end());
        bool fire;
        try {
            fire = eval_expr(*rule.condition, ctx).as_bool();
        } catch (const EvalFault& f) {
            out.fault = "rule " + rule.id + ": " + f.what();
            break;
        }
        if (!fire) continue;
        out.fired.push_back(rule.id);
        out.read_vars.insert(rule.act_vars.begin(), rule.act_vars.end());
        out.read_channels.insert(rule.act_channels.begin(), rule.act_channels.end());
        for (const auto& act : rule.actions) {
            SignalValue v;
            try {
                v = eval_expr(*act.value, ctx);
            } catch (const EvalFault& f) {
                out.fault = "rule " + rule.id + ": " + f.what();
                break;
            }
            if (act.kind == ActionKind::Set) {
                out.vars[act.target] = v;
                out.writes.push_back({rule.id, act.target, v});
            } else {
                out.sends.push_back({rule.id, act.target, v});
            }
        }
        if (out.fault) break;
    }

    if (out.fault) {
        // Fail-safe: a faulted controller drops every output to its initial
        // level and keeps internal state untouched.
        for (const auto& v : prog.variables)
            if (v.dir == Direction::Out)
                out.vars[v.name] = v.initial ? *v.initial : v.type.default_value();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Loading

namespace {

ActionSpec parse_action(const json& j, const PlcProgram& prog, const TypeContext& tctx,
                        const Topology& topo, const std::string& where) {
    if (!j.is_object() || j.size() != 1)
        throw ParseError(where + ": action must be {\"set\": ...} or {\"send\": ...}");
    const std::string key = j.begin().key();
    const json& body = j.begin().value();
    ActionSpec a;
    if (key == "set") {
        std::string w = where + ".set";
        jsonu::check_keys(body, w, {"var", "value"}, {});
        a.kind = ActionKind::Set;
        a.target = jsonu::require_string(body, "var", w);
        const VariableDecl* decl = prog.find_variable(a.target);
        if (!decl) throw ParseError(w + ": unknown variable \"" + a.target + "\"");
        if (decl->dir == Direction::In)
            throw ParseError(w + ": \"" + a.target + "\" is an input; programs cannot write it");
        a.value = parse_expr(body.at("value"), tctx, w + ".value");
        if (!assignable(a.value->type, decl->type))
            throw ParseError(w + ": cannot assign " + a.value->type.describe() + " to \"" +
                             a.target + "\" of type " + decl->type.describe());
    } else if (key == "send") {
        std::string w = where + ".send";
        jsonu::check_keys(body, w, {"channel", "value"}, {});
        a.kind = ActionKind::Send;
        a.target = jsonu::require_string(body, "channel", w);
        if (std::find(prog.out_channels.begin(), prog.out_channels.end(), a.target) ==
            prog.out_channels.end())
            throw ParseError(w + ": plc \"" + prog.plc_id + "\" has no outbound channel \"" +
                             a.target + "\"");
        const ChannelSpec* ch = topo.find_channel(a.target);
        a.value = parse_expr(body.at("value"), tctx, w + ".value");
        if (!assignable(a.value->type, ch->payload_type))
            throw ParseError(w + ": cannot send " + a.value->type.describe() + " on \"" +
                             a.target + "\" carrying " + ch->payload_type.describe());
    } else {
        throw ParseError(where + ": unknown action \"" + key + "\"");
    }
    return a;
}

PlcProgram make_base_program(const PlcSpec& plc, const Topology& topo) {
    PlcProgram p;
    p.plc_id = plc.id;
    p.variables = plc.variables;
    for (const auto& c : topo.channels) {
        if (c.to_plc == plc.id) p.in_channels.push_back(c.id);
        if (c.from_plc == plc.id) p.out_channels.push_back(c.id);
    }
    return p;
}

void parse_program_body(PlcProgram& p, const json& pj, const Topology& topo,
                        const std::string& where) {
    if (pj.contains("internals")) {
        size_t i = 0;
        for (const auto& vj : pj.at("internals")) {
            std::string w = where + ".internals[" + std::to_string(i++) + "]";
            jsonu::check_keys(vj, w, {"name", "type"}, {"initial"});
            VariableDecl v;
            v.name = jsonu::require_string(vj, "name", w);
            v.dir = Direction::Internal;
            v.type = ValueType::from_json(vj.at("type"), w + ".type");
            if (vj.contains("initial"))
                v.initial = v.type.parse_value(vj.at("initial"), w + ".initial");
            if (p.find_variable(v.name))
                throw ParseError(w + ": \"" + v.name + "\" collides with a declared variable");
            p.variables.push_back(std::move(v));
        }
    }

    TypeContext tctx;
    tctx.var_type = [&p](const std::string& n) -> const ValueType* {
        const VariableDecl* d = p.find_variable(n);
        return d ? &d->type : nullptr;
    };
    tctx.channel_payload = [&p, &topo](const std::string& c) -> const ValueType* {
        if (std::find(p.in_channels.begin(), p.in_channels.end(), c) == p.in_channels.end())
            return nullptr;
        return &topo.find_channel(c)->payload_type;
    };

    std::set<std::string> rule_ids;
    if (pj.contains("rules")) {
        size_t i = 0;
        for (const auto& rj : pj.at("rules")) {
            std::string w = where + ".rules[" + std::to_string(i++) + "]";
            jsonu::check_keys(rj, w, {"id", "when", "then"}, {});
            RuleSpec r;
            r.id = jsonu::require_string(rj, "id", w);
            if (!rule_ids.insert(r.id).second)
                throw ParseError(w + ": duplicate rule id \"" + r.id + "\"");
            r.condition = parse_expr(rj.at("when"), tctx, w + ".when");
            if (r.condition->type.kind != SignalType::Bool)
                throw ParseError(w + ".when: condition must be bool, got " +
                                 r.condition->type.describe());
            const json& then = rj.at("then");
            if (!then.is_array() || then.empty())
                throw ParseError(w + ".then: expected a non-empty action array");
            size_t k = 0;
            for (const auto& aj : then) {
                ActionSpec a =
                    parse_action(aj, p, tctx, topo, w + ".then[" + std::to_string(k++) + "]");
                collect_reads(*a.value, r.act_vars, r.act_channels);
                r.actions.push_back(std::move(a));
            }
            collect_reads(*r.condition, r.cond_vars, r.cond_channels);
            p.rules.push_back(std::move(r));
        }
    }
}

}  // namespace

std::vector<PlcProgram> load_programs(const json& j, const Topology& topo) {
    jsonu::check_keys(j, "programs", {"programs"}, {});
    std::map<std::string, const json*> by_plc;
    size_t i = 0;
    for (const auto& pj : j.at("programs")) {
        std::string w = "programs[" + std::to_string(i++) + "]";
        jsonu::check_keys(pj, w, {"plc"}, {"internals", "rules"});
        std::string id = jsonu::require_string(pj, "plc", w);
        if (!topo.find_plc(id)) throw ParseError(w + ": unknown plc \"" + id + "\"");
        if (!by_plc.emplace(id, &pj).second)
            throw ParseError(w + ": second program for plc \"" + id + "\"");
    }

    std::vector<PlcProgram> out;
    for (const auto& plc : topo.plcs) {
        PlcProgram p = make_base_program(plc, topo);
        auto it = by_plc.find(plc.id);
        if (it != by_plc.end())
            parse_program_body(p, *it->second, topo, "programs[" + plc.id + "]");
        out.push_back(std::move(p));
    }
    return out;
}

ojson programs_to_json(const std::vector<PlcProgram>& progs) {
    ojson arr = ojson::array();
    for (const auto& p : progs) {
        ojson pj;
        pj["plc"] = p.plc_id;
        ojson internals = ojson::array();
        for (const auto& v : p.variables) {
            if (v.dir != Direction::Internal) continue;
            ojson vj;
            vj["name"] = v.name;
            vj["type"] = v.type.to_json();
            if (v.initial) vj["initial"] = v.initial->to_json();
            internals.push_back(std::move(vj));
        }
        if (!internals.empty()) pj["internals"] = std::move(internals);
        ojson rules = ojson::array();
        for (const auto& r : p.rules) {
            ojson rj;
            rj["id"] = r.id;
            rj["when"] = expr_to_json(*r.condition);
            ojson then = ojson::array();
            for (const auto& a : r.actions) {
                ojson body;
                if (a.kind == ActionKind::Set) {
                    body["var"] = a.target;
                    body["value"] = expr_to_json(*a.value);
                    then.push_back(ojson{{"set", std::move(body)}});
                } else {
                    body["channel"] = a.target;
                    body["value"] = expr_to_json(*a.value);
                    then.push_back(ojson{{"send", std::move(body)}});
                }
            }
            rj["then"] = std::move(then);
            rules.push_back(std::move(rj));
        }
        pj["rules"] = std::move(rules);
        arr.push_back(std::move(pj));
    }
    return ojson{{"programs", std::move(arr)}};
}

}  // namespace plcprov
