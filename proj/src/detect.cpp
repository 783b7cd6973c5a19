#include "plcprov/detect.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>

#include "plcprov/errors.hpp"

namespace plcprov {

namespace {

// (tick, seq, id) puts agents and init states first and keeps everything
// else in event order.
std::vector<std::string> sorted_ids(const ProvGraph& g, const std::set<std::string>& ids) {
    std::vector<std::string> out(ids.begin(), ids.end());
    std::sort(out.begin(), out.end(), [&g](const std::string& a, const std::string& b) {
        const ProvNode& x = g.at(a);
        const ProvNode& y = g.at(b);
        if (x.tick != y.tick) return x.tick < y.tick;
        if (x.seq != y.seq) return x.seq < y.seq;
        return x.id < y.id;
    });
    return out;
}

bool node_before(const ProvNode& a, const ProvNode& b) {
    if (a.tick != b.tick) return a.tick < b.tick;
    if (a.seq != b.seq) return a.seq < b.seq;
    return a.id < b.id;
}

// Source preference when a node was derived from several entities: sensor
// evidence first, then traffic, then stored state; ties go to the earliest
// (tick, seq, id).
int source_rank(NodeType t) {
    switch (t) {
        case NodeType::Reading: return 0;
        case NodeType::Message: return 1;
        case NodeType::VariableState: return 2;
        default: return 3;
    }
}

bool better_source(const ProvNode& a, const ProvNode& b) {
    int ra = source_rank(a.type), rb = source_rank(b.type);
    if (ra != rb) return ra < rb;
    return node_before(a, b);
}

// Walks the precise derivation trail backwards from `terminus`, inserting
// the generating scan between each entity and its strongest source, and
// returns the chain in cause-to-effect order. Stops at a reading, at an
// initial state, or at an injected message; those have no further story.
std::vector<std::string> narrative_chain(const ProvGraph& g, const std::string& terminus) {
    std::vector<std::string> rev;  // effect -> cause; flipped before returning
    std::set<std::string> seen;
    std::string cur = terminus;
    for (;;) {
        if (!seen.insert(cur).second) break;
        rev.push_back(cur);
        const ProvNode& n = g.at(cur);
        if (n.type != NodeType::Command && n.type != NodeType::VariableState &&
            n.type != NodeType::Message)
            break;
        std::string scan;
        const ProvNode* best = nullptr;
        for (size_t ei : g.edges_out(cur)) {
            const ProvEdge& e = g.edges[ei];
            if (e.type == EdgeType::WasGeneratedBy) scan = e.dst;
            if (e.type != EdgeType::WasDerivedFrom) continue;
            const ProvNode& cand = g.at(e.dst);
            if (!best || better_source(cand, *best)) best = &cand;
        }
        if (scan.empty()) break;  // init state or injected message
        if (seen.insert(scan).second) rev.push_back(scan);
        if (!best) break;  // rule read nothing; the scan is the whole story
        cur = best->id;
    }
    std::reverse(rev.begin(), rev.end());
    return rev;
}

std::string pick_terminus(const ProvGraph& g, PolicyKind kind,
                          const std::vector<std::string>& original,
                          const std::vector<std::string>& enriched_sorted) {
    switch (kind) {
        case PolicyKind::Guard:
            return original.back();
        case PolicyKind::RangeExcursion:
            return original.back();  // last reading of the excursion run
        case PolicyKind::DuplicateActuation:
        case PolicyKind::ConflictingCommands:
        case PolicyKind::FeatureContention:
        case PolicyKind::Correlation:
        case PolicyKind::SourceBinding: {
            std::string last_cmd;
            for (const auto& id : enriched_sorted)
                if (g.at(id).type == NodeType::Command) last_cmd = id;
            return last_cmd.empty() ? original.back() : last_cmd;
        }
    }
    return original.back();
}

// Policies are parsed against some topology; the graph carries its own. A
// mismatch is an administrator error worth reporting, not a crash.
void guard_fit(const GuardExpr& e, const Topology& topo, const std::string& pid,
               std::vector<std::string>& errs) {
    if (e.kind == GuardExpr::Kind::Leaf) {
        if (!topo.find_sensor(e.sensor))
            errs.push_back("policy \"" + pid + "\": unknown sensor \"" + e.sensor + "\"");
        if (e.origin && !topo.has_attachment(*e.origin))
            errs.push_back("policy \"" + pid + "\": unknown attachment point \"" + *e.origin +
                           "\"");
        return;
    }
    for (const auto& k : e.kids) guard_fit(k, topo, pid, errs);
}

std::vector<std::string> policy_fit_errors(const PolicySpec& p, const Topology& topo) {
    std::vector<std::string> errs;
    auto want_actuator = [&]() {
        const ActuatorSpec* a = topo.find_actuator(p.actuator);
        if (!a) {
            errs.push_back("policy \"" + p.id + "\": unknown actuator \"" + p.actuator + "\"");
            return;
        }
        if (p.guard_command && !a->command_set.admits(*p.guard_command))
            errs.push_back("policy \"" + p.id + "\": command " + p.guard_command->canonical() +
                           " not in the command set of \"" + p.actuator + "\"");
        for (const auto& v : p.conflict_values)
            if (!a->command_set.admits(v))
                errs.push_back("policy \"" + p.id + "\": value " + v.canonical() +
                               " not in the command set of \"" + p.actuator + "\"");
    };
    auto want_sensor = [&](const std::string& s) {
        if (!s.empty() && !topo.find_sensor(s))
            errs.push_back("policy \"" + p.id + "\": unknown sensor \"" + s + "\"");
    };
    switch (p.kind) {
        case PolicyKind::DuplicateActuation:
        case PolicyKind::ConflictingCommands:
            want_actuator();
            break;
        case PolicyKind::Guard:
            want_actuator();
            guard_fit(*p.permit, topo, p.id, errs);
            break;
        case PolicyKind::RangeExcursion:
            want_sensor(p.sensor);
            break;
        case PolicyKind::FeatureContention:
            if (!topo.find_feature(p.feature))
                errs.push_back("policy \"" + p.id + "\": unknown feature \"" + p.feature + "\"");
            break;
        case PolicyKind::Correlation:
            want_sensor(p.corr->trigger_sensor);
            want_sensor(p.corr->corroborate_sensor);
            break;
        case PolicyKind::SourceBinding:
            want_sensor(p.sensor);
            break;
    }
    return errs;
}

void require_micro(const ProvGraph& g, const std::string& what) {
    if (g.level != "micro")
        throw ValidationError(what + " needs a micro-level graph, got \"" + g.level + "\"");
}

std::optional<double> numeric(const SignalValue& v) {
    if (v.type() == SignalType::Float) return v.as_float();
    if (v.type() == SignalType::Int) return static_cast<double>(v.as_int());
    return std::nullopt;
}

struct CmdGroup {
    std::string actuator;
    uint64_t tick = 0;
    std::vector<const ProvNode*> cmds;  // seq order
};

// Same-tick command groups per actuator, actuators in universe order.
std::vector<CmdGroup> same_tick_groups(const ProvGraph& g, size_t least) {
    std::map<std::string, std::map<uint64_t, std::vector<const ProvNode*>>> buckets;
    for (const auto& n : g.nodes)
        if (n.type == NodeType::Command) buckets[n.attr("actuator")][n.tick].push_back(&n);
    std::vector<CmdGroup> out;
    for (const auto& a : g.universe.actuators) {
        auto it = buckets.find(a.id);
        if (it == buckets.end()) continue;
        for (auto& [tick, cmds] : it->second) {
            if (cmds.size() < least) continue;
            std::sort(cmds.begin(), cmds.end(),
                      [](const ProvNode* x, const ProvNode* y) { return x->seq < y->seq; });
            out.push_back(CmdGroup{a.id, tick, cmds});
        }
    }
    return out;
}

ojson q1_duplicates(const ProvGraph& g) {
    ojson groups = ojson::array();
    for (const auto& grp : same_tick_groups(g, 2)) {
        ojson e;
        e["actuator"] = grp.actuator;
        e["tick"] = grp.tick;
        e["count"] = grp.cmds.size();
        ojson ids = ojson::array();
        for (const auto* c : grp.cmds) ids.push_back(c->id);
        e["commands"] = std::move(ids);
        groups.push_back(std::move(e));
    }
    ojson out;
    out["any"] = !groups.empty();
    out["groups"] = std::move(groups);
    return out;
}

ojson q2_classification(const ProvGraph& g) {
    ojson groups = ojson::array();
    for (const auto& grp : same_tick_groups(g, 2)) {
        std::set<std::string> values;
        for (const auto* c : grp.cmds) values.insert(c->value().canonical());
        ojson e;
        e["actuator"] = grp.actuator;
        e["tick"] = grp.tick;
        e["classification"] = values.size() > 1 ? "different" : "same";
        ojson vs = ojson::array();
        for (const auto& v : values) vs.push_back(v);
        e["values"] = std::move(vs);
        ojson ids = ojson::array();
        for (const auto* c : grp.cmds) ids.push_back(c->id);
        e["commands"] = std::move(ids);
        groups.push_back(std::move(e));
    }
    ojson out;
    out["groups"] = std::move(groups);
    return out;
}

bool group_conflicting(const CmdGroup& grp) {
    std::set<std::string> values;
    for (const auto* c : grp.cmds) values.insert(c->value().canonical());
    return values.size() > 1;
}

ojson q3_reasons(const ProvGraph& g) {
    ojson conflicts = ojson::array();
    for (const auto& grp : same_tick_groups(g, 2)) {
        if (!group_conflicting(grp)) continue;
        ojson chains = ojson::array();
        for (const auto* c : grp.cmds) {
            ojson e;
            e["command"] = c->id;
            ojson chain = ojson::array();
            for (const auto& id : narrative_chain(g, c->id)) chain.push_back(id);
            e["chain"] = std::move(chain);
            chains.push_back(std::move(e));
        }
        ojson e;
        e["actuator"] = grp.actuator;
        e["tick"] = grp.tick;
        e["chains"] = std::move(chains);
        conflicts.push_back(std::move(e));
    }
    ojson out;
    out["conflicts"] = std::move(conflicts);
    return out;
}

ojson q4_influencing_sensors(const ProvGraph& g) {
    ojson conflicts = ojson::array();
    for (const auto& grp : same_tick_groups(g, 2)) {
        if (!group_conflicting(grp)) continue;
        std::set<std::string> all;
        ojson cmds = ojson::array();
        for (const auto* c : grp.cmds) {
            ojson e;
            e["command"] = c->id;
            ojson ss = ojson::array();
            for (const auto& s : influencing_sensors(g, c->id)) {
                ss.push_back(s);
                all.insert(s);
            }
            e["sensors"] = std::move(ss);
            cmds.push_back(std::move(e));
        }
        ojson e;
        e["actuator"] = grp.actuator;
        e["tick"] = grp.tick;
        e["commands"] = std::move(cmds);
        ojson u = ojson::array();
        for (const auto& s : all) u.push_back(s);
        e["sensors"] = std::move(u);
        conflicts.push_back(std::move(e));
    }
    ojson out;
    out["conflicts"] = std::move(conflicts);
    return out;
}

ojson q5_range(const ProvGraph& g) {
    ojson sensors = ojson::array();
    bool any = false;
    for (const auto& s : g.universe.sensors) {
        if (!s.normal_range) continue;
        double lo = s.normal_range->first, hi = s.normal_range->second;
        std::vector<const ProvNode*> rs;
        for (const auto& n : g.nodes)
            if (n.type == NodeType::Reading && n.attr("sensor") == s.id) rs.push_back(&n);
        std::sort(rs.begin(), rs.end(), [](const ProvNode* a, const ProvNode* b) {
            if (a->tick != b->tick) return a->tick < b->tick;
            return a->seq < b->seq;
        });
        ojson runs = ojson::array();
        uint64_t total_ticks = 0;
        auto outside = [&](const ProvNode* r) {
            std::optional<double> v = numeric(r->value());
            return v && (*v < lo || *v > hi);
        };
        size_t i = 0;
        while (i < rs.size()) {
            if (!outside(rs[i])) {
                ++i;
                continue;
            }
            size_t j = i + 1;
            while (j < rs.size() && rs[j]->tick == rs[j - 1]->tick + 1 && outside(rs[j])) ++j;
            uint64_t ticks = rs[j - 1]->tick - rs[i]->tick + 1;
            ojson run;
            run["from_tick"] = rs[i]->tick;
            run["to_tick"] = rs[j - 1]->tick;
            run["ticks"] = ticks;
            run["ms"] = ticks * g.meta.ms_per_tick;
            runs.push_back(std::move(run));
            total_ticks += ticks;
            i = j;
        }
        ojson e;
        e["sensor"] = s.id;
        e["lo"] = lo;
        e["hi"] = hi;
        e["count"] = runs.size();
        e["total_ticks"] = total_ticks;
        e["total_ms"] = total_ticks * g.meta.ms_per_tick;
        any = any || !runs.empty();
        e["runs"] = std::move(runs);
        sensors.push_back(std::move(e));
    }
    ojson out;
    out["any"] = any;
    out["sensors"] = std::move(sensors);
    return out;
}

ojson q6_contention(const ProvGraph& g) {
    // feature -> tick -> commands touching it
    std::map<std::string, std::set<std::string>> affecting;
    for (const auto& a : g.universe.actuators)
        for (const auto& f : a.affects) affecting[f].insert(a.id);

    std::map<std::string, std::map<uint64_t, std::vector<const ProvNode*>>> buckets;
    for (const auto& n : g.nodes) {
        if (n.type != NodeType::Command) continue;
        const ActuatorSpec* a = g.universe.find_actuator(n.attr("actuator"));
        if (!a) continue;
        for (const auto& f : a->affects) buckets[f][n.tick].push_back(&n);
    }
    ojson features = ojson::array();
    bool any = false;
    for (const auto& f : g.universe.features) {
        auto it = buckets.find(f.id);
        if (it == buckets.end()) continue;
        for (auto& [tick, cmds] : it->second) {
            if (cmds.size() <= 2) continue;
            std::sort(cmds.begin(), cmds.end(),
                      [](const ProvNode* x, const ProvNode* y) { return x->seq < y->seq; });
            std::set<std::string> actors;
            ojson ids = ojson::array();
            for (const auto* c : cmds) {
                ids.push_back(c->id);
                actors.insert(c->attr("actuator"));
            }
            ojson e;
            e["feature"] = f.id;
            e["tick"] = tick;
            e["count"] = cmds.size();
            e["commands"] = std::move(ids);
            ojson as = ojson::array();
            for (const auto& a : actors) as.push_back(a);
            e["actuators"] = std::move(as);
            features.push_back(std::move(e));
            any = true;
        }
    }
    ojson out;
    out["any"] = any;
    out["groups"] = std::move(features);
    return out;
}

std::vector<std::string> string_array(const json& j, const char* key, const std::string& where) {
    const json& arr = jsonu::require(j, key, where);
    if (!arr.is_array())
        throw ParseError(where + "." + key + ": expected array of strings");
    std::vector<std::string> out;
    for (const auto& v : arr) {
        if (!v.is_string())
            throw ParseError(where + "." + key + ": expected array of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

}  // namespace

ojson answer_question(const ProvGraph& g, const std::string& qid) {
    require_micro(g, "question " + qid);
    if (qid == "q1") return q1_duplicates(g);
    if (qid == "q2") return q2_classification(g);
    if (qid == "q3") return q3_reasons(g);
    if (qid == "q4") return q4_influencing_sensors(g);
    if (qid == "q5") return q5_range(g);
    if (qid == "q6") return q6_contention(g);
    throw NotFoundError("unknown question \"" + qid + "\" (expected q1..q6)");
}

ojson answer_all_questions(const ProvGraph& g) {
    ojson out;
    for (const char* q : {"q1", "q2", "q3", "q4", "q5", "q6"}) out[q] = answer_question(g, q);
    return out;
}

Report detect(const ProvGraph& g, const std::vector<PolicySpec>& policies) {
    require_micro(g, "detect");
    Report r;
    r.meta = g.meta;
    std::vector<PolicySpec> usable;
    for (const auto& p : policies) {
        r.policy_ids.push_back(p.id);
        std::vector<std::string> errs = policy_fit_errors(p, g.universe);
        if (errs.empty()) {
            usable.push_back(p);
        } else {
            r.config_errors.insert(r.config_errors.end(), errs.begin(), errs.end());
        }
    }

    std::map<std::string, size_t> counter;
    for (const auto& v : evaluate_policies(g, usable)) {
        ViolationReport vr;
        vr.policy_id = v.policy_id;
        vr.kind = v.kind;
        vr.tick = v.tick;
        vr.detail = v.detail;
        vr.id = v.policy_id + "#" + std::to_string(++counter[v.policy_id]);

        std::set<std::string> enriched(v.witness.begin(), v.witness.end());
        for (const auto& id : v.witness) {
            if (g.at(id).type != NodeType::Reading) continue;
            for (const auto& d : g.descendants(id))
                if (g.at(d).type == NodeType::Command) enriched.insert(d);
        }
        vr.witness = sorted_ids(g, enriched);

        std::set<std::string> closure;
        for (const auto& id : vr.witness) {
            std::set<std::string> anc = g.ancestors(id);
            closure.insert(anc.begin(), anc.end());
        }
        vr.explanation = sorted_ids(g, closure);

        vr.narrative = narrative_chain(g, pick_terminus(g, v.kind, v.witness, vr.witness));
        r.violations.push_back(std::move(vr));
    }
    r.questions = answer_all_questions(g);
    return r;
}

ojson Report::to_json() const {
    ojson j;
    j["schema"] = kReportSchema;
    j["scenario"] = meta.scenario;
    j["attack"] = meta.attack;
    j["seed"] = meta.seed;
    j["ticks"] = meta.ticks;
    j["ms_per_tick"] = meta.ms_per_tick;
    ojson pol = ojson::array();
    for (const auto& p : policy_ids) pol.push_back(p);
    j["policies"] = std::move(pol);
    ojson errs = ojson::array();
    for (const auto& e : config_errors) errs.push_back(e);
    j["config_errors"] = std::move(errs);
    ojson counts;
    for (const auto& p : policy_ids) counts[p] = 0;
    for (const auto& v : violations) counts[v.policy_id] = counts[v.policy_id].get<uint64_t>() + 1;
    j["counts"] = std::move(counts);
    ojson vs = ojson::array();
    for (const auto& v : violations) {
        ojson e;
        e["id"] = v.id;
        e["policy"] = v.policy_id;
        e["kind"] = to_string(v.kind);
        e["tick"] = v.tick;
        e["detail"] = v.detail;
        ojson w = ojson::array();
        for (const auto& id : v.witness) w.push_back(id);
        e["witness"] = std::move(w);
        ojson x = ojson::array();
        for (const auto& id : v.explanation) x.push_back(id);
        e["explanation"] = std::move(x);
        ojson n = ojson::array();
        for (const auto& id : v.narrative) n.push_back(id);
        e["narrative"] = std::move(n);
        vs.push_back(std::move(e));
    }
    j["violations"] = std::move(vs);
    j["questions"] = questions;
    return j;
}

Report Report::from_json(const json& j) {
    const std::string where = "report";
    jsonu::check_keys(j, where,
                      {"schema", "scenario", "attack", "seed", "ticks", "ms_per_tick", "policies",
                       "config_errors", "counts", "violations", "questions"},
                      {});
    std::string schema = jsonu::require_string(j, "schema", where);
    if (schema != kReportSchema)
        throw ParseError(where + ": unsupported schema \"" + schema + "\"");
    Report r;
    r.meta.scenario = jsonu::require_string(j, "scenario", where);
    r.meta.attack = jsonu::require_string(j, "attack", where);
    r.meta.seed = jsonu::require_uint(j, "seed", where);
    r.meta.ticks = jsonu::require_uint(j, "ticks", where);
    r.meta.ms_per_tick = jsonu::require_uint(j, "ms_per_tick", where);
    r.policy_ids = string_array(j, "policies", where);
    r.config_errors = string_array(j, "config_errors", where);

    std::map<std::string, uint64_t> counts;
    const json& cj = jsonu::require(j, "counts", where);
    if (!cj.is_object()) throw ParseError(where + ".counts: expected object");
    for (auto it = cj.begin(); it != cj.end(); ++it) {
        if (!it.value().is_number_unsigned())
            throw ParseError(where + ".counts: expected unsigned counts");
        counts[it.key()] = it.value().get<uint64_t>();
    }

    const json& vs = jsonu::require(j, "violations", where);
    if (!vs.is_array()) throw ParseError(where + ".violations: expected array");
    std::map<std::string, uint64_t> seen;
    size_t i = 0;
    for (const auto& vj : vs) {
        std::string vw = where + ".violations[" + std::to_string(i++) + "]";
        jsonu::check_keys(vj, vw,
                          {"id", "policy", "kind", "tick", "detail", "witness", "explanation",
                           "narrative"},
                          {});
        ViolationReport v;
        v.id = jsonu::require_string(vj, "id", vw);
        v.policy_id = jsonu::require_string(vj, "policy", vw);
        v.kind = policy_kind_from_string(jsonu::require_string(vj, "kind", vw), vw + ".kind");
        v.tick = jsonu::require_uint(vj, "tick", vw);
        v.detail = jsonu::require_string(vj, "detail", vw);
        v.witness = string_array(vj, "witness", vw);
        v.explanation = string_array(vj, "explanation", vw);
        v.narrative = string_array(vj, "narrative", vw);
        ++seen[v.policy_id];
        r.violations.push_back(std::move(v));
    }
    for (const auto& [pid, n] : seen) {
        auto it = counts.find(pid);
        if (it == counts.end() || it->second != n)
            throw ParseError(where + ".counts: inconsistent with the violations list for \"" +
                             pid + "\"");
    }
    r.questions = ojson::parse(jsonu::require(j, "questions", where).dump());
    return r;
}

std::string report_to_text(const Report& r) {
    std::ostringstream os;
    os << "scenario \"" << r.meta.scenario << "\" attack \"" << r.meta.attack << "\" seed "
       << r.meta.seed << " ticks " << r.meta.ticks << " (" << r.meta.ms_per_tick
       << " ms/tick)\n";
    os << r.policy_ids.size() << " policies, " << r.violations.size() << " violation(s)";
    if (!r.config_errors.empty()) os << ", " << r.config_errors.size() << " config error(s)";
    os << "\n";
    for (const auto& e : r.config_errors) os << "config error: " << e << "\n";
    for (const auto& v : r.violations) {
        os << "\n[" << v.id << "] " << to_string(v.kind) << " at tick " << v.tick << "\n";
        os << "  " << v.detail << "\n";
        os << "  witness:\n";
        for (const auto& id : v.witness) os << "    " << id << "\n";
        os << "  cause chain:\n";
        bool first = true;
        for (const auto& id : v.narrative) {
            os << (first ? "    " : "    -> ") << id << "\n";
            first = false;
        }
    }
    return os.str();
}

std::string violation_dot(const ProvGraph& g, const ViolationReport& v) {
    std::set<std::string> keep(v.explanation.begin(), v.explanation.end());
    std::set<std::string> mark(v.witness.begin(), v.witness.end());
    return g.to_dot(&keep, &mark);
}

void write_report_file(const Report& r, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path + " for writing");
    os << r.to_json().dump(2) << "\n";
    if (!os) throw Error("short write to " + path);
}

Report read_report_file(const std::string& path) {
    return Report::from_json(jsonu::load_document(path));
}

}  // namespace plcprov
