#include "plcprov/sim.hpp"

#include <algorithm>

#include "plcprov/errors.hpp"

namespace plcprov {

namespace {

struct PendingMessage {
    std::string channel, from, to, origin;
    SignalValue value;
    std::optional<uint64_t> sent_tick;  // absent for injected traffic
    bool injected = false;
    // What the sending rule read; lets the graph trace a payload to its
    // sources. Empty for injected traffic.
    std::vector<std::string> read_vars, read_channels;
};

struct PendingReading {
    const SensorSpec* sensor;
    SignalValue value;
    std::string origin;
    bool tampered = false;
};

}  // namespace

TraceLog run_simulation(const Topology& topo, const std::vector<PlcProgram>& programs,
                        const PlantParams& plant, const AttackScript& attack,
                        const SimConfig& config) {
    {
        std::vector<ConfigError> errs = validate_topology(topo);
        if (!errs.empty())
            throw ValidationError("run_simulation: invalid topology: " + errs.front().message);
        if (config.ticks == 0) throw ValidationError("run_simulation: ticks must be positive");
        if (attack.horizon() >= config.ticks)
            throw ValidationError("run_simulation: script touches tick " +
                                  std::to_string(attack.horizon()) + " beyond horizon " +
                                  std::to_string(config.ticks));
        // Probe the timestamp domain up front so the loop cannot fault late.
        (void)timestamp_ms({config.ticks - 1, config.ms_per_tick});
    }

    TraceLog log;
    log.header.seed = config.seed;
    log.header.scenario = config.scenario;
    log.header.attack = attack.id;
    log.header.ms_per_tick = config.ms_per_tick;
    log.header.ticks = config.ticks;
    log.header.universe = topo;

    std::map<std::string, const PlcProgram*> programs_by_plc;
    for (const auto& p : programs) programs_by_plc[p.plc_id] = &p;
    for (const auto& plc : topo.plcs)
        if (!programs_by_plc.count(plc.id))
            throw ValidationError("run_simulation: no program for plc \"" + plc.id + "\"");

    PlantState world = PlantState::initial(topo, plant);
    std::map<std::string, std::map<std::string, SignalValue>> plc_state;
    for (const auto& plc : topo.plcs)
        plc_state[plc.id] = programs_by_plc.at(plc.id)->initial_state();

    // Readings actually delivered, kept for replay scripts.
    std::map<std::string, std::map<uint64_t, SignalValue>> delivered_history;
    std::map<uint64_t, std::vector<PendingMessage>> mail;  // arrival tick -> traffic

    for (uint64_t t = 0; t < config.ticks; ++t) {
        uint64_t seq = 0;
        uint64_t ms = timestamp_ms({t, config.ms_per_tick});
        auto emit = [&](TraceRecord r) {
            r.tick = t;
            r.ms = ms;
            r.seq = seq++;
            log.records.push_back(std::move(r));
        };

        // 1. Scripted environment changes.
        for (const auto& s : attack.env_sets)
            if (s.tick == t) world.features[s.feature] = s.value;
        std::vector<EnvDriveState> drives;
        for (const auto& d : attack.env_drives)
            if (d.from_tick <= t && t <= d.to_tick) drives.push_back({d.feature, d.target});

        // 2. Sample sensors.
        std::vector<PendingReading> readings;
        for (const auto& s : topo.sensors)
            readings.push_back(
                {&s, sample_sensor(plant, topo, world, s, config.seed, t), s.origin_point, false});

        // 3. Tamper. Later script entries win on the same sensor.
        for (const auto& f : attack.forge) {
            if (t < f.from_tick || t > f.to_tick) continue;
            for (auto& r : readings)
                if (r.sensor->id == f.sensor) {
                    r.value = f.value;
                    r.origin = f.origin;
                    r.tampered = true;
                }
        }
        for (const auto& rp : attack.replay) {
            uint64_t len = rp.record_to - rp.record_from + 1;
            if (t < rp.replay_at || t >= rp.replay_at + len) continue;
            uint64_t src = rp.record_from + (t - rp.replay_at);
            for (auto& r : readings)
                if (r.sensor->id == rp.sensor) {
                    r.value = delivered_history.at(rp.sensor).at(src);
                    r.origin = rp.origin;
                    r.tampered = true;
                }
        }
        for (const auto& m : attack.inject)
            if (m.tick == t) {
                const ChannelSpec* c = topo.find_channel(m.channel);
                mail[t + 1].push_back(
                    {c->id, c->from_plc, c->to_plc, m.origin, m.value, std::nullopt, true, {}, {}});
            }

        // Emit readings, genuine ones first, and latch them into PLC inputs.
        for (int tampered = 0; tampered < 2; ++tampered) {
            for (const auto& r : readings) {
                if (r.tampered != bool(tampered)) continue;
                const VariableDecl* decl = topo.find_variable(r.sensor->attaches_to);
                TraceRecord rec;
                rec.phase = tampered ? Phase::Attack : Phase::Sample;
                rec.kind = RecordKind::Reading;
                rec.plc = r.sensor->attaches_to.plc_id;
                rec.var = VarField{r.sensor->attaches_to.name, Direction::In, decl->input_line};
                rec.value = r.value;
                rec.origin = r.origin;
                emit(std::move(rec));
                plc_state[r.sensor->attaches_to.plc_id][r.sensor->attaches_to.name] = r.value;
                delivered_history[r.sensor->id][t] = r.value;
            }
        }

        // 4. Deliver traffic; on a collision the injected message wins the wire.
        std::map<std::string, SignalValue> arrived;  // channel -> payload
        {
            std::vector<PendingMessage> due;
            auto it = mail.find(t);
            if (it != mail.end()) due = std::move(it->second);
            mail.erase(t);
            std::map<std::string, const PendingMessage*> winner;
            for (const auto& m : due) {
                auto w = winner.find(m.channel);
                if (w == winner.end() || m.injected || !w->second->injected)
                    winner[m.channel] = &m;  // later entries win within a class
            }
            // Re-walk in channel declaration order for a stable record order.
            for (const auto& c : topo.channels) {
                auto w = winner.find(c.id);
                if (w == winner.end()) continue;
                const PendingMessage& m = *w->second;
                TraceRecord rec;
                rec.phase = Phase::Deliver;
                rec.kind = RecordKind::Message;
                rec.channel = m.channel;
                rec.from_plc = m.from;
                rec.to_plc = m.to;
                rec.value = m.value;
                rec.origin = m.origin;
                rec.sent_tick = m.sent_tick;
                rec.from_vars = m.read_vars;
                rec.from_channels = m.read_channels;
                emit(std::move(rec));
                arrived[m.channel] = m.value;
            }
        }
        for (const auto& o : attack.operator_inputs) {
            if (o.tick != t) continue;
            const VariableDecl* decl = topo.find_variable(o.target);
            TraceRecord rec;
            rec.phase = Phase::Deliver;
            rec.kind = RecordKind::OperatorInput;
            rec.plc = o.target.plc_id;
            rec.var = VarField{o.target.name, Direction::In, decl->input_line};
            rec.value = o.value;
            rec.origin = o.origin;
            emit(std::move(rec));
            plc_state[o.target.plc_id][o.target.name] = o.value;
        }

        // 5. Scan every controller.
        std::map<std::string, ScanResult> results;
        for (const auto& plc : topo.plcs) {
            const PlcProgram& prog = *programs_by_plc.at(plc.id);
            ScanInput in;
            in.tick = t;
            in.vars = plc_state.at(plc.id);
            for (const auto& ch : prog.in_channels) {
                auto it = arrived.find(ch);
                if (it != arrived.end()) in.inbox.emplace(ch, it->second);
            }
            ScanResult res = scan(prog, in);

            TraceRecord rec;
            rec.phase = Phase::Scan;
            rec.kind = RecordKind::Scan;
            rec.plc = plc.id;
            rec.fired = res.fired;
            rec.read_vars.assign(res.read_vars.begin(), res.read_vars.end());
            rec.read_channels.assign(res.read_channels.begin(), res.read_channels.end());
            emit(std::move(rec));

            // State records for net changes, in declaration order.
            for (const auto& decl : prog.variables) {
                if (decl.dir == Direction::In) continue;
                const SignalValue& before = in.vars.at(decl.name);
                const SignalValue& after = res.vars.at(decl.name);
                if (before == after) continue;
                std::string rule = "(fault)";
                std::vector<std::string> fv, fc;
                for (auto it2 = res.writes.rbegin(); it2 != res.writes.rend(); ++it2) {
                    if (it2->var != decl.name) continue;
                    if (it2->value != after) break;  // fault reset overrode this write
                    rule = it2->rule_id;
                    for (const auto& rr : prog.rules)
                        if (rr.id == rule) {
                            auto rv = rr.read_vars();
                            auto rc = rr.read_channels();
                            fv.assign(rv.begin(), rv.end());
                            fc.assign(rc.begin(), rc.end());
                        }
                    break;
                }
                TraceRecord st;
                st.phase = Phase::Scan;
                st.kind = RecordKind::State;
                st.plc = plc.id;
                st.var = VarField{decl.name, decl.dir, std::nullopt};
                st.value = after;
                st.rule = rule;
                st.from_vars = std::move(fv);
                st.from_channels = std::move(fc);
                emit(std::move(st));
            }

            if (res.fault) {
                TraceRecord f;
                f.phase = Phase::Scan;
                f.kind = RecordKind::Fault;
                f.plc = plc.id;
                f.detail = *res.fault;
                emit(std::move(f));
            }

            plc_state[plc.id] = res.vars;
            results.emplace(plc.id, std::move(res));
        }

        // Faulted controllers transmit nothing this cycle.
        for (const auto& plc : topo.plcs) {
            const ScanResult& res = results.at(plc.id);
            if (res.fault) continue;
            const PlcProgram& prog = *programs_by_plc.at(plc.id);
            for (const auto& s : res.sends) {
                const ChannelSpec* c = topo.find_channel(s.channel);
                PendingMessage m{c->id,   c->from_plc, c->to_plc, plc.attachment_point,
                                 s.value, t,           false,     {},
                                 {}};
                for (const auto& rr : prog.rules)
                    if (rr.id == s.rule_id) {
                        auto rv = rr.read_vars();
                        auto rc = rr.read_channels();
                        m.read_vars.assign(rv.begin(), rv.end());
                        m.read_channels.assign(rc.begin(), rc.end());
                    }
                mail[t + 1].push_back(std::move(m));
            }
        }

        // 6. Publish commands: every write that differs from what the actuator
        // held at tick start goes on the bus; a faulted controller instead
        // publishes its reset outputs.
        for (const auto& act : topo.actuators) {
            const std::string& plc_id = act.attaches_to.plc_id;
            const ScanResult& res = results.at(plc_id);
            const PlcProgram& prog = *programs_by_plc.at(plc_id);
            const SignalValue held = world.held.at(act.id);
            bool wrote = false;
            if (!res.fault) {
                for (const auto& w : res.writes) {
                    if (w.var != act.attaches_to.name) continue;
                    wrote = true;
                    if (w.value == held) continue;
                    TraceRecord cmd;
                    cmd.phase = Phase::Publish;
                    cmd.kind = RecordKind::Command;
                    cmd.plc = plc_id;
                    cmd.var = VarField{act.attaches_to.name, Direction::Out, std::nullopt};
                    cmd.value = w.value;
                    cmd.rule = w.rule_id;
                    for (const auto& rr : prog.rules)
                        if (rr.id == w.rule_id) {
                            auto rv = rr.read_vars();
                            auto rc = rr.read_channels();
                            cmd.from_vars.assign(rv.begin(), rv.end());
                            cmd.from_channels.assign(rc.begin(), rc.end());
                        }
                    emit(std::move(cmd));
                }
            } else {
                const SignalValue& reset = res.vars.at(act.attaches_to.name);
                if (reset != held) {
                    wrote = true;
                    TraceRecord cmd;
                    cmd.phase = Phase::Publish;
                    cmd.kind = RecordKind::Command;
                    cmd.plc = plc_id;
                    cmd.var = VarField{act.attaches_to.name, Direction::Out, std::nullopt};
                    cmd.value = reset;
                    cmd.rule = "(fault)";
                    emit(std::move(cmd));
                }
            }
            if (wrote) world.held[act.id] = res.vars.at(act.attaches_to.name);
        }

        // 7. Plant dynamics.
        step_plant(plant, topo, drives, world);
    }
    return log;
}

}  // namespace plcprov
