#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "plcprov/core.hpp"
#include "plcprov/expr.hpp"

namespace plcprov {

enum class ActionKind { Set, Send };

struct ActionSpec {
    ActionKind kind = ActionKind::Set;
    std::string target;  // variable name, or outbound channel id
    ExprPtr value;
};

// One ladder rung: when the condition holds the actions run in order.
struct RuleSpec {
    std::string id;
    ExprPtr condition;
    std::vector<ActionSpec> actions;
    // Static read sets; cond_* are evaluated every scan, act_* only on fire.
    std::set<std::string> cond_vars, cond_channels;
    std::set<std::string> act_vars, act_channels;

    std::set<std::string> read_vars() const;      // cond + act
    std::set<std::string> read_channels() const;  // cond + act
};

// A PLC's control program plus the full variable environment it runs in.
// In/Out declarations are copied from the topology; internal variables are
// owned here and never appear on the bus.
struct PlcProgram {
    std::string plc_id;
    std::vector<VariableDecl> variables;  // In + Out + Internal, lookup order
    std::vector<RuleSpec> rules;
    std::vector<std::string> in_channels;   // channels delivering to this PLC
    std::vector<std::string> out_channels;  // channels this PLC may send on

    const VariableDecl* find_variable(const std::string& name) const;
    // Initial working state: declared initials, else type defaults.
    std::map<std::string, SignalValue> initial_state() const;
};

struct ScanInput {
    uint64_t tick = 0;
    std::map<std::string, SignalValue> vars;   // working state at tick start
    std::map<std::string, SignalValue> inbox;  // channel -> payload arrived this tick
};

struct WriteEvent {
    std::string rule_id;
    std::string var;
    SignalValue value;
};

struct SendEvent {
    std::string rule_id;
    std::string channel;
    SignalValue value;
};

struct ScanResult {
    std::map<std::string, SignalValue> vars;  // working state after the scan
    std::vector<WriteEvent> writes;           // every write, in execution order
    std::vector<SendEvent> sends;             // every send, in execution order
    std::vector<std::string> fired;           // rules whose condition held
    // Everything the scan evaluated: all conditions, plus actions of fired
    // rules. Drives both the trace record and downstream lineage.
    std::set<std::string> read_vars, read_channels;
    std::optional<std::string> fault;  // first runtime fault; outputs cleared
};

// Pure scan-cycle step. Rules run in order against the working state, so a
// later rule observes an earlier rule's writes within the same scan. On a
// fault the scan stops and every Out variable resets to its initial value.
ScanResult scan(const PlcProgram& prog, const ScanInput& in);

// Parses {"programs": [...]} and typechecks every program against the
// topology. PLCs without a program get an empty one, so every PLC scans.
std::vector<PlcProgram> load_programs(const json& j, const Topology& topo);

ojson programs_to_json(const std::vector<PlcProgram>& progs);

}  // namespace plcprov
