#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "plcprov/core.hpp"

namespace plcprov {

inline constexpr const char* kTraceSchema = "plcprov-trace/1";

// Phases of one tick, in execution order. Records carry the phase they were
// produced in; within a tick the sequence number is the total order.
//   sample   legitimate sensor readings
//   attack   tampered readings (forged or replayed)
//   deliver  messages and operator inputs arriving at controllers
//   scan     controller execution: scans, state changes, faults
//   publish  actuator commands going out on the bus
enum class Phase { Sample, Attack, Deliver, Scan, Publish };

std::string to_string(Phase p);
Phase phase_from_string(const std::string& s, const std::string& where);

enum class RecordKind { Reading, OperatorInput, Message, Scan, State, Fault, Command };

std::string to_string(RecordKind k);
RecordKind record_kind_from_string(const std::string& s, const std::string& where);

struct VarField {
    std::string name;
    Direction dir = Direction::In;
    std::optional<std::string> line;  // physical input terminal, readings only
};

// One event on the wire. Exactly one kind per record; which fields are
// meaningful depends on the kind (see docs/formats.md).
struct TraceRecord {
    uint64_t tick = 0;
    uint64_t ms = 0;
    Phase phase = Phase::Sample;
    RecordKind kind = RecordKind::Reading;
    uint64_t seq = 0;  // position within the tick, dense from 0

    std::string plc;                   // reading/operator_input/scan/state/fault/command
    std::optional<VarField> var;       // reading/operator_input/state/command
    std::optional<SignalValue> value;  // reading/operator_input/state/command/message
    std::string origin;                // reading/operator_input/message: attachment point

    // scan
    std::vector<std::string> fired;
    std::vector<std::string> read_vars, read_channels;

    // state/command: rule that produced the value, plus the entities the rule
    // read (resolved into graph edges later)
    std::string rule;
    std::vector<std::string> from_vars, from_channels;

    // message
    std::string channel, from_plc, to_plc;
    std::optional<uint64_t> sent_tick;  // absent for injected traffic

    // fault
    std::string detail;

    ojson to_json() const;
    static TraceRecord from_json(const json& j, const std::string& where);
};

struct TraceHeader {
    std::string schema = kTraceSchema;
    uint64_t seed = 0;
    std::string scenario;
    std::string attack;  // script name, "none" when clean
    uint64_t ms_per_tick = 100;
    uint64_t ticks = 0;
    Topology universe;

    ojson to_json() const;
    static TraceHeader from_json(const json& j);
};

struct TraceLog {
    TraceHeader header;
    std::vector<TraceRecord> records;  // ordered by (tick, seq)
};

void write_trace(const TraceLog& log, std::ostream& os);
void write_trace_file(const TraceLog& log, const std::string& path);
TraceLog read_trace(std::istream& is, const std::string& name);
TraceLog read_trace_file(const std::string& path);

}  // namespace plcprov
