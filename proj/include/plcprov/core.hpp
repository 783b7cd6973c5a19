#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "plcprov/json_util.hpp"

namespace plcprov {

// ---------------------------------------------------------------------------
// Time

struct Timestamp {
    uint64_t tick = 0;
    uint64_t ms_per_tick = 100;
};

// Checked domain: tick < 2^40 and ms_per_tick <= 10^4, which keeps the
// product far below 2^64. Outside that domain -> BoundsError.
inline constexpr uint64_t kMaxTick = 1ull << 40;
inline constexpr uint64_t kMaxMsPerTick = 10000;

uint64_t timestamp_ms(const Timestamp& ts);

// ---------------------------------------------------------------------------
// Values

enum class SignalType { Bool, Int, Float, Enum };

std::string to_string(SignalType t);

// Tagged value carried by sensors, commands and messages. Float payloads are
// always finite; enum payloads are state names whose set lives in the
// declaration, not the value.
class SignalValue {
public:
    SignalValue() : v_(false) {}

    static SignalValue of_bool(bool b) { return SignalValue(b); }
    static SignalValue of_int(int64_t i) { return SignalValue(i); }
    static SignalValue of_float(double d);  // throws BoundsError on NaN/inf
    static SignalValue of_enum(std::string state) { return SignalValue(std::move(state)); }

    SignalType type() const;
    bool as_bool() const;
    int64_t as_int() const;
    double as_float() const;
    const std::string& as_enum() const;

    bool operator==(const SignalValue& o) const { return v_ == o.v_; }
    bool operator!=(const SignalValue& o) const { return !(*this == o); }
    bool operator<(const SignalValue& o) const;

    // Compact display/keying form: "true", "42", "21.5", "raise".
    std::string canonical() const;

    // JSON scalar: bool -> bool, int -> integer, float -> float, enum -> string.
    // The writer/parser pair preserves the tag (21.0 stays Float, 21 stays Int).
    ojson to_json() const;
    static SignalValue from_json(const json& j, const std::string& where);

private:
    explicit SignalValue(bool b) : v_(b) {}
    explicit SignalValue(int64_t i) : v_(i) {}
    explicit SignalValue(double d) : v_(d) {}
    explicit SignalValue(std::string s) : v_(std::move(s)) {}

    std::variant<bool, int64_t, double, std::string> v_;
};

// Declared value domain of a variable, feature or channel payload.
struct ValueType {
    SignalType kind = SignalType::Bool;
    std::vector<std::string> enum_values;  // non-empty iff kind == Enum

    static ValueType boolean() { return {SignalType::Bool, {}}; }
    static ValueType integer() { return {SignalType::Int, {}}; }
    static ValueType real() { return {SignalType::Float, {}}; }
    static ValueType enumeration(std::vector<std::string> vals) {
        return {SignalType::Enum, std::move(vals)};
    }

    bool admits(const SignalValue& v) const;
    bool same_as(const ValueType& o) const;  // enum sets compared as sets
    SignalValue default_value() const;
    std::string describe() const;

    // Parse a scalar against this declared type. Integer literals are
    // accepted for Float fields; everything else must match exactly.
    SignalValue parse_value(const json& j, const std::string& where) const;

    ojson to_json() const;
    static ValueType from_json(const json& j, const std::string& where);
};

// ---------------------------------------------------------------------------
// Topology

enum class Direction { In, Out, Internal };

std::string to_string(Direction d);
Direction direction_from_string(const std::string& s, const std::string& where);

// Key of a PLC variable; (plc_id, name) is unique system-wide.
struct VarKey {
    std::string plc_id;
    std::string name;

    bool operator==(const VarKey& o) const { return plc_id == o.plc_id && name == o.name; }
    bool operator<(const VarKey& o) const {
        return plc_id != o.plc_id ? plc_id < o.plc_id : name < o.name;
    }
    std::string str() const { return plc_id + "." + name; }
};

struct VariableRef {
    VarKey key;
    Direction direction = Direction::In;
    std::optional<std::string> input_line;  // physical terminal, In vars bound to sensors
};

// In/Out variables a PLC exposes on the bus. Internal variables are declared
// by the program that owns them, not here.
struct VariableDecl {
    std::string name;
    Direction dir = Direction::In;
    ValueType type;
    std::optional<std::string> input_line;
    std::optional<SignalValue> initial;
};

struct PlcSpec {
    std::string id;
    std::string attachment_point;  // network location of this PLC's cabinet
    std::vector<VariableDecl> variables;
};

struct SensorSpec {
    std::string id;
    std::string measures;  // feature id
    VarKey attaches_to;    // In variable receiving the readings
    std::optional<std::pair<double, double>> normal_range;  // inclusive [lo, hi]
    std::string unit;
    std::string origin_point;  // attachment point readings legitimately come from
};

struct ActuatorSpec {
    std::string id;
    std::vector<std::string> affects;  // feature ids, non-empty
    VarKey attaches_to;                // Out variable carrying the commands
    ValueType command_set;
};

enum class FeatureKind { Continuous, Discrete };

// Physical quantity the plant tracks. Float-typed features evolve
// continuously; every other type switches between discrete states.
struct EnvironmentFeature {
    std::string id;
    ValueType type;
    std::string unit;
    SignalValue initial_value;

    FeatureKind kind() const {
        return type.kind == SignalType::Float ? FeatureKind::Continuous : FeatureKind::Discrete;
    }
};

struct ChannelSpec {
    std::string id;
    std::string from_plc;
    std::string to_plc;
    ValueType payload_type;
};

struct Topology {
    std::vector<PlcSpec> plcs;
    std::vector<SensorSpec> sensors;
    std::vector<ActuatorSpec> actuators;
    std::vector<EnvironmentFeature> features;
    std::vector<ChannelSpec> channels;
    std::vector<std::string> attachment_points;

    const PlcSpec* find_plc(const std::string& id) const;
    const VariableDecl* find_variable(const VarKey& key) const;
    const SensorSpec* find_sensor(const std::string& id) const;
    const ActuatorSpec* find_actuator(const std::string& id) const;
    const EnvironmentFeature* find_feature(const std::string& id) const;
    const ChannelSpec* find_channel(const std::string& id) const;
    bool has_attachment(const std::string& id) const;
    const SensorSpec* sensor_on_variable(const VarKey& key) const;
    const ActuatorSpec* actuator_on_variable(const VarKey& key) const;

    ojson to_json() const;
    static Topology from_json(const json& j);
};

// One violated configuration rule; validate_topology returns these instead
// of throwing so callers can show everything at once.
struct ConfigError {
    std::string element;  // offending element id or path
    std::string rule;     // short rule name, stable for tests
    std::string message;

    bool operator<(const ConfigError& o) const {
        if (element != o.element) return element < o.element;
        if (rule != o.rule) return rule < o.rule;
        return message < o.message;
    }
    bool operator==(const ConfigError& o) const {
        return element == o.element && rule == o.rule && message == o.message;
    }
};

// Full cross-reference walk of a topology document. Empty result means every
// invariant holds. Output is sorted, so it is independent of declaration order.
std::vector<ConfigError> validate_topology(const Topology& t);

}  // namespace plcprov
