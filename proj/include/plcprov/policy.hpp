#pragma once

#include <optional>
#include <string>
#include <vector>

#include "plcprov/prov.hpp"

namespace plcprov {

enum class PolicyKind {
    DuplicateActuation,
    ConflictingCommands,
    RangeExcursion,
    FeatureContention,
    Guard,
    Correlation,
    SourceBinding
};

std::string to_string(PolicyKind k);
PolicyKind policy_kind_from_string(const std::string& s, const std::string& where);

// Check on a single value. Ordering operators require int or float readings.
struct Predicate {
    enum class Op { Eq, Ne, Lt, Le, Gt, Ge, In };
    Op op = Op::Eq;
    std::vector<SignalValue> args;  // one value, or the membership set for In

    bool holds(const SignalValue& v) const;
    std::string describe() const;

    ojson to_json() const;
    static Predicate parse(const json& j, const ValueType& domain, const std::string& where);
};

// Authorization evidence a guarded command must have among its ancestor
// readings. Deliberately negation-free: adding readings can only help.
struct GuardExpr {
    enum class Kind { Any, All, Leaf };
    Kind kind = Kind::Leaf;
    std::vector<GuardExpr> kids;  // Any/All
    // Leaf: a qualifying reading of this sensor must exist.
    std::string sensor;
    std::optional<Predicate> predicate;
    std::optional<std::string> origin;  // required provenance of the reading

    ojson to_json() const;
};

struct CorrelationSpec {
    std::string trigger_sensor;
    Predicate trigger;
    std::string corroborate_sensor;
    double rise = 0.0;  // required increase of the corroborating signal
};

struct PolicySpec {
    std::string id;
    PolicyKind kind = PolicyKind::DuplicateActuation;
    std::string description;

    std::string actuator;  // duplicate / conflicting / guard
    uint64_t window = 1;
    std::vector<SignalValue> conflict_values;  // optional: this exact clash

    std::string sensor;  // range; source binding (empty: every sensor)
    double lo = 0.0, hi = 0.0;
    uint64_t min_duration = 1;

    std::string feature;  // contention
    uint64_t max_actuators = 1;

    std::optional<SignalValue> guard_command;
    std::optional<GuardExpr> permit;

    std::optional<CorrelationSpec> corr;

    ojson to_json() const;
};

// One policy hit. The witness lists the graph nodes that constitute the
// violation, in (tick, seq) order.
struct PolicyViolation {
    std::string policy_id;
    PolicyKind kind = PolicyKind::DuplicateActuation;
    uint64_t tick = 0;
    std::vector<std::string> witness;
    std::string detail;
};

// Parses {"policies": [...]} against the topology; every reference and every
// literal is checked here so evaluation cannot hit a type error.
std::vector<PolicySpec> load_policies(const json& j, const Topology& topo);

ojson policies_to_json(const std::vector<PolicySpec>& policies);

// Evaluates every policy over the causal graph. Violations come back grouped
// by policy (declaration order), ordered by (tick, witness) inside a policy.
std::vector<PolicyViolation> evaluate_policies(const ProvGraph& g,
                                               const std::vector<PolicySpec>& policies);

}  // namespace plcprov
