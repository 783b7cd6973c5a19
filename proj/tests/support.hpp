#pragma once

// Shared test machinery: tiny world builders, independent oracles, and a
// seeded random-world generator. Everything here recomputes expected results
// from the raw JSON definitions or the raw edge list, on purpose: the suites
// compare the engine against these second implementations.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "plcprov/attack.hpp"
#include "plcprov/core.hpp"
#include "plcprov/detect.hpp"
#include "plcprov/logic.hpp"
#include "plcprov/plant.hpp"
#include "plcprov/policy.hpp"
#include "plcprov/prov.hpp"
#include "plcprov/sim.hpp"
#include "plcprov/trace.hpp"

namespace tsup {

using plcprov::json;
using plcprov::ojson;

// Parses a JSON literal; ParseError carries the snippet on failure.
json J(const std::string& text);

// Everything one closed-loop case needs, kept both as raw JSON (for the
// oracles) and as parsed engine structures.
struct World {
    json topo_j, progs_j, plant_j, attack_j, policies_j;
    plcprov::Topology topo;
    std::vector<plcprov::PlcProgram> programs;
    plcprov::PlantParams plant;
    plcprov::AttackScript attack;
    std::vector<plcprov::PolicySpec> policies;
    plcprov::SimConfig cfg;
};

// Parses and typechecks all five documents; throws on any rejection and
// asserts the topology validates cleanly.
World load_world(json topo_j, json progs_j, json plant_j, json attack_j, json policies_j,
                 plcprov::SimConfig cfg);

// ---------------------------------------------------------------------------
// Timestamp oracle: the same product carried out in 128-bit arithmetic.

bool ts_in_domain(uint64_t tick, uint64_t ms_per_tick);
uint64_t ts_wide(uint64_t tick, uint64_t ms_per_tick);  // requires ts_in_domain

// ---------------------------------------------------------------------------
// Plant oracle: closed form of the first-order relaxation
// x_{t+1} = x_t + rate * (target - x_t).

double relax_closed_form(double x0, double target, double rate, uint64_t steps);

// ---------------------------------------------------------------------------
// Scan-loop oracle. Interprets the raw program JSON over the trace's own
// readings and operator inputs, recomputing every delivery, scan, state
// change, fault and command with its own little evaluator over plain json
// values. Returns one projected row per expected record; compare against
// project_behaviour(trace) of the same trace.

std::vector<ojson> naive_behaviour(const json& topo_j, const json& progs_j, const json& attack_j,
                                   const plcprov::TraceLog& trace);
std::vector<ojson> project_behaviour(const plcprov::TraceLog& trace);

// First index where the two row lists disagree, or -1; for failure messages.
long long first_mismatch(const std::vector<ojson>& a, const std::vector<ojson>& b);

// ---------------------------------------------------------------------------
// Reachability oracle: plain BFS over the stored edge list, no adjacency
// index shared with ProvGraph. forward follows src->dst (into the past).

std::set<std::string> bfs_closure(const plcprov::ProvGraph& g, const std::string& start,
                                  bool forward);

// ---------------------------------------------------------------------------
// Policy oracle. Re-derives every violation from the trace records (command
// and reading events keyed back to actuators and sensors through the
// topology tables); only guard evidence walks the graph, via bfs_closure.
// Rows are (policy_id, tick, witness) and must equal evaluate_policies.

struct OracleViolation {
    std::string policy_id;
    uint64_t tick = 0;
    std::vector<std::string> witness;

    bool operator==(const OracleViolation& o) const {
        return policy_id == o.policy_id && tick == o.tick && witness == o.witness;
    }
};

std::vector<OracleViolation> oracle_violations(const plcprov::TraceLog& trace,
                                               const plcprov::ProvGraph& g,
                                               const std::vector<plcprov::PolicySpec>& policies);

// ---------------------------------------------------------------------------
// Graph structure checks. Each returns an empty string when the property
// holds, else a description of the first offence.

std::string check_edge_typing(const plcprov::ProvGraph& g);
std::string check_acyclic(const plcprov::ProvGraph& g);
std::string check_edge_time_order(const plcprov::ProvGraph& g);  // dst.tick <= src.tick
std::string check_lineage_complete(const plcprov::ProvGraph& g);  // commands reach a reading
std::string check_macro_sound(const plcprov::ProvGraph& micro, size_t sample_edges,
                              uint64_t sample_seed);

// ---------------------------------------------------------------------------
// Random world generator. Worlds stay small (<= 5 PLCs, <= 10 sensors,
// <= 10 actuators) and every PLC carries at least one sensor-fed input, so
// command lineage is never vacuous. All documents come out as JSON and go
// through the real parsers.

struct GenLimits {
    uint64_t ticks_min = 20;
    uint64_t ticks_max = 80;
    bool with_attack = true;
    bool with_policies = true;
};

World random_world(uint64_t seed, const GenLimits& lim = {});

}  // namespace tsup
