#pragma once

#include <map>
#include <string>
#include <vector>

#include "plcprov/detect.hpp"
#include "plcprov/plant.hpp"
#include "plcprov/policy.hpp"
#include "plcprov/sim.hpp"

namespace plcprov {

// One manifest entry: an attack script plus the findings a pinned-seed run
// of it must produce, as policy id -> violation count. Policies absent from
// the map must stay silent.
struct ExpectedCase {
    std::string attack;
    std::map<std::string, uint64_t> expect;
};

// A scenario directory loaded and cross-validated:
//   topology.json  programs.json  plant.json  policies.json  manifest.json
//   attacks/<name>.json
struct ScenarioBundle {
    std::string name;
    std::string dir;
    Topology topology;
    std::vector<PlcProgram> programs;
    PlantParams plant;
    std::vector<PolicySpec> policies;
    std::map<std::string, AttackScript> attacks;  // keyed by file stem

    uint64_t default_seed = 1;
    uint64_t default_ticks = 200;
    uint64_t default_ms_per_tick = 100;
    std::vector<ExpectedCase> cases;

    const AttackScript& attack(const std::string& name) const;  // throws NotFoundError
};

// Loads and validates the whole bundle; any inconsistency (bad topology,
// programs that do not typecheck, unknown attack in the manifest, expected
// policy ids that are not declared) throws.
ScenarioBundle load_scenario(const std::string& dir);

// simulate -> graph -> detect for one attack of the bundle.
struct CaseOutcome {
    TraceLog trace;
    ProvGraph graph;
    Report report;
    std::map<std::string, uint64_t> counts;  // only policies that fired
};
CaseOutcome run_case(const ScenarioBundle& b, const std::string& attack, uint64_t seed,
                     uint64_t ticks, uint64_t ms_per_tick);

}  // namespace plcprov
