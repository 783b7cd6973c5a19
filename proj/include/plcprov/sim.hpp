#pragma once

#include <string>
#include <vector>

#include "plcprov/attack.hpp"
#include "plcprov/logic.hpp"
#include "plcprov/plant.hpp"
#include "plcprov/trace.hpp"

namespace plcprov {

struct SimConfig {
    uint64_t seed = 1;
    uint64_t ticks = 100;
    uint64_t ms_per_tick = 100;
    std::string scenario = "adhoc";
};

// Runs the closed loop for config.ticks ticks and returns the full trace.
// Within each tick the phases run in a fixed order:
//   1. scripted environment changes take effect
//   2. sensors sample the plant
//   3. the script tampers with readings and injects traffic
//   4. messages and operator inputs are delivered, readings reach inputs
//   5. every PLC scans (topology order)
//   6. changed outputs publish actuator commands on the bus
//   7. the plant steps to the next tick
// Identical inputs produce a byte-identical trace.
TraceLog run_simulation(const Topology& topo, const std::vector<PlcProgram>& programs,
                        const PlantParams& plant, const AttackScript& attack,
                        const SimConfig& config);

}  // namespace plcprov
