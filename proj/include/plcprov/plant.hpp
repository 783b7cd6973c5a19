#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "plcprov/core.hpp"

namespace plcprov {

// Coupling from a held actuator command to one feature. Active while the
// held command equals `when`. A continuous feature approaches `drive`; a
// discrete feature switches to `set` instantly.
struct ActuatorEffect {
    std::string actuator;
    SignalValue when;
    std::string feature;
    std::optional<double> drive;
    std::optional<SignalValue> set;
};

struct PlantParams {
    double alpha = 0.1;  // approach rate toward the mean of active drive targets
    double decay = 0.0;  // approach rate toward ambient when nothing drives
    std::map<std::string, double> ambient;        // continuous feature -> rest level
    std::vector<ActuatorEffect> effects;          // declaration order breaks discrete ties
    std::map<std::string, double> noise;          // sensor -> gaussian sigma
    std::map<std::string, SignalValue> initial_commands;  // actuator -> held at start

    ojson to_json() const;
    static PlantParams from_json(const json& j, const Topology& topo);
};

// Mutable world state between ticks.
struct PlantState {
    std::map<std::string, SignalValue> features;
    std::map<std::string, SignalValue> held;  // last bus command per actuator

    static PlantState initial(const Topology& topo, const PlantParams& params);
};

// Externally scripted pressure on one continuous feature; while active it
// overrides every actuator drive on that feature.
struct EnvDriveState {
    std::string feature;
    double target = 0.0;
};

// One first-order step:
//   driven:  x += alpha * (mean(targets) - x)
//   idle:    x += decay * (ambient - x)      (held where no ambient exists)
// Discrete features take the last active effect in declaration order and
// otherwise keep their state.
void step_plant(const PlantParams& params, const Topology& topo,
                const std::vector<EnvDriveState>& env_drives, PlantState& state);

// What a sensor reports at `tick`: the measured feature's value, plus
// configured gaussian noise for float readings. Pure in (seed, sensor, tick).
SignalValue sample_sensor(const PlantParams& params, const Topology& topo,
                          const PlantState& state, const SensorSpec& sensor, uint64_t seed,
                          uint64_t tick);

}  // namespace plcprov
