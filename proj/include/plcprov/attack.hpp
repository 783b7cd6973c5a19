#pragma once

#include <string>
#include <vector>

#include "plcprov/core.hpp"

namespace plcprov {

// Replaces a sensor's delivered reading with a fixed value during
// [from_tick, to_tick], marked as coming from `origin`.
struct ForgeSensor {
    std::string sensor;
    uint64_t from_tick = 0, to_tick = 0;
    SignalValue value;
    std::string origin;
};

// Puts a spoofed message on a channel; like real traffic it arrives one tick
// after `tick`.
struct InjectMessage {
    std::string channel;
    uint64_t tick = 0;
    SignalValue value;
    std::string origin;
};

// Re-delivers a sensor's previously seen readings: the values observed during
// [record_from, record_to] replace the live readings starting at replay_at.
struct ReplayWindow {
    std::string sensor;
    uint64_t record_from = 0, record_to = 0;
    uint64_t replay_at = 0;
    std::string origin;
};

// Scripted physical stimulus: set a discrete feature, or pull a continuous
// one toward a target during a tick range (overrides actuator drives).
struct EnvSet {
    std::string feature;
    uint64_t tick = 0;
    SignalValue value;
};

struct EnvDrive {
    std::string feature;
    uint64_t from_tick = 0, to_tick = 0;
    double target = 0.0;
};

// A person at a console writing one input variable.
struct OperatorInput {
    VarKey target;
    uint64_t tick = 0;
    SignalValue value;
    std::string origin;
};

// Everything scripted on top of the closed loop for one run. "Attack" by
// name; the same mechanism also stages drills and operator activity.
struct AttackScript {
    std::string id;
    std::vector<ForgeSensor> forge;
    std::vector<InjectMessage> inject;
    std::vector<ReplayWindow> replay;
    std::vector<EnvSet> env_sets;
    std::vector<EnvDrive> env_drives;
    std::vector<OperatorInput> operator_inputs;

    // Latest tick any entry touches; runs must cover it.
    uint64_t horizon() const;

    ojson to_json() const;
    static AttackScript from_json(const json& j, const Topology& topo);
};

}  // namespace plcprov
