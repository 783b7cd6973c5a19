#include "plcprov/scenario.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include "plcprov/errors.hpp"
#include "plcprov/prov.hpp"

namespace fs = std::filesystem;

namespace plcprov {

const AttackScript& ScenarioBundle::attack(const std::string& name) const {
    auto it = attacks.find(name);
    if (it == attacks.end())
        throw NotFoundError("scenario \"" + this->name + "\" has no attack \"" + name + "\"");
    return it->second;
}

ScenarioBundle load_scenario(const std::string& dir) {
    fs::path root(dir);
    if (!fs::is_directory(root)) throw NotFoundError("scenario directory not found: " + dir);

    ScenarioBundle b;
    b.dir = root.string();
    b.topology = Topology::from_json(jsonu::load_document((root / "topology.json").string()));
    std::vector<ConfigError> errs = validate_topology(b.topology);
    if (!errs.empty()) {
        std::string msg = "topology.json invalid:";
        for (const auto& e : errs) msg += "\n  " + e.element + ": " + e.message;
        throw ValidationError(msg);
    }
    b.programs = load_programs(jsonu::load_document((root / "programs.json").string()), b.topology);
    b.plant = PlantParams::from_json(jsonu::load_document((root / "plant.json").string()),
                                     b.topology);
    b.policies = load_policies(jsonu::load_document((root / "policies.json").string()),
                               b.topology);

    fs::path attacks_dir = root / "attacks";
    if (fs::is_directory(attacks_dir)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(attacks_dir))
            if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            std::string stem = f.stem().string();
            try {
                b.attacks[stem] = AttackScript::from_json(jsonu::load_document(f.string()),
                                                          b.topology);
            } catch (const Error& e) {
                throw ValidationError("attacks/" + f.filename().string() + ": " + e.what());
            }
        }
    }

    json mj = jsonu::load_document((root / "manifest.json").string());
    jsonu::check_keys(mj, "manifest", {"scenario", "defaults", "cases"}, {});
    b.name = jsonu::require_string(mj, "scenario", "manifest");
    const json& dj = jsonu::require(mj, "defaults", "manifest");
    jsonu::check_keys(dj, "manifest.defaults", {"seed", "ticks", "ms_per_tick"}, {});
    b.default_seed = jsonu::require_uint(dj, "seed", "manifest.defaults");
    b.default_ticks = jsonu::require_uint(dj, "ticks", "manifest.defaults");
    b.default_ms_per_tick = jsonu::require_uint(dj, "ms_per_tick", "manifest.defaults");

    std::set<std::string> policy_ids;
    for (const auto& p : b.policies) policy_ids.insert(p.id);

    const json& cases = jsonu::require(mj, "cases", "manifest");
    if (!cases.is_array()) throw ParseError("manifest.cases: expected array");
    std::set<std::string> seen;
    size_t i = 0;
    for (const auto& cj : cases) {
        std::string w = "manifest.cases[" + std::to_string(i++) + "]";
        jsonu::check_keys(cj, w, {"attack", "expect"}, {});
        ExpectedCase c;
        c.attack = jsonu::require_string(cj, "attack", w);
        if (!b.attacks.count(c.attack))
            throw ValidationError(w + ": no attacks/" + c.attack + ".json in the bundle");
        if (!seen.insert(c.attack).second)
            throw ValidationError(w + ": duplicate case \"" + c.attack + "\"");
        const json& ej = jsonu::require(cj, "expect", w);
        if (!ej.is_object()) throw ParseError(w + ".expect: expected object");
        for (auto it = ej.begin(); it != ej.end(); ++it) {
            if (!policy_ids.count(it.key()))
                throw ValidationError(w + ".expect: unknown policy \"" + it.key() + "\"");
            if (!it.value().is_number_unsigned() || it.value().get<uint64_t>() == 0)
                throw ParseError(w + ".expect." + it.key() + ": expected positive count");
            c.expect[it.key()] = it.value().get<uint64_t>();
        }
        b.cases.push_back(std::move(c));
    }
    return b;
}

CaseOutcome run_case(const ScenarioBundle& b, const std::string& attack, uint64_t seed,
                     uint64_t ticks, uint64_t ms_per_tick) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.ticks = ticks;
    cfg.ms_per_tick = ms_per_tick;
    cfg.scenario = b.name;
    CaseOutcome out;
    out.trace = run_simulation(b.topology, b.programs, b.plant, b.attack(attack), cfg);
    out.graph = build_graph(out.trace);
    out.report = detect(out.graph, b.policies);
    for (const auto& v : out.report.violations) ++out.counts[v.policy_id];
    return out;
}

}  // namespace plcprov
