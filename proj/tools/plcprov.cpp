// plcprov: simulate a control loop, build its causal graph, check policies,
// and explain what fired. Exit codes: 0 clean, 1 violations found, 2 bad
// input or usage.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "plcprov/detect.hpp"
#include "plcprov/scenario.hpp"

using namespace plcprov;

namespace {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
    static LogLevel lvl = [] {
        const char* env = std::getenv("PLCPROV_LOG");
        std::string s = env ? env : "error";
        if (s == "debug") return LogLevel::Debug;
        if (s == "info") return LogLevel::Info;
        return LogLevel::Error;
    }();
    return lvl;
}

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::Info) std::cerr << "info: " << msg << "\n";
}

void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::Debug) std::cerr << "debug: " << msg << "\n";
}

// "-" means stdout.
void emit(const std::string& out, const std::string& content) {
    if (out.empty() || out == "-") {
        std::cout << content;
        return;
    }
    std::ofstream os(out, std::ios::binary);
    if (!os) throw Error("cannot open " + out + " for writing");
    os << content;
    if (!os) throw Error("short write to " + out);
    log_debug("wrote " + out + " (" + std::to_string(content.size()) + " bytes)");
}

ProvGraph load_graph(const std::string& path) {
    ProvGraph g = ProvGraph::from_json(jsonu::load_document(path));
    log_debug("graph " + path + ": " + std::to_string(g.nodes.size()) + " nodes, " +
              std::to_string(g.edges.size()) + " edges");
    return g;
}

ProvGraph micro_graph_from_trace(const std::string& path) {
    TraceLog log = read_trace_file(path);
    log_debug("trace " + path + ": " + std::to_string(log.records.size()) + " records");
    return build_graph(log);
}

struct CommonOverrides {
    CLI::Option* seed_opt = nullptr;
    CLI::Option* ticks_opt = nullptr;
    CLI::Option* ms_opt = nullptr;
    uint64_t seed = 0, ticks = 0, ms = 0;

    void attach(CLI::App* cmd) {
        seed_opt = cmd->add_option("--seed", seed, "RNG seed (default: bundle manifest)");
        ticks_opt = cmd->add_option("--ticks", ticks, "ticks to run (default: bundle manifest)");
        ms_opt = cmd->add_option("--ms-per-tick", ms,
                                 "milliseconds per tick (default: bundle manifest)");
    }
    uint64_t pick_seed(const ScenarioBundle& b) const {
        return seed_opt->count() ? seed : b.default_seed;
    }
    uint64_t pick_ticks(const ScenarioBundle& b) const {
        return ticks_opt->count() ? ticks : b.default_ticks;
    }
    uint64_t pick_ms(const ScenarioBundle& b) const {
        return ms_opt->count() ? ms : b.default_ms_per_tick;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic control-loop simulator with causal tracing and policy checks"};
    app.require_subcommand(1);
    int rc = 0;

    // simulate
    auto* sim = app.add_subcommand("simulate", "run a scenario and write its event trace");
    std::string sim_scenario, sim_attack = "none", sim_out;
    CommonOverrides sim_ov;
    sim->add_option("--scenario", sim_scenario, "scenario bundle directory")->required();
    sim->add_option("--attack", sim_attack, "attack script name (default: none)");
    sim_ov.attach(sim);
    sim->add_option("--out", sim_out, "trace output path, - for stdout")->required();
    sim->callback([&] {
        ScenarioBundle b = load_scenario(sim_scenario);
        log_info("scenario \"" + b.name + "\": " + std::to_string(b.attacks.size()) +
                 " attack scripts, " + std::to_string(b.policies.size()) + " policies");
        SimConfig cfg;
        cfg.seed = sim_ov.pick_seed(b);
        cfg.ticks = sim_ov.pick_ticks(b);
        cfg.ms_per_tick = sim_ov.pick_ms(b);
        cfg.scenario = b.name;
        TraceLog log = run_simulation(b.topology, b.programs, b.plant, b.attack(sim_attack), cfg);
        log_info("simulated " + std::to_string(cfg.ticks) + " ticks, " +
                 std::to_string(log.records.size()) + " records");
        if (sim_out.empty() || sim_out == "-") {
            write_trace(log, std::cout);
        } else {
            write_trace_file(log, sim_out);
        }
    });

    // build
    auto* build = app.add_subcommand("build", "turn a trace into a causal graph");
    std::string build_trace, build_out, build_level = "micro", build_format = "json";
    build->add_option("--trace", build_trace, "trace file")->required();
    build->add_option("--level", build_level, "graph level")
        ->check(CLI::IsMember({"micro", "macro"}));
    build->add_option("--format", build_format, "output format")
        ->check(CLI::IsMember({"json", "dot"}));
    build->add_option("--out", build_out, "graph output path, - for stdout")->required();
    build->callback([&] {
        ProvGraph g = micro_graph_from_trace(build_trace);
        if (build_level == "macro") g = build_macro(g).graph;
        log_info("built " + build_level + " graph: " + std::to_string(g.nodes.size()) +
                 " nodes, " + std::to_string(g.edges.size()) + " edges");
        emit(build_out, build_format == "dot" ? g.to_dot() : g.to_json().dump(2) + "\n");
    });

    // check
    auto* check = app.add_subcommand("check", "evaluate policies and report violations");
    std::string check_trace, check_graph, check_policies, check_out, check_format = "json";
    auto* ct = check->add_option("--trace", check_trace, "trace file (micro graph is built)");
    auto* cg = check->add_option("--graph", check_graph, "prebuilt micro graph file");
    ct->excludes(cg);
    check->add_option("--policies", check_policies, "policy file")->required();
    check->add_option("--out", check_out, "report output path, - for stdout");
    check->add_option("--format", check_format, "report format")
        ->check(CLI::IsMember({"json", "text"}));
    check->callback([&] {
        if (check_trace.empty() == check_graph.empty())
            throw Error("check needs exactly one of --trace or --graph");
        ProvGraph g = check_trace.empty() ? load_graph(check_graph)
                                          : micro_graph_from_trace(check_trace);
        std::vector<PolicySpec> policies =
            load_policies(jsonu::load_document(check_policies), g.universe);
        Report r = detect(g, policies);
        log_info(std::to_string(r.violations.size()) + " violation(s) across " +
                 std::to_string(policies.size()) + " policies");
        emit(check_out, check_format == "text" ? report_to_text(r) : r.to_json().dump(2) + "\n");
        if (!r.violations.empty()) rc = 1;
    });

    // export
    auto* exp = app.add_subcommand("export", "render a stored graph");
    std::string exp_graph, exp_out, exp_format = "dot";
    exp->add_option("--graph", exp_graph, "graph file")->required();
    exp->add_option("--format", exp_format, "output format")
        ->check(CLI::IsMember({"dot", "json"}));
    exp->add_option("--out", exp_out, "output path, - for stdout");
    exp->callback([&] {
        ProvGraph g = load_graph(exp_graph);
        emit(exp_out, exp_format == "json" ? g.to_json().dump(2) + "\n" : g.to_dot());
    });

    // query
    auto* query = app.add_subcommand("query", "answer one of the standing questions q1..q6");
    std::string query_graph, query_q, query_out;
    query->add_option("--graph", query_graph, "micro graph file")->required();
    query->add_option("--question", query_q, "question id")
        ->required()
        ->check(CLI::IsMember({"q1", "q2", "q3", "q4", "q5", "q6"}));
    query->add_option("--out", query_out, "output path, - for stdout");
    query->callback([&] {
        ProvGraph g = load_graph(query_graph);
        emit(query_out, answer_question(g, query_q).dump(2) + "\n");
    });

    // explain
    auto* explain = app.add_subcommand("explain", "show the causal story behind one violation");
    std::string expl_report, expl_id, expl_graph, expl_out, expl_format = "text";
    explain->add_option("--report", expl_report, "report file")->required();
    explain->add_option("--violation", expl_id, "violation id, e.g. unlock_guard#1")->required();
    explain->add_option("--graph", expl_graph, "graph file (needed for --format dot)");
    explain->add_option("--format", expl_format, "output format")
        ->check(CLI::IsMember({"text", "dot"}));
    explain->add_option("--out", expl_out, "output path, - for stdout");
    explain->callback([&] {
        Report r = read_report_file(expl_report);
        const ViolationReport* found = nullptr;
        for (const auto& v : r.violations)
            if (v.id == expl_id) found = &v;
        if (!found) throw NotFoundError("no violation \"" + expl_id + "\" in " + expl_report);
        if (expl_format == "dot") {
            if (expl_graph.empty()) throw Error("--format dot needs --graph");
            emit(expl_out, violation_dot(load_graph(expl_graph), *found));
            return;
        }
        std::ostringstream os;
        os << "[" << found->id << "] " << to_string(found->kind) << " at tick " << found->tick
           << "\n  " << found->detail << "\n  cause chain:\n";
        bool first = true;
        for (const auto& id : found->narrative) {
            os << (first ? "    " : "    -> ") << id << "\n";
            first = false;
        }
        emit(expl_out, os.str());
    });

    // run
    auto* run = app.add_subcommand("run", "run manifest cases end to end and diff the findings");
    std::string run_scenario, run_case_name, run_outdir;
    CommonOverrides run_ov;
    run->add_option("--scenario", run_scenario, "scenario bundle directory")->required();
    run->add_option("--case", run_case_name, "run only this manifest case");
    run_ov.attach(run);
    run->add_option("--out-dir", run_outdir, "write trace/graph/report per case here");
    run->callback([&] {
        ScenarioBundle b = load_scenario(run_scenario);
        bool all_ok = true;
        bool ran_any = false;
        for (const auto& c : b.cases) {
            if (!run_case_name.empty() && c.attack != run_case_name) continue;
            ran_any = true;
            CaseOutcome out = run_case(b, c.attack, run_ov.pick_seed(b), run_ov.pick_ticks(b),
                                       run_ov.pick_ms(b));
            if (!run_outdir.empty()) {
                std::string base = run_outdir + "/" + c.attack;
                write_trace_file(out.trace, base + ".trace.jsonl");
                emit(base + ".graph.json", out.graph.to_json().dump(2) + "\n");
                emit(base + ".report.json", out.report.to_json().dump(2) + "\n");
            }
            bool ok = out.counts == c.expect;
            all_ok = all_ok && ok;
            std::cout << "case " << c.attack << ": "
                      << (ok ? "ok" : "MISMATCH") << " (" << out.report.violations.size()
                      << " violation(s))\n";
            if (!ok) {
                auto fmt = [](const std::map<std::string, uint64_t>& m) {
                    std::string s = "{";
                    bool first = true;
                    for (const auto& [k, v] : m) {
                        if (!first) s += ", ";
                        s += k + ": " + std::to_string(v);
                        first = false;
                    }
                    return s + "}";
                };
                std::cout << "  expected " << fmt(c.expect) << "\n  got      "
                          << fmt(out.counts) << "\n";
            }
        }
        if (!ran_any) throw NotFoundError("no manifest case named \"" + run_case_name + "\"");
        if (!all_ok) rc = 1;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}
