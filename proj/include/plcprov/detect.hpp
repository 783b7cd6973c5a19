#pragma once

#include <string>
#include <vector>

#include "plcprov/policy.hpp"
#include "plcprov/prov.hpp"

namespace plcprov {

inline constexpr const char* kReportSchema = "plcprov-report/1";

// One confirmed finding, ready for an administrator to read.
//
// witness     the nodes the policy condition matched, widened so that a
//             matched reading also drags in the commands it fed
// explanation every node the witness transitively depends on (ancestor
//             closure, reflexive), sorted by (tick, seq, id)
// narrative   a single cause-to-effect chain from the earliest reading that
//             explains the finding down to its terminal node
struct ViolationReport {
    std::string id;  // "<policy_id>#<n>", n counts from 1 per policy
    std::string policy_id;
    PolicyKind kind = PolicyKind::DuplicateActuation;
    uint64_t tick = 0;
    std::string detail;
    std::vector<std::string> witness;
    std::vector<std::string> explanation;
    std::vector<std::string> narrative;
};

struct Report {
    GraphMeta meta;
    std::vector<std::string> policy_ids;       // declaration order
    std::vector<std::string> config_errors;    // policies that did not fit the universe
    std::vector<ViolationReport> violations;
    ojson questions;  // answers q1..q6, see answer_question

    ojson to_json() const;
    static Report from_json(const json& j);
};

// Runs every policy over the graph and assembles the full report. Policies
// that reference sensors, actuators or features missing from the graph's
// universe are skipped and listed under config_errors instead of evaluated.
Report detect(const ProvGraph& g, const std::vector<PolicySpec>& policies);

// Structured answer for one of the six standing questions:
//   q1  actuators that received more than one command at the same tick
//   q2  same/different classification of each such command group
//   q3  causal chains behind each conflicting ("different") group
//   q4  sensors whose readings influenced each conflicting command
//   q5  readings outside each sensor's declared normal range: counts, runs
//       and how long each run lasted
//   q6  ticks where more than two commands touched one environment feature
// Throws NotFoundError for an unknown question id.
ojson answer_question(const ProvGraph& g, const std::string& qid);

// All six, keyed "q1".."q6".
ojson answer_all_questions(const ProvGraph& g);

// Plain-text rendering of a report, one block per violation.
std::string report_to_text(const Report& r);

// Dot subgraph for one finding: the explanation closure with the witness
// nodes highlighted.
std::string violation_dot(const ProvGraph& g, const ViolationReport& v);

// Read/write helpers shared by the CLI; strict on schema and keys.
void write_report_file(const Report& r, const std::string& path);
Report read_report_file(const std::string& path);

}  // namespace plcprov
