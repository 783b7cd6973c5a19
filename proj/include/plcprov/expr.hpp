#pragma once

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "plcprov/core.hpp"
#include "plcprov/errors.hpp"

namespace plcprov {

// Raised when a well-typed expression faults at runtime (overflow, non-finite
// result). The owning scan converts it into a fault record.
class EvalFault : public Error {
public:
    using Error::Error;
};

enum class ExprOp {
    Const,
    Var,
    Tick,
    Received,  // bool: message arrived on channel this tick
    Payload,   // payload of the arrived message, or a fallback value
    Not,
    And,
    Or,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Immutable, type-annotated expression node. Enum constants carry a
// singleton state set; comparisons require one side's set to contain the
// other's, which pins literals to declared states.
struct Expr {
    ExprOp op = ExprOp::Const;
    ValueType type;
    SignalValue literal;       // Const value, or Payload fallback
    std::string name;          // Var name, or channel id for Received/Payload
    std::vector<ExprPtr> kids;
};

// Static name resolution for parsing. Both callbacks return nullptr for
// unknown names; channel lookups only see channels delivering to this PLC.
struct TypeContext {
    std::function<const ValueType*(const std::string&)> var_type;
    std::function<const ValueType*(const std::string&)> channel_payload;
};

// Runtime inputs of one evaluation. `inbox` holds at most one payload per
// channel for the current tick.
struct EvalContext {
    uint64_t tick = 0;
    const std::map<std::string, SignalValue>* vars = nullptr;
    const std::map<std::string, SignalValue>* inbox = nullptr;
};

// Parse and typecheck in one pass; all violations are ParseErrors carrying
// `where` locations.
ExprPtr parse_expr(const json& j, const TypeContext& ctx, const std::string& where);

SignalValue eval_expr(const Expr& e, const EvalContext& ctx);

// Accumulates every variable and channel the expression can read.
void collect_reads(const Expr& e, std::set<std::string>& vars, std::set<std::string>& channels);

ojson expr_to_json(const Expr& e);

// True when a value of type `from` may be assigned into a slot of type `to`.
// Kinds must match exactly; enum assignment requires from's states to be a
// subset of to's.
bool assignable(const ValueType& from, const ValueType& to);

}  // namespace plcprov
