#include "plcprov/expr.hpp"

#include <algorithm>
#include <cmath>

namespace plcprov {

bool assignable(const ValueType& from, const ValueType& to) {
    if (from.kind != to.kind) return false;
    if (from.kind != SignalType::Enum) return true;
    for (const auto& s : from.enum_values)
        if (std::find(to.enum_values.begin(), to.enum_values.end(), s) == to.enum_values.end())
            return false;
    return true;
}

namespace {

// Two operand types may be compared when kinds match and, for enums, one
// state set contains the other (covers literal-vs-variable both ways).
bool comparable(const ValueType& a, const ValueType& b) {
    return assignable(a, b) || assignable(b, a);
}

const char* op_key(ExprOp op) {
    switch (op) {
        case ExprOp::Const: return "const";
        case ExprOp::Var: return "var";
        case ExprOp::Tick: return "tick";
        case ExprOp::Received: return "received";
        case ExprOp::Payload: return "payload";
        case ExprOp::Not: return "not";
        case ExprOp::And: return "and";
        case ExprOp::Or: return "or";
        case ExprOp::Eq: return "eq";
        case ExprOp::Ne: return "ne";
        case ExprOp::Lt: return "lt";
        case ExprOp::Le: return "le";
        case ExprOp::Gt: return "gt";
        case ExprOp::Ge: return "ge";
        case ExprOp::Add: return "add";
        case ExprOp::Sub: return "sub";
        case ExprOp::Mul: return "mul";
    }
    return "?";
}

ExprPtr parse_pair(ExprOp op, const json& args, const TypeContext& ctx, const std::string& where);

ExprPtr parse_nary_bool(ExprOp op, const json& args, const TypeContext& ctx,
                        const std::string& where) {
    if (!args.is_array() || args.empty())
        throw ParseError(where + ": \"" + op_key(op) + "\" takes a non-empty operand array");
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->type = ValueType::boolean();
    size_t i = 0;
    for (const auto& a : args) {
        ExprPtr k = parse_expr(a, ctx, where + "." + op_key(op) + "[" + std::to_string(i++) + "]");
        if (k->type.kind != SignalType::Bool)
            throw ParseError(where + ": \"" + op_key(op) + "\" operands must be bool, got " +
                             k->type.describe());
        e->kids.push_back(std::move(k));
    }
    return e;
}

ExprPtr parse_pair(ExprOp op, const json& args, const TypeContext& ctx, const std::string& where) {
    if (!args.is_array() || args.size() != 2)
        throw ParseError(where + ": \"" + std::string(op_key(op)) + "\" takes exactly [a, b]");
    auto e = std::make_shared<Expr>();
    e->op = op;
    std::string w = where + "." + op_key(op);
    e->kids.push_back(parse_expr(args[0], ctx, w + "[0]"));
    e->kids.push_back(parse_expr(args[1], ctx, w + "[1]"));
    const ValueType& ta = e->kids[0]->type;
    const ValueType& tb = e->kids[1]->type;
    switch (op) {
        case ExprOp::Eq:
        case ExprOp::Ne:
            if (!comparable(ta, tb))
                throw ParseError(w + ": cannot compare " + ta.describe() + " with " +
                                 tb.describe());
            e->type = ValueType::boolean();
            break;
        case ExprOp::Lt:
        case ExprOp::Le:
        case ExprOp::Gt:
        case ExprOp::Ge:
            if (ta.kind != tb.kind ||
                (ta.kind != SignalType::Int && ta.kind != SignalType::Float))
                throw ParseError(w + ": ordering needs two ints or two floats, got " +
                                 ta.describe() + " and " + tb.describe());
            e->type = ValueType::boolean();
            break;
        case ExprOp::Add:
        case ExprOp::Sub:
        case ExprOp::Mul:
            if (ta.kind != tb.kind ||
                (ta.kind != SignalType::Int && ta.kind != SignalType::Float))
                throw ParseError(w + ": arithmetic needs two ints or two floats, got " +
                                 ta.describe() + " and " + tb.describe());
            e->type = ta.kind == SignalType::Int ? ValueType::integer() : ValueType::real();
            break;
        default:
            throw ParseError(w + ": internal op mismatch");
    }
    return e;
}

}  // namespace

ExprPtr parse_expr(const json& j, const TypeContext& ctx, const std::string& where) {
    if (!j.is_object() || j.size() != 1)
        throw ParseError(where + ": expression must be an object with exactly one operator key");
    const std::string key = j.begin().key();
    const json& arg = j.begin().value();

    auto e = std::make_shared<Expr>();
    if (key == "const") {
        e->op = ExprOp::Const;
        e->literal = SignalValue::from_json(arg, where + ".const");
        switch (e->literal.type()) {
            case SignalType::Bool: e->type = ValueType::boolean(); break;
            case SignalType::Int: e->type = ValueType::integer(); break;
            case SignalType::Float: e->type = ValueType::real(); break;
            case SignalType::Enum:
                e->type = ValueType::enumeration({e->literal.as_enum()});
                break;
        }
        return e;
    }
    if (key == "var") {
        if (!arg.is_string()) throw ParseError(where + ".var: expected variable name");
        e->op = ExprOp::Var;
        e->name = arg.get<std::string>();
        const ValueType* t = ctx.var_type(e->name);
        if (!t) throw ParseError(where + ".var: unknown variable \"" + e->name + "\"");
        e->type = *t;
        return e;
    }
    if (key == "tick") {
        if (!arg.is_object() || !arg.empty())
            throw ParseError(where + ".tick: takes an empty object");
        e->op = ExprOp::Tick;
        e->type = ValueType::integer();
        return e;
    }
    if (key == "received") {
        if (!arg.is_string()) throw ParseError(where + ".received: expected channel id");
        e->op = ExprOp::Received;
        e->name = arg.get<std::string>();
        if (!ctx.channel_payload(e->name))
            throw ParseError(where + ".received: no inbound channel \"" + e->name + "\"");
        e->type = ValueType::boolean();
        return e;
    }
    if (key == "payload") {
        std::string w = where + ".payload";
        jsonu::check_keys(arg, w, {"channel", "default"}, {});
        e->op = ExprOp::Payload;
        e->name = jsonu::require_string(arg, "channel", w);
        const ValueType* t = ctx.channel_payload(e->name);
        if (!t) throw ParseError(w + ": no inbound channel \"" + e->name + "\"");
        e->type = *t;
        e->literal = t->parse_value(arg.at("default"), w + ".default");
        return e;
    }
    if (key == "not") {
        e->op = ExprOp::Not;
        e->kids.push_back(parse_expr(arg, ctx, where + ".not"));
        if (e->kids[0]->type.kind != SignalType::Bool)
            throw ParseError(where + ".not: operand must be bool, got " +
                             e->kids[0]->type.describe());
        e->type = ValueType::boolean();
        return e;
    }
    if (key == "and") return parse_nary_bool(ExprOp::And, arg, ctx, where);
    if (key == "or") return parse_nary_bool(ExprOp::Or, arg, ctx, where);
    if (key == "eq") return parse_pair(ExprOp::Eq, arg, ctx, where);
    if (key == "ne") return parse_pair(ExprOp::Ne, arg, ctx, where);
    if (key == "lt") return parse_pair(ExprOp::Lt, arg, ctx, where);
    if (key == "le") return parse_pair(ExprOp::Le, arg, ctx, where);
    if (key == "gt") return parse_pair(ExprOp::Gt, arg, ctx, where);
    if (key == "ge") return parse_pair(ExprOp::Ge, arg, ctx, where);
    if (key == "add") return parse_pair(ExprOp::Add, arg, ctx, where);
    if (key == "sub") return parse_pair(ExprOp::Sub, arg, ctx, where);
    if (key == "mul") return parse_pair(ExprOp::Mul, arg, ctx, where);
    throw ParseError(where + ": unknown operator \"" + key + "\"");
}

SignalValue eval_expr(const Expr& e, const EvalContext& ctx) {
    switch (e.op) {
        case ExprOp::Const:
            return e.literal;
        case ExprOp::Var: {
            auto it = ctx.vars->find(e.name);
            if (it == ctx.vars->end())
                throw EvalFault("read of unbound variable \"" + e.name + "\"");
            return it->second;
        }
        case ExprOp::Tick: {
            if (ctx.tick > uint64_t(INT64_MAX))
                throw EvalFault("tick does not fit a signed integer");
            return SignalValue::of_int(int64_t(ctx.tick));
        }
        case ExprOp::Received:
            return SignalValue::of_bool(ctx.inbox && ctx.inbox->count(e.name) > 0);
        case ExprOp::Payload: {
            if (ctx.inbox) {
                auto it = ctx.inbox->find(e.name);
                if (it != ctx.inbox->end()) return it->second;
            }
            return e.literal;
        }
        case ExprOp::Not:
            return SignalValue::of_bool(!eval_expr(*e.kids[0], ctx).as_bool());
        case ExprOp::And: {
            for (const auto& k : e.kids)
                if (!eval_expr(*k, ctx).as_bool()) return SignalValue::of_bool(false);
            return SignalValue::of_bool(true);
        }
        case ExprOp::Or: {
            for (const auto& k : e.kids)
                if (eval_expr(*k, ctx).as_bool()) return SignalValue::of_bool(true);
            return SignalValue::of_bool(false);
        }
        case ExprOp::Eq:
        case ExprOp::Ne: {
            SignalValue a = eval_expr(*e.kids[0], ctx);
            SignalValue b = eval_expr(*e.kids[1], ctx);
            bool eq = a == b;
            return SignalValue::of_bool(e.op == ExprOp::Eq ? eq : !eq);
        }
        case ExprOp::Lt:
        case ExprOp::Le:
        case ExprOp::Gt:
        case ExprOp::Ge: {
            SignalValue a = eval_expr(*e.kids[0], ctx);
            SignalValue b = eval_expr(*e.kids[1], ctx);
            int cmp;
            if (a.type() == SignalType::Int) {
                int64_t x = a.as_int(), y = b.as_int();
                cmp = x < y ? -1 : x > y ? 1 : 0;
            } else {
                double x = a.as_float(), y = b.as_float();
                cmp = x < y ? -1 : x > y ? 1 : 0;
            }
            switch (e.op) {
                case ExprOp::Lt: return SignalValue::of_bool(cmp < 0);
                case ExprOp::Le: return SignalValue::of_bool(cmp <= 0);
                case ExprOp::Gt: return SignalValue::of_bool(cmp > 0);
                default: return SignalValue::of_bool(cmp >= 0);
            }
        }
        case ExprOp::Add:
        case ExprOp::Sub:
        case ExprOp::Mul: {
            SignalValue a = eval_expr(*e.kids[0], ctx);
            SignalValue b = eval_expr(*e.kids[1], ctx);
            if (a.type() == SignalType::Int) {
                int64_t x = a.as_int(), y = b.as_int(), r = 0;
                bool ovf = e.op == ExprOp::Add   ? __builtin_add_overflow(x, y, &r)
                           : e.op == ExprOp::Sub ? __builtin_sub_overflow(x, y, &r)
                                                 : __builtin_mul_overflow(x, y, &r);
                if (ovf) throw EvalFault("integer overflow in " + std::string(op_key(e.op)));
                return SignalValue::of_int(r);
            }
            double x = a.as_float(), y = b.as_float();
            double r = e.op == ExprOp::Add ? x + y : e.op == ExprOp::Sub ? x - y : x * y;
            if (!std::isfinite(r))
                throw EvalFault("non-finite result in " + std::string(op_key(e.op)));
            return SignalValue::of_float(r);
        }
    }
    throw EvalFault("unknown operator");
}

void collect_reads(const Expr& e, std::set<std::string>& vars, std::set<std::string>& channels) {
    switch (e.op) {
        case ExprOp::Var: vars.insert(e.name); break;
        case ExprOp::Received:
        case ExprOp::Payload: channels.insert(e.name); break;
        default: break;
    }
    for (const auto& k : e.kids) collect_reads(*k, vars, channels);
}

ojson expr_to_json(const Expr& e) {
    switch (e.op) {
        case ExprOp::Const: return ojson{{"const", e.literal.to_json()}};
        case ExprOp::Var: return ojson{{"var", e.name}};
        case ExprOp::Tick: return ojson{{"tick", ojson::object()}};
        case ExprOp::Received: return ojson{{"received", e.name}};
        case ExprOp::Payload: {
            ojson p;
            p["channel"] = e.name;
            p["default"] = e.literal.to_json();
            return ojson{{"payload", std::move(p)}};
        }
        case ExprOp::Not: return ojson{{"not", expr_to_json(*e.kids[0])}};
        default: {
            ojson arr = ojson::array();
            for (const auto& k : e.kids) arr.push_back(expr_to_json(*k));
            return ojson{{op_key(e.op), std::move(arr)}};
        }
    }
}

}  // namespace plcprov
