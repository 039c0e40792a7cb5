#include "tickgraph/param.hpp"

#include <stdexcept>

namespace tickgraph {

IntExpr IntExpr::literal(std::int64_t value)
{
    IntExpr e;
    e.op_ = Op::literal;
    e.value_ = value;
    return e;
}

IntExpr IntExpr::variable(std::size_t index, std::string name)
{
    IntExpr e;
    e.op_ = Op::variable;
    e.var_ = index;
    e.name_ = std::move(name);
    return e;
}

IntExpr IntExpr::binary(Op op, IntExpr lhs, IntExpr rhs)
{
    if (op == Op::literal || op == Op::variable)
        throw std::invalid_argument("IntExpr::binary needs an arithmetic operator");
    IntExpr e;
    e.op_ = op;
    e.lhs_ = std::make_shared<const IntExpr>(std::move(lhs));
    e.rhs_ = std::make_shared<const IntExpr>(std::move(rhs));
    return e;
}

std::int64_t IntExpr::eval(std::span<const std::int64_t> valuation) const
{
    switch (op_) {
    case Op::literal:
        return value_;
    case Op::variable:
        if (var_ >= valuation.size())
            throw std::out_of_range("parameter " + name_ + " has no value");
        return valuation[var_];
    case Op::add:
        return lhs_->eval(valuation) + rhs_->eval(valuation);
    case Op::sub:
        return lhs_->eval(valuation) - rhs_->eval(valuation);
    case Op::mul:
        return lhs_->eval(valuation) * rhs_->eval(valuation);
    }
    return 0;
}

std::optional<std::size_t> IntExpr::as_variable() const
{
    if (op_ == Op::variable)
        return var_;
    return std::nullopt;
}

std::optional<std::int64_t> IntExpr::as_constant() const
{
    switch (op_) {
    case Op::literal:
        return value_;
    case Op::variable:
        return std::nullopt;
    default: {
        auto l = lhs_->as_constant();
        auto r = rhs_->as_constant();
        if (!l || !r)
            return std::nullopt;
        return eval({});
    }
    }
}

std::string IntExpr::to_string() const
{
    switch (op_) {
    case Op::literal:
        return std::to_string(value_);
    case Op::variable:
        return name_;
    case Op::add:
        return lhs_->to_string() + " + " + rhs_->to_string();
    case Op::sub:
        return lhs_->to_string() + " - " + (rhs_->op_ == Op::add || rhs_->op_ == Op::sub
                                                 ? "(" + rhs_->to_string() + ")"
                                                 : rhs_->to_string());
    case Op::mul: {
        auto wrap = [](const IntExpr& e) {
            return e.op_ == Op::add || e.op_ == Op::sub ? "(" + e.to_string() + ")" : e.to_string();
        };
        return wrap(*lhs_) + " * " + wrap(*rhs_);
    }
    }
    return {};
}

bool ParamBigraph::has_expressions() const
{
    for (const auto& p : params)
        if (p)
            return true;
    return false;
}

Bigraph ParamBigraph::instantiate(std::span<const std::int64_t> valuation) const
{
    Bigraph out = shape;
    for (std::size_t i = 0; i < params.size() && i < out.entities.size(); ++i)
        if (params[i])
            out.entities[i].param = params[i]->eval(valuation);
    return out;
}

namespace {

std::vector<std::optional<IntExpr>> slots(const ParamBigraph& b)
{
    auto out = b.params;
    out.resize(b.shape.entities.size());
    return out;
}

ParamBigraph concat(Bigraph shape, const ParamBigraph& a, const ParamBigraph& b)
{
    ParamBigraph r(std::move(shape));
    if (!a.has_expressions() && !b.has_expressions())
        return r;
    r.params = slots(a);
    auto tail = slots(b);
    r.params.insert(r.params.end(), tail.begin(), tail.end());
    return r;
}

} // namespace

ParamBigraph ion(const Control& control, const IntExpr& param, std::span<const std::string> names)
{
    ParamBigraph r(ion(control, param.as_constant().value_or(0), names));
    if (!param.as_constant())
        r.params.push_back(param);
    return r;
}

ParamBigraph nest(const ParamBigraph& outer, const ParamBigraph& inner)
{
    return concat(nest(outer.shape, inner.shape), outer, inner);
}

ParamBigraph merge(const ParamBigraph& a, const ParamBigraph& b) { return concat(merge(a.shape, b.shape), a, b); }

ParamBigraph parallel(const ParamBigraph& a, const ParamBigraph& b)
{
    return concat(parallel(a.shape, b.shape), a, b);
}

ParamBigraph close(std::string_view name, const ParamBigraph& b, bool* absent)
{
    ParamBigraph r = b;
    r.shape = close(name, b.shape, absent);
    return r;
}

} // namespace tickgraph
