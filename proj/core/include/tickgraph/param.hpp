#ifndef TICKGRAPH_PARAM_HPP
#define TICKGRAPH_PARAM_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tickgraph/bigraph.hpp"

namespace tickgraph {

/// Integer expression over the parameters of a rule or pattern family:
/// literals, parameters, `+`, `-` and `*`.
class IntExpr {
public:
    enum class Op { literal, variable, add, sub, mul };

    static IntExpr literal(std::int64_t value);
    /// Parameter `index` of the enclosing family, printed as `name`.
    static IntExpr variable(std::size_t index, std::string name);
    static IntExpr binary(Op op, IntExpr lhs, IntExpr rhs);

    Op op() const { return op_; }
    std::int64_t eval(std::span<const std::int64_t> valuation) const;
    /// Index of the parameter when the expression is exactly one parameter.
    std::optional<std::size_t> as_variable() const;
    /// Value when the expression mentions no parameter.
    std::optional<std::int64_t> as_constant() const;
    std::string to_string() const;

private:
    IntExpr() = default;

    Op op_ = Op::literal;
    std::int64_t value_ = 0;
    std::size_t var_ = 0;
    std::string name_;
    std::shared_ptr<const IntExpr> lhs_;
    std::shared_ptr<const IntExpr> rhs_;
};

/// A bigraph whose entity parameters may be expressions over family
/// parameters. Entities without an expression keep their own parameter.
struct ParamBigraph {
    Bigraph shape;
    /// Empty, or one slot per entity of `shape`.
    std::vector<std::optional<IntExpr>> params;

    ParamBigraph() = default;
    ParamBigraph(Bigraph b) : shape(std::move(b)) {}

    bool has_expressions() const;
    Bigraph instantiate(std::span<const std::int64_t> valuation) const;
    const std::optional<IntExpr>* expr(std::size_t entity) const
    {
        return entity < params.size() ? &params[entity] : nullptr;
    }
};

/// Ion whose parameter is an expression (placeholder 0 in the shape).
ParamBigraph ion(const Control& control, const IntExpr& param, std::span<const std::string> names);

ParamBigraph nest(const ParamBigraph& outer, const ParamBigraph& inner);
ParamBigraph merge(const ParamBigraph& a, const ParamBigraph& b);
ParamBigraph parallel(const ParamBigraph& a, const ParamBigraph& b);
ParamBigraph close(std::string_view name, const ParamBigraph& b, bool* absent = nullptr);

} // namespace tickgraph

#endif
