#ifndef TICKGRAPH_LANG_HPP
#define TICKGRAPH_LANG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tickgraph/bigraph.hpp"
#include "tickgraph/error.hpp"
#include "tickgraph/param.hpp"
#include "tickgraph/rewrite.hpp"
#include "tickgraph/verify.hpp"

namespace tickgraph::lang {

/// Source position attached to syntax nodes. Positions never take part in
/// comparisons, so two parses of differently laid out text compare equal.
struct Loc {
    SourcePos pos;

    bool operator==(const Loc&) const { return true; }
};

struct IntAst {
    enum class Kind { literal, name, add, sub, mul };

    Kind kind = Kind::literal;
    std::int64_t value = 0;
    std::string name;
    std::vector<IntAst> operands;
    Loc loc;

    bool operator==(const IntAst&) const = default;
};

struct BigAst {
    enum class Kind {
        /// Control or big identifier, with optional arguments and links.
        atom,
        /// `id`: one region holding a site.
        site,
        /// `1`: one empty region.
        unit,
        nest,
        merge,
        parallel,
        /// `/name body`.
        closure,
    };

    Kind kind = Kind::unit;
    std::string name;
    std::vector<IntAst> args;
    bool has_args = false;
    std::vector<std::string> links;
    bool has_links = false;
    std::vector<BigAst> operands;
    Loc loc;

    bool operator==(const BigAst&) const = default;
};

struct ControlDecl {
    std::string name;
    bool atomic = false;
    bool fun = false;
    std::vector<std::string> params;
    std::int64_t arity = 0;
    Loc loc;

    bool operator==(const ControlDecl&) const = default;
};

struct BigDecl {
    std::string name;
    bool fun = false;
    std::vector<std::string> params;
    BigAst body;
    Loc loc;

    bool operator==(const BigDecl&) const = default;
};

struct ReactDecl {
    std::string name;
    bool fun = false;
    std::vector<std::string> params;
    BigAst redex;
    BigAst reactum;
    /// Absent for the plain `-->` arrow.
    std::optional<double> weight;
    /// `if ! <big> in ctx`
    std::optional<BigAst> condition;
    Loc loc;

    bool operator==(const ReactDecl&) const = default;
};

/// `int n = {0, 1};` or the scalar form `int n = 0;`.
struct IntBinding {
    std::string name;
    std::vector<std::int64_t> values;
    bool scalar = false;
    Loc loc;

    bool operator==(const IntBinding&) const = default;
};

/// Rule or predicate reference in an abrs block: arguments are int literals
/// or int set names.
struct FamilyRef {
    struct Arg {
        std::variant<std::int64_t, std::string> value;
        Loc loc;

        bool operator==(const Arg&) const = default;
    };

    std::string name;
    std::vector<Arg> args;
    bool has_args = false;
    Loc loc;

    bool operator==(const FamilyRef&) const = default;
};

struct ActionDecl {
    std::string name;
    std::vector<std::string> rules;
    std::vector<Loc> rule_locs;
    Loc loc;

    bool operator==(const ActionDecl&) const = default;
};

struct AbrsBlock {
    std::vector<IntBinding> ints;
    std::optional<std::string> init;
    Loc init_loc;
    std::optional<std::vector<std::vector<FamilyRef>>> rules;
    std::optional<std::vector<ActionDecl>> actions;
    std::optional<std::vector<FamilyRef>> preds;
    Loc loc;

    bool operator==(const AbrsBlock&) const = default;
};

using Declaration = std::variant<ControlDecl, BigDecl, ReactDecl>;

struct Ast {
    std::vector<Declaration> declarations;
    std::optional<AbrsBlock> abrs;

    bool operator==(const Ast&) const = default;
};

/// Throws ParseError with the position and the set of expected tokens.
Ast parse(std::string_view text);

/// Source text that parses back to an equal Ast.
std::string to_source(const Ast& ast);
std::string to_source(const BigAst& big);

/// A predicate family from the `preds` set; plain predicates have no
/// parameters.
struct PredicateFamily {
    std::string name;
    std::vector<std::string> params;
    ParamBigraph body;
    std::vector<std::vector<std::int64_t>> domains;
    SourcePos pos;
};

struct Model {
    ControlTable controls;
    std::map<std::string, std::vector<std::int64_t>, std::less<>> int_sets;
    Bigraph initial;
    std::string initial_name;
    PrioritySpec priorities;
    ActionMap actions;
    std::vector<PredicateFamily> predicates;
    /// Declaration position of each rule family, parallel to priorities.
    std::vector<std::vector<SourcePos>> rule_positions;

    /// Concrete rule instances over all classes.
    std::uint64_t rule_count() const;
    ReactiveSystem system(MatchMode mode = MatchMode::lazy) const;
    /// Every predicate instance over its domains, named `<base>_<v1>_<v2>`.
    std::vector<Pattern> predicate_instances() const;
    /// A predicate by label. Parameterised families also resolve for
    /// parameter values outside their `preds` domains (e.g. clock_X_9).
    std::optional<Pattern> predicate(std::string_view label) const;
};

/// Throws ElaborationError.
Model elaborate(const Ast& ast);

inline Model load(std::string_view text) { return elaborate(parse(text)); }

/// `<base>_<v1>_<v2>...`
std::string predicate_label(const std::string& base, std::span<const std::int64_t> values);

} // namespace tickgraph::lang

#endif
