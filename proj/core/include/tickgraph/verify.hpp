#ifndef TICKGRAPH_VERIFY_HPP
#define TICKGRAPH_VERIFY_HPP

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tickgraph/error.hpp"
#include "tickgraph/mdp.hpp"

namespace tickgraph {

/// A named state predicate: a state satisfies it when `body` occurs in it.
struct Pattern {
    std::string name;
    Bigraph body;
};

/// Sets mdp.label_names to the pattern names and recomputes every state's labels.
void label(Mdp& mdp, std::span<const Pattern> patterns);

/// A property mentions a label that the MDP does not carry.
class UnknownLabel : public Error {
public:
    explicit UnknownLabel(const std::string& name) : Error("unknown label \"" + name + "\""), name_(name) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

/// Boolean combination of label names. `init` and `deadlock` are always
/// available.
class LabelExpr {
public:
    enum class Kind { constant, name, negation, conjunction, disjunction };

    static LabelExpr constant(bool value);
    static LabelExpr name(std::string label);
    static LabelExpr negation(LabelExpr e);
    static LabelExpr conjunction(LabelExpr a, LabelExpr b);
    static LabelExpr disjunction(LabelExpr a, LabelExpr b);

    Kind kind() const { return kind_; }
    const std::string& label() const { return label_; }
    const LabelExpr& operand(std::size_t i) const { return *operands_.at(i); }
    /// Every label name mentioned, in order of first appearance.
    std::vector<std::string> names() const;
    std::string to_string() const;

private:
    LabelExpr() = default;

    Kind kind_ = Kind::constant;
    bool value_ = false;
    std::string label_;
    std::vector<std::shared_ptr<const LabelExpr>> operands_;

    friend std::vector<bool> satisfying(const Mdp& mdp, const LabelExpr& e);
};

/// States satisfying `e`; throws UnknownLabel.
std::vector<bool> satisfying(const Mdp& mdp, const LabelExpr& e);

enum class Optimum { min, max };

/// Per-state optimal probability of eventually reaching `target`. States
/// without choices are absorbing.
std::vector<double> reach_values(const Mdp& mdp, const std::vector<bool>& target, Optimum mode);

/// reach_values from the initial state.
double reach_prob(const Mdp& mdp, const LabelExpr& target, Optimum mode);

/// States that reach `target` with probability 0 under some (min) or every
/// (max) scheduler.
std::vector<bool> prob0(const Mdp& mdp, const std::vector<bool>& target, Optimum mode);
/// States that reach `target` with probability 1 under every scheduler.
std::vector<bool> prob1_all(const Mdp& mdp, const std::vector<bool>& target);

enum class Bound { ge, gt, le, lt };

/// P ~ p [ F target ]
struct Reach {
    Bound bound = Bound::ge;
    double p = 0.0;
    LabelExpr target = LabelExpr::constant(true);
};
/// A [ G !bad ]
struct Safety {
    LabelExpr bad = LabelExpr::constant(false);
};
/// A [ F goal ]
struct Inevitable {
    LabelExpr goal = LabelExpr::constant(true);
};
/// E [ F target ]
struct Possible {
    LabelExpr target = LabelExpr::constant(true);
};
/// Every path reaches `trigger`, and every step out of a trigger state lands
/// in a `next` state.
struct ForcedNext {
    LabelExpr trigger = LabelExpr::constant(true);
    LabelExpr next = LabelExpr::constant(true);
};

using Property = std::variant<Reach, Safety, Inevitable, Possible, ForcedNext>;

std::string to_string(const Property& p);

struct Verdict {
    bool holds = false;
    /// Probability backing the verdict, where one is computed.
    std::optional<double> value;
    std::string detail;
};

Verdict check(const Mdp& mdp, const Property& property);

struct PropertyLine {
    SourcePos pos;
    std::string text;
    Property property;
};

/// One property per line; `#` starts a comment. Throws ParseError.
std::vector<PropertyLine> parse_properties(std::string_view text);

/// Label names a property refers to.
std::vector<std::string> label_names(const Property& p);

} // namespace tickgraph

#endif
