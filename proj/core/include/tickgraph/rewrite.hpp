#ifndef TICKGRAPH_REWRITE_HPP
#define TICKGRAPH_REWRITE_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tickgraph/bigraph.hpp"
#include "tickgraph/match.hpp"
#include "tickgraph/param.hpp"

namespace tickgraph {

/// `if ! pattern in ctx`: the rule only fires when `pattern` has no
/// occurrence made solely of entities outside the match and its sites.
struct NegativeCondition {
    Bigraph pattern;
};

/// A concrete rule. `name` includes bound parameters, e.g. `init_transition(2)`;
/// `base` is the family name used by the action map.
struct ReactionRule {
    std::string name;
    std::string base;
    Bigraph redex;
    Bigraph reactum;
    double weight = 1.0;
    std::optional<NegativeCondition> condition;
    /// Reactum site -> redex site; empty means the identity.
    std::vector<std::size_t> site_map;
};

/// A parameterised rule before its parameters are given domains. Redex
/// parameters must be literals or bare parameters; reactums may use
/// arithmetic.
struct RuleTemplate {
    std::string name;
    std::vector<std::string> params;
    ParamBigraph redex;
    ParamBigraph reactum;
    double weight = 1.0;
    std::optional<NegativeCondition> condition;
    std::vector<std::size_t> site_map;
};

/// A template together with one finite domain per parameter.
struct RuleFamily {
    std::shared_ptr<const RuleTemplate> rule;
    std::vector<std::vector<std::int64_t>> domains;

    const std::string& base_name() const { return rule->name; }
    /// Number of valuations (saturating).
    std::uint64_t size() const;
};

/// Throws RewriteError(invalid_rule) when the template is malformed.
void check_template(const RuleTemplate& t);

std::string instance_name(const std::string& base, std::span<const std::int64_t> valuation);
ReactionRule instantiate(const RuleTemplate& t, std::span<const std::int64_t> valuation);

/// One rule per valuation, in lexicographic valuation order.
/// Throws RewriteError(empty_domain) when any domain is empty.
std::vector<ReactionRule> expand(const RuleFamily& family);

bool condition_holds(const Bigraph& agent, const NegativeCondition& condition, const Match& m);

/// Rewrites the occurrence `m` of `rule.redex` in `agent`. Throws
/// RewriteError(stale_match) when `m` is not an occurrence in `agent`, and
/// RewriteError(condition_violated) when the rule's condition fails.
Bigraph apply(const Bigraph& agent, const ReactionRule& rule, const Match& m);

/// Ordered priority classes, highest first.
struct PrioritySpec {
    std::vector<std::vector<RuleFamily>> classes;
};

/// Action label -> rule base names, in declaration order.
struct ActionMap {
    std::vector<std::pair<std::string, std::vector<std::string>>> actions;

    std::optional<std::size_t> action_of(const std::string& base) const;
};

enum class MatchMode {
    /// Match the parameter-shaped redex once and read parameters off the state.
    lazy,
    /// Match every expanded instance separately.
    eager,
};

/// Rules, priorities and actions over a fixed initial state.
class ReactiveSystem {
public:
    /// Checks coverage: every family's base in exactly one action, every
    /// action base used by some family, no rule instance in two classes.
    ReactiveSystem(Bigraph initial, PrioritySpec priorities, ActionMap actions, MatchMode mode = MatchMode::lazy);

    const Bigraph& initial() const { return initial_; }
    const PrioritySpec& priorities() const { return priorities_; }
    const ActionMap& actions() const { return actions_; }
    MatchMode mode() const { return mode_; }
    std::size_t action_of(std::size_t cls, std::size_t family) const { return action_index_[cls][family]; }
    const std::vector<ReactionRule>& expanded(std::size_t cls, std::size_t family) const
    {
        return expanded_[cls][family];
    }
    /// Valuation of each expanded instance (eager mode).
    const std::vector<std::vector<std::int64_t>>& valuations(std::size_t cls, std::size_t family) const
    {
        return valuations_[cls][family];
    }
    const ParamPattern& pattern(std::size_t cls, std::size_t family) const { return patterns_[cls][family]; }

private:
    Bigraph initial_;
    PrioritySpec priorities_;
    ActionMap actions_;
    MatchMode mode_;
    std::vector<std::vector<std::size_t>> action_index_;
    std::vector<std::vector<std::vector<ReactionRule>>> expanded_;
    std::vector<std::vector<std::vector<std::vector<std::int64_t>>>> valuations_;
    std::vector<std::vector<ParamPattern>> patterns_;
};

struct Outcome {
    ReactionRule rule;
    std::vector<std::int64_t> valuation;
    Match match;
};

struct ActionOutcomes {
    std::size_t action;
    std::vector<Outcome> outcomes;
};

/// Condition-satisfying outcomes of the rules in one priority class, grouped
/// by action in declaration order.
std::vector<ActionOutcomes> class_outcomes(const Bigraph& agent, const ReactiveSystem& system, std::size_t cls);

/// Outcomes of the highest class that has any; empty when nothing applies.
std::vector<ActionOutcomes> enabled_outcomes(const Bigraph& agent, const ReactiveSystem& system);

struct Successor {
    Bigraph state;
    CanonicalForm form;
    double probability = 0.0;
    /// Rules that lead here, first occurrence order, without repeats.
    std::vector<std::string> rules;
};

/// Applies every outcome of one action and normalises the weights over the
/// outcomes; isomorphic results are merged, keeping first-occurrence order.
std::vector<Successor> action_distribution(const Bigraph& agent, std::span<const Outcome> outcomes);

} // namespace tickgraph

#endif
