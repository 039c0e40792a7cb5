#ifndef TICKGRAPH_MDP_HPP
#define TICKGRAPH_MDP_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tickgraph/match.hpp"
#include "tickgraph/rewrite.hpp"

namespace tickgraph {

/// Action label used for the self-loops added by `fix_deadlocks`.
inline constexpr std::string_view stall_action = "stall";

struct ExploreLimits {
    std::size_t max_states = 100000;
    /// States at this BFS depth are kept but not expanded.
    std::optional<std::size_t> max_depth;
    /// Worker threads for successor computation; output does not depend on it.
    unsigned jobs = 1;
    /// Give every deadlock state a probability-1 self-loop labelled `stall`.
    bool fix_deadlocks = false;
};

struct Transition {
    std::size_t target = 0;
    double probability = 0.0;
    /// Rules whose outcomes were merged into this transition.
    std::vector<std::string> rules;
};

struct Choice {
    std::size_t action = 0;
    std::vector<Transition> distribution;
};

struct MdpState {
    CanonicalForm form;
    /// Canonical representative (decode(form)).
    Bigraph bigraph;
    std::vector<Choice> choices;
    std::size_t depth = 0;
    /// No rule applies. Stays set when a stall loop was added.
    bool deadlock = false;
    /// False for states cut off by the depth limit.
    bool expanded = true;
};

struct Mdp {
    std::vector<std::string> actions;
    std::vector<MdpState> states;
    /// Predicate names and, per state, the sorted indices of those it satisfies.
    std::vector<std::string> label_names;
    std::vector<std::vector<std::size_t>> labels;

    std::size_t choice_count() const;
    std::size_t transition_count() const;
    std::size_t deadlock_count() const;
    std::optional<std::size_t> find_action(std::string_view name) const;
};

/// Breadth-first closure from the initial state; states are numbered in
/// discovery order and deduplicated up to isomorphism. Throws BudgetExceeded
/// when more than `max_states` states are found.
Mdp explore(const ReactiveSystem& system, const ExploreLimits& limits = {});

struct PrismFiles {
    std::string tra;
    std::string lab;
    std::string sta;
};

PrismFiles export_prism(const Mdp& mdp);
std::string export_dot(const Mdp& mdp);

/// `%.12g`, as used for probabilities in every export.
std::string format_probability(double p);

struct TraRow {
    std::size_t src = 0;
    std::size_t choice = 0;
    std::size_t dst = 0;
    double probability = 0.0;
    std::string action;
};

struct TraFile {
    std::size_t states = 0;
    std::size_t choices = 0;
    std::size_t transitions = 0;
    std::vector<TraRow> rows;
};

/// Reads a PRISM explicit .tra file; throws std::invalid_argument on bad input.
TraFile parse_tra(std::string_view text);

/// Versioned binary form of an explored MDP (labels excluded). `key`
/// identifies the model and options it was built from.
std::string serialize(const Mdp& mdp, std::uint64_t key);

/// Inverse of serialize(); empty on a version or key mismatch, throws
/// std::invalid_argument on corrupt data.
std::optional<Mdp> deserialize(std::string_view bytes, std::uint64_t key);

struct TraceStep {
    std::size_t step = 0;
    std::string action;
    std::string rule;
    std::uint64_t state_digest = 0;
};

struct Trace {
    std::vector<TraceStep> steps;
    /// Step at which no rule applied, if the run stopped early.
    std::optional<std::size_t> deadlock_at;
};

/// Random run: the action is drawn uniformly among the enabled ones, the
/// successor by the action's distribution. Uses mt19937_64 seeded with `seed`.
Trace simulate(const ReactiveSystem& system, std::uint64_t seed, std::size_t steps);

} // namespace tickgraph

#endif
