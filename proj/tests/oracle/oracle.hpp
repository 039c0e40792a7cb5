#ifndef TICKGRAPH_TESTS_ORACLE_HPP
#define TICKGRAPH_TESTS_ORACLE_HPP

// Deliberately naive reference implementations. They share no search code
// with the library: matching enumerates every injective entity map, iso is a
// plain backtracking search, and exploration expands every rule instance.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tickgraph/bigraph.hpp"
#include "tickgraph/match.hpp"
#include "tickgraph/mdp.hpp"
#include "tickgraph/rewrite.hpp"

namespace oracle {

using namespace tickgraph;

/// Every occurrence of a plain pattern, sorted.
std::vector<Match> brute_occurrences(const Bigraph& agent, const Bigraph& pattern);

bool brute_iso(const Bigraph& a, const Bigraph& b);

struct Choice {
    std::string action;
    /// (target state, probability), targets ascending.
    std::vector<std::pair<std::size_t, double>> distribution;
};

struct State {
    Bigraph bigraph;
    std::vector<Choice> choices;
};

struct Explored {
    std::vector<State> states;
};

/// Breadth-first exploration over eagerly expanded rules.
Explored brute_explore(const Bigraph& initial, const PrioritySpec& priorities, const ActionMap& actions,
                       std::size_t max_states = 20000);

/// Empty when the two agree up to a state bijection; otherwise a reason.
std::string compare(const Explored& oracle, const Mdp& mdp);

/// Random ground bigraph over a small fixed signature.
Bigraph random_agent(std::mt19937_64& rng, std::size_t max_entities);
/// Random pattern: half the time cut out of `agent`, otherwise free-standing.
Bigraph random_pattern(std::mt19937_64& rng, const Bigraph& agent, std::size_t max_entities);
/// Same bigraph with entities, links, siblings and ports shuffled.
Bigraph shuffle(std::mt19937_64& rng, const Bigraph& b);

} // namespace oracle

#endif
