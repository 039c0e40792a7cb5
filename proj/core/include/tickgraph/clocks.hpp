#ifndef TICKGRAPH_CLOCKS_HPP
#define TICKGRAPH_CLOCKS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tickgraph/bigraph.hpp"
#include "tickgraph/rewrite.hpp"

namespace tickgraph {

/// An entity that gets a local clock. `link` is the open name on the port
/// reserved for the clock.
struct TimedEntity {
    std::string control;
    std::string link;
};

struct ClockConfig {
    std::int64_t max_time = 1;
    std::int64_t tick_step = 1;
    std::vector<TimedEntity> timed;
    bool global_clock = true;
    std::string local_control = "LC";
    std::string global_control = "GC";
    /// Control wrapping the local clocks; empty places them directly in the
    /// clock region.
    std::string container = "LocalClocks";

    /// Throws ConstructionError(invalid_config) on a bad configuration.
    void check() const;
    Control local_clock() const { return {local_control, 1, true, true}; }
    Control global_clock_control() const { return {global_control, 0, true, true}; }
    Control container_control() const { return {container, 0, false, false}; }
    /// {0, step, 2 step, ...} up to max_time - step: the values from which a
    /// tick is still allowed.
    std::vector<std::int64_t> advance_domain() const;
};

/// A clock constraint t <= clock <= n on the clock parameter of a timed rule.
/// With `deadline`, the upper bound is an invariant that forces the rule.
struct GuardSpec {
    std::string rule;
    std::int64_t lower = 0;
    std::int64_t upper = 0;
    bool deadline = true;
};

/// parallel(system, clocks) with every clock link closed. The clock region
/// holds GC(0) (if enabled) and one LC(0) per timed entity, linked to that
/// entity's reserved port.
Bigraph build_clock_perspective(const Bigraph& system, const ClockConfig& cfg);

/// The family `clock_advance` that moves every clock forward by one step.
RuleFamily gen_clock_advance(const ClockConfig& cfg);

/// Adds a local clock to a rule: /c (L || LC(n){c}) -> /c (R || LC(n'){c}),
/// n' = 0 on reset and n otherwise. The clock parameter is appended after the
/// base parameters and ranges over `domain`. Without `close_link` the clock
/// link stays open, as in rules written by hand.
RuleFamily timed_rule(const RuleFamily& base, const std::string& clock_link, std::vector<std::int64_t> domain,
                      bool reset, const Control& clock, bool close_link = true);

/// Two classes: {r(upper)} above {clock_advance, r(lower .. upper - 1)}.
/// `timed` is a family from timed_rule (clock parameter last). Without a
/// deadline the first class is empty and r(lower .. upper) sit with the tick.
PrioritySpec encode_invariant(const RuleFamily& timed, const GuardSpec& guard, const ClockConfig& cfg);

/// Merges fragments class by class, dropping repeated identical families.
PrioritySpec combine(std::span<const PrioritySpec> fragments);

} // namespace tickgraph

#endif
