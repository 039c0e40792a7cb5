#ifndef TICKGRAPH_BIGRAPH_HPP
#define TICKGRAPH_BIGRAPH_HPP

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tickgraph {

/// Entity type: fixes the port count, whether children are allowed and
/// whether the entity carries an integer parameter.
struct Control {
    std::string name;
    std::size_t arity = 0;
    bool atomic = false;
    bool parameterised = false;

    bool operator==(const Control&) const = default;
};

using ControlTable = std::map<std::string, Control, std::less<>>;

/// Parent slot of an entity or site in the place forest.
struct Place {
    enum class Kind : std::uint8_t { region, entity };

    Kind kind = Kind::region;
    std::size_t index = 0;

    static constexpr Place region(std::size_t i) { return {Kind::region, i}; }
    static constexpr Place entity(std::size_t i) { return {Kind::entity, i}; }

    constexpr bool is_region() const { return kind == Kind::region; }
    constexpr bool is_entity() const { return kind == Kind::entity; }

    auto operator<=>(const Place&) const = default;
};

inline constexpr std::size_t no_link = std::numeric_limits<std::size_t>::max();

struct Entity {
    Control control;
    std::optional<std::int64_t> param;
    Place parent;
    /// Link index of each port. Port order carries no meaning for matching
    /// or isomorphism; it only records how the entity was written.
    std::vector<std::size_t> ports;
};

/// A hyperedge. Open links carry their outer name; closed links have none.
struct Link {
    std::optional<std::string> name;

    bool operator==(const Link&) const = default;
};

/// A bigraph with interfaces <sites, inner names> -> <regions, outer names>.
///
/// Plain value type. The constructors below only ever produce values that
/// pass validate(); raw aggregates may be built by hand (e.g. to exercise the
/// validator) and are checked on demand.
struct Bigraph {
    std::size_t regions = 0;
    std::vector<Entity> entities;
    /// Parent of each site, sites numbered left to right.
    std::vector<Place> sites;
    std::vector<Link> links;
    /// Inner names and the link each one belongs to.
    std::vector<std::pair<std::string, std::size_t>> inner;

    std::vector<std::string> outer_names() const;
    std::vector<std::string> inner_names() const;
    std::optional<std::size_t> find_outer(std::string_view name) const;
    bool is_ground() const { return sites.empty() && inner.empty(); }
};

/// Child lists of every place, in index order.
struct Forest {
    std::vector<std::vector<std::size_t>> region_entities;
    std::vector<std::vector<std::size_t>> region_sites;
    std::vector<std::vector<std::size_t>> entity_children;
    std::vector<std::vector<std::size_t>> entity_sites;

    explicit Forest(const Bigraph& b);

    const std::vector<std::size_t>& entities_under(Place p) const
    {
        return p.is_region() ? region_entities[p.index] : entity_children[p.index];
    }
    const std::vector<std::size_t>& sites_under(Place p) const
    {
        return p.is_region() ? region_sites[p.index] : entity_sites[p.index];
    }
};

/// The empty bigraph with no regions; unit of parallel().
Bigraph epsilon();
/// One empty region; unit of merge().
Bigraph one();
/// One region holding one site (the DSL's `id`).
Bigraph site();

/// Single-entity bigraph. Non-atomic ions hold one site; ports are linked to
/// the given outer names, repeated names sharing one link.
Bigraph ion(const Control& control, std::optional<std::int64_t> param, std::span<const std::string> names);
Bigraph ion(const Control& control, std::optional<std::int64_t> param, std::initializer_list<std::string> names);

/// Places the single region of `inner` in the single site of `outer`.
/// Entities keep their order: those of `outer` first, then those of `inner`.
Bigraph nest(const Bigraph& outer, const Bigraph& inner);

/// Juxtaposes all regions of both operands under one region.
Bigraph merge(const Bigraph& a, const Bigraph& b);

/// Places the operands side by side; regions of `b` follow those of `a`.
Bigraph parallel(const Bigraph& a, const Bigraph& b);

/// Closes outer name `name`. An absent name leaves `b` unchanged and sets
/// `*absent` when provided.
Bigraph close(std::string_view name, const Bigraph& b, bool* absent = nullptr);

struct Violation {
    std::string subject;
    std::string message;

    bool operator==(const Violation&) const = default;
};

/// Checks every structural invariant; with a control table, also checks each
/// entity's control against its declaration.
std::vector<Violation> validate(const Bigraph& b, const ControlTable* controls = nullptr);

/// Human-readable term for diagnostics; closed links print as `_0`, `_1`, ...
std::string to_string(const Bigraph& b);

} // namespace tickgraph

#endif
