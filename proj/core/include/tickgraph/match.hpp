#ifndef TICKGRAPH_MATCH_HPP
#define TICKGRAPH_MATCH_HPP

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tickgraph/bigraph.hpp"

namespace tickgraph {

/// Marks pattern entities whose parameter is a family variable rather than
/// a literal, so one search covers every valuation of a parameterised rule.
struct ParamPattern {
    /// One slot per pattern entity; set slots name the variable.
    std::vector<std::optional<std::size_t>> entity_var;
    /// Sorted admissible values of each variable.
    std::vector<std::vector<std::int64_t>> domains;
};

/// One occurrence of a pattern in an agent.
struct Match {
    /// Pattern entity -> agent entity (injective).
    std::vector<std::size_t> entities;
    /// Pattern link -> agent link; empty for idle pattern links.
    std::vector<std::optional<std::size_t>> links;
    /// Pattern site -> agent entities (subtree roots) it captures, ascending.
    std::vector<std::vector<std::size_t>> sites;
    /// Pattern region -> agent place its content hangs under.
    std::vector<Place> regions;
    /// Variable values fixed by the match (ParamPattern searches only).
    std::vector<std::optional<std::int64_t>> bindings;

    auto operator<=>(const Match&) const = default;
};

/// All occurrences of `pattern` in the ground bigraph `agent`, duplicate
/// free and sorted. Ports are compared as per-entity multisets; distinct open
/// pattern names must map to distinct agent links; a closed pattern link must
/// cover its agent link completely. A site directly under a pattern region
/// captures nothing. `limit` > 0 stops after that many matches (unsorted).
std::vector<Match> occurrences(const Bigraph& agent, const Bigraph& pattern, const ParamPattern* params = nullptr,
                               std::size_t limit = 0);

bool occurs(const Bigraph& agent, const Bigraph& pattern, const ParamPattern* params = nullptr);

/// True when `m` is an occurrence of the (concrete) pattern in `agent`;
/// used to reject matches computed against a different agent.
bool is_occurrence(const Bigraph& agent, const Bigraph& pattern, const Match& m);

/// Agent entities inside the match: pattern images plus the contents of
/// every site, i.e. everything that is not context.
std::vector<bool> covered_entities(const Bigraph& agent, const Match& m);

/// Byte encoding that is equal exactly for isomorphic bigraphs. Regions,
/// sites and names are interface positions and are kept; entity identities,
/// sibling order, port order and closed-link identities are not.
class CanonicalForm {
public:
    CanonicalForm() = default;
    explicit CanonicalForm(std::string bytes) : bytes_(std::move(bytes)) {}

    const std::string& bytes() const { return bytes_; }
    /// FNV-1a 64 of the bytes; stable across runs and platforms.
    std::uint64_t digest() const;

    auto operator<=>(const CanonicalForm&) const = default;

private:
    std::string bytes_;
};

struct CanonicalFormHash {
    std::size_t operator()(const CanonicalForm& f) const { return static_cast<std::size_t>(f.digest()); }
};

CanonicalForm canonical_form(const Bigraph& b);
bool is_iso(const Bigraph& a, const Bigraph& b);

/// Rebuilds the bigraph described by a canonical form; entities come out in
/// canonical order, so isomorphic inputs decode to identical values.
Bigraph decode(const CanonicalForm& form);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

} // namespace tickgraph

#endif
