#include "tickgraph/bigraph.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "tickgraph/error.hpp"

namespace tickgraph {

std::vector<std::string> Bigraph::outer_names() const
{
    std::vector<std::string> out;
    for (const auto& l : links)
        if (l.name)
            out.push_back(*l.name);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> Bigraph::inner_names() const
{
    std::vector<std::string> out;
    out.reserve(inner.size());
    for (const auto& [n, _] : inner)
        out.push_back(n);
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<std::size_t> Bigraph::find_outer(std::string_view name) const
{
    for (std::size_t i = 0; i < links.size(); ++i)
        if (links[i].name && *links[i].name == name)
            return i;
    return std::nullopt;
}

Forest::Forest(const Bigraph& b)
    : region_entities(b.regions),
      region_sites(b.regions),
      entity_children(b.entities.size()),
      entity_sites(b.entities.size())
{
    for (std::size_t e = 0; e < b.entities.size(); ++e) {
        const Place p = b.entities[e].parent;
        if (p.is_region() && p.index < b.regions)
            region_entities[p.index].push_back(e);
        else if (p.is_entity() && p.index < b.entities.size())
            entity_children[p.index].push_back(e);
    }
    for (std::size_t s = 0; s < b.sites.size(); ++s) {
        const Place p = b.sites[s];
        if (p.is_region() && p.index < b.regions)
            region_sites[p.index].push_back(s);
        else if (p.is_entity() && p.index < b.entities.size())
            entity_sites[p.index].push_back(s);
    }
}

Bigraph epsilon() { return {}; }

Bigraph one()
{
    Bigraph b;
    b.regions = 1;
    return b;
}

Bigraph site()
{
    Bigraph b;
    b.regions = 1;
    b.sites.push_back(Place::region(0));
    return b;
}

Bigraph ion(const Control& control, std::optional<std::int64_t> param, std::span<const std::string> names)
{
    if (names.size() != control.arity)
        throw ConstructionError(ConstructionError::Kind::arity_mismatch,
                                "control " + control.name + " has arity " + std::to_string(control.arity) + " but " +
                                    std::to_string(names.size()) + " names were given");
    if (param.has_value() != control.parameterised)
        throw ConstructionError(ConstructionError::Kind::param_mismatch,
                                control.parameterised ? "control " + control.name + " requires a parameter"
                                                      : "control " + control.name + " takes no parameter");
    Bigraph b;
    b.regions = 1;
    Entity e{control, param, Place::region(0), {}};
    for (const auto& n : names) {
        auto existing = b.find_outer(n);
        if (existing) {
            e.ports.push_back(*existing);
        } else {
            e.ports.push_back(b.links.size());
            b.links.push_back(Link{n});
        }
    }
    b.entities.push_back(std::move(e));
    if (!control.atomic)
        b.sites.push_back(Place::entity(0));
    return b;
}

Bigraph ion(const Control& control, std::optional<std::int64_t> param, std::initializer_list<std::string> names)
{
    return ion(control, param, std::span<const std::string>(names.begin(), names.size()));
}

namespace {

// Appends the links of `b` to `into`, fusing like-named open links. Returns
// the index of each link of `b` in `into`.
std::vector<std::size_t> fuse_links(std::vector<Link>& into, const std::vector<Link>& from)
{
    std::vector<std::size_t> map(from.size());
    for (std::size_t i = 0; i < from.size(); ++i) {
        std::optional<std::size_t> hit;
        if (from[i].name) {
            for (std::size_t j = 0; j < into.size(); ++j)
                if (into[j].name == from[i].name) {
                    hit = j;
                    break;
                }
        }
        if (hit) {
            map[i] = *hit;
        } else {
            map[i] = into.size();
            into.push_back(from[i]);
        }
    }
    return map;
}

void append_inner(Bigraph& r, const Bigraph& b, const std::vector<std::size_t>& link_map)
{
    for (const auto& [name, l] : b.inner) {
        for (const auto& [existing, _] : r.inner)
            if (existing == name)
                throw ConstructionError(ConstructionError::Kind::name_clash, "inner name " + name + " used twice");
        r.inner.emplace_back(name, link_map.at(l));
    }
}

Bigraph juxtapose(const Bigraph& a, const Bigraph& b, bool one_region)
{
    Bigraph r = a;
    const std::size_t offset = a.entities.size();
    const auto link_map = fuse_links(r.links, b.links);
    auto move_place = [&](Place p) {
        if (p.is_entity())
            return Place::entity(p.index + offset);
        return one_region ? Place::region(0) : Place::region(p.index + a.regions);
    };
    for (const auto& e : b.entities) {
        Entity copy = e;
        copy.parent = move_place(e.parent);
        for (auto& port : copy.ports)
            port = link_map.at(port);
        r.entities.push_back(std::move(copy));
    }
    for (const auto& s : b.sites)
        r.sites.push_back(move_place(s));
    append_inner(r, b, link_map);
    if (one_region) {
        for (auto& e : r.entities)
            if (e.parent.is_region())
                e.parent = Place::region(0);
        for (auto& s : r.sites)
            if (s.is_region())
                s = Place::region(0);
        r.regions = 1;
    } else {
        r.regions = a.regions + b.regions;
    }
    return r;
}

// Drops closed links that have no ports and no inner names, renumbering the rest.
void drop_idle_closed(Bigraph& b)
{
    std::vector<bool> used(b.links.size(), false);
    for (const auto& e : b.entities)
        for (auto p : e.ports)
            if (p < used.size())
                used[p] = true;
    for (const auto& [_, l] : b.inner)
        if (l < used.size())
            used[l] = true;
    std::vector<std::size_t> remap(b.links.size(), no_link);
    std::vector<Link> kept;
    for (std::size_t i = 0; i < b.links.size(); ++i) {
        if (!used[i] && !b.links[i].name)
            continue;
        remap[i] = kept.size();
        kept.push_back(b.links[i]);
    }
    if (kept.size() == b.links.size())
        return;
    for (auto& e : b.entities)
        for (auto& p : e.ports)
            p = p < remap.size() ? remap[p] : p;
    for (auto& [_, l] : b.inner)
        l = remap[l];
    b.links = std::move(kept);
}

} // namespace

Bigraph merge(const Bigraph& a, const Bigraph& b) { return juxtapose(a, b, true); }

Bigraph parallel(const Bigraph& a, const Bigraph& b) { return juxtapose(a, b, false); }

Bigraph nest(const Bigraph& outer, const Bigraph& inner)
{
    if (outer.sites.size() != 1) {
        const bool atomic_root = outer.sites.empty() && outer.entities.size() == 1 && outer.entities[0].control.atomic;
        if (atomic_root)
            throw ConstructionError(ConstructionError::Kind::atomic_parent,
                                    "cannot nest inside atomic entity " + outer.entities[0].control.name);
        throw ConstructionError(ConstructionError::Kind::site_count,
                                "nest needs an outer operand with exactly one site, got " +
                                    std::to_string(outer.sites.size()));
    }
    if (inner.regions != 1)
        throw ConstructionError(ConstructionError::Kind::region_count,
                                "nest needs an inner operand with exactly one region, got " +
                                    std::to_string(inner.regions));
    if (!outer.inner.empty())
        throw ConstructionError(ConstructionError::Kind::name_clash, "nest: outer operand has inner names");

    const Place hole = outer.sites[0];
    if (hole.is_entity() && outer.entities.at(hole.index).control.atomic)
        throw ConstructionError(ConstructionError::Kind::atomic_parent,
                                "cannot nest inside atomic entity " + outer.entities[hole.index].control.name);

    Bigraph r;
    r.regions = outer.regions;
    r.entities = outer.entities;
    r.links = outer.links;
    const std::size_t offset = outer.entities.size();
    const auto link_map = fuse_links(r.links, inner.links);
    auto move_place = [&](Place p) { return p.is_region() ? hole : Place::entity(p.index + offset); };
    for (const auto& e : inner.entities) {
        Entity copy = e;
        copy.parent = move_place(e.parent);
        for (auto& port : copy.ports)
            port = link_map.at(port);
        r.entities.push_back(std::move(copy));
    }
    for (const auto& s : inner.sites)
        r.sites.push_back(move_place(s));
    append_inner(r, inner, link_map);
    return r;
}

Bigraph close(std::string_view name, const Bigraph& b, bool* absent)
{
    auto idx = b.find_outer(name);
    if (absent)
        *absent = !idx.has_value();
    if (!idx)
        return b;
    Bigraph r = b;
    r.links[*idx].name.reset();
    drop_idle_closed(r);
    return r;
}

std::vector<Violation> validate(const Bigraph& b, const ControlTable* controls)
{
    std::vector<Violation> out;
    auto entity_name = [&](std::size_t i) {
        return "entity " + std::to_string(i) + " (" + b.entities[i].control.name + ")";
    };
    auto check_place = [&](const std::string& subject, Place p) {
        if (p.is_region() && p.index >= b.regions)
            out.push_back({subject, "parent region " + std::to_string(p.index) + " does not exist"});
        if (p.is_entity() && p.index >= b.entities.size())
            out.push_back({subject, "parent entity " + std::to_string(p.index) + " does not exist"});
    };

    std::vector<std::size_t> port_count(b.links.size(), 0);
    for (std::size_t i = 0; i < b.entities.size(); ++i) {
        const Entity& e = b.entities[i];
        check_place(entity_name(i), e.parent);
        if (e.ports.size() != e.control.arity)
            out.push_back({entity_name(i), "arity violation: " + std::to_string(e.ports.size()) + " ports for arity " +
                                               std::to_string(e.control.arity)});
        if (e.param.has_value() != e.control.parameterised)
            out.push_back({entity_name(i), e.control.parameterised ? "missing parameter" : "unexpected parameter"});
        for (std::size_t p = 0; p < e.ports.size(); ++p) {
            if (e.ports[p] >= b.links.size())
                out.push_back({entity_name(i), "dangling port " + std::to_string(p)});
            else
                ++port_count[e.ports[p]];
        }
        if (controls) {
            auto it = controls->find(e.control.name);
            if (it == controls->end())
                out.push_back({entity_name(i), "undeclared control"});
            else if (it->second != e.control)
                out.push_back({entity_name(i), "arity violation: declared " + it->second.name + " has arity " +
                                                   std::to_string(it->second.arity) + ", entity has " +
                                                   std::to_string(e.ports.size()) + " ports"});
        }
    }

    // Acyclicity: walk up from each entity; a path longer than the entity count loops.
    for (std::size_t i = 0; i < b.entities.size(); ++i) {
        Place p = b.entities[i].parent;
        std::size_t steps = 0;
        while (p.is_entity() && p.index < b.entities.size() && steps <= b.entities.size()) {
            p = b.entities[p.index].parent;
            ++steps;
        }
        if (steps > b.entities.size()) {
            out.push_back({entity_name(i), "place graph has a cycle"});
            break;
        }
    }

    for (std::size_t s = 0; s < b.sites.size(); ++s)
        check_place("site " + std::to_string(s), b.sites[s]);

    for (std::size_t i = 0; i < b.entities.size(); ++i) {
        if (!b.entities[i].control.atomic)
            continue;
        const bool has_child = std::any_of(b.entities.begin(), b.entities.end(),
                                           [&](const Entity& c) { return c.parent == Place::entity(i); }) ||
                               std::any_of(b.sites.begin(), b.sites.end(),
                                           [&](const Place& s) { return s == Place::entity(i); });
        if (has_child)
            out.push_back({entity_name(i), "atomic entity is a parent"});
    }

    std::set<std::string> names;
    for (const auto& l : b.links)
        if (l.name && !names.insert(*l.name).second)
            out.push_back({"outer name " + *l.name, "outer name is not unique"});
    std::set<std::string> inner;
    for (const auto& [n, l] : b.inner) {
        if (!inner.insert(n).second)
            out.push_back({"inner name " + n, "inner name is not unique"});
        if (l >= b.links.size())
            out.push_back({"inner name " + n, "inner name mapped to no link"});
    }
    return out;
}

namespace {

struct Printer {
    const Bigraph& b;
    Forest forest;
    std::vector<std::string> link_names;

    std::string place(Place p) const
    {
        std::vector<std::string> parts;
        for (auto e : forest.entities_under(p))
            parts.push_back(entity(e));
        parts.insert(parts.end(), forest.sites_under(p).size(), "id");
        if (parts.empty())
            return "1";
        std::string out;
        for (std::size_t i = 0; i < parts.size(); ++i)
            out += (i ? " | " : "") + parts[i];
        return out;
    }

    std::string entity(std::size_t i) const
    {
        const Entity& e = b.entities[i];
        std::string out = e.control.name;
        if (e.param)
            out += "(" + std::to_string(*e.param) + ")";
        if (!e.ports.empty()) {
            out += "{";
            for (std::size_t p = 0; p < e.ports.size(); ++p)
                out += (p ? "," : "") + (e.ports[p] < link_names.size() ? link_names[e.ports[p]] : "?");
            out += "}";
        }
        const auto& kids = forest.entity_children[i];
        const auto& holes = forest.entity_sites[i];
        if (kids.empty() && holes.empty())
            return out;
        const std::size_t n = kids.size() + holes.size();
        const std::string inside = place(Place::entity(i));
        return out + "." + (n == 1 ? inside : "(" + inside + ")");
    }
};

} // namespace

std::string to_string(const Bigraph& b)
{
    Printer pr{b, Forest(b), {}};
    std::vector<std::string> closed;
    for (std::size_t i = 0; i < b.links.size(); ++i) {
        if (b.links[i].name) {
            pr.link_names.push_back(*b.links[i].name);
        } else {
            pr.link_names.push_back("_" + std::to_string(closed.size()));
            closed.push_back(pr.link_names.back());
        }
    }
    std::string body;
    for (std::size_t r = 0; r < b.regions; ++r)
        body += (r ? " || " : "") + pr.place(Place::region(r));
    if (b.regions == 0)
        body = "()";
    if (closed.empty())
        return body;
    std::string prefix;
    for (const auto& c : closed)
        prefix += "/" + c;
    return prefix + " (" + body + ")";
}

} // namespace tickgraph
