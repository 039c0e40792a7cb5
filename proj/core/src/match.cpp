#include "tickgraph/match.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace tickgraph {

namespace {

class Matcher {
public:
    Matcher(const Bigraph& agent, const Bigraph& pattern, const ParamPattern* params, std::size_t limit)
        : agent_(agent), pat_(pattern), pp_(params), limit_(limit), af_(agent), pf_(pattern)
    {
        if (!agent.sites.empty())
            throw std::invalid_argument("occurrences: the agent must have no sites");
        if (!pattern.inner.empty())
            throw std::invalid_argument("occurrences: patterns with inner names are not supported");
        if (pp_ && pp_->entity_var.size() != pattern.entities.size())
            throw std::invalid_argument("occurrences: parameter pattern does not fit the pattern");

        for (std::size_t v = 0; v < agent.entities.size(); ++v)
            by_control_[agent.entities[v].control.name].push_back(v);
        agent_port_count_.assign(agent.links.size(), 0);
        for (const auto& e : agent.entities)
            for (auto l : e.ports)
                ++agent_port_count_[l];
        pattern_port_count_.assign(pattern.links.size(), 0);
        for (const auto& e : pattern.entities)
            for (auto l : e.ports)
                ++pattern_port_count_[l];

        build_order();
        image_.assign(pattern.entities.size(), 0);
        used_.assign(agent.entities.size(), false);
        host_.assign(pattern.regions, std::nullopt);
        if (pp_)
            binding_.assign(pp_->domains.size(), std::nullopt);
    }

    std::vector<Match> run()
    {
        place(0);
        std::sort(out_.begin(), out_.end());
        out_.erase(std::unique(out_.begin(), out_.end()), out_.end());
        return std::move(out_);
    }

private:
    std::size_t frequency(std::size_t u) const
    {
        auto it = by_control_.find(pat_.entities[u].control.name);
        return it == by_control_.end() ? 0 : it->second.size();
    }

    // Regions by rarest root, each region's roots by rarity, then preorder so
    // every non-root entity follows its parent.
    void build_order()
    {
        auto by_rarity = [&](std::vector<std::size_t> v) {
            std::stable_sort(v.begin(), v.end(),
                             [&](std::size_t a, std::size_t b) { return frequency(a) < frequency(b); });
            return v;
        };
        std::vector<std::size_t> regions;
        for (std::size_t r = 0; r < pat_.regions; ++r)
            if (!pf_.region_entities[r].empty())
                regions.push_back(r);
        auto rarest = [&](std::size_t r) {
            std::size_t best = SIZE_MAX;
            for (auto u : pf_.region_entities[r])
                best = std::min(best, frequency(u));
            return best;
        };
        std::stable_sort(regions.begin(), regions.end(),
                         [&](std::size_t a, std::size_t b) { return rarest(a) < rarest(b); });
        std::vector<std::size_t> stack;
        for (auto r : regions) {
            for (auto root : by_rarity(pf_.region_entities[r])) {
                stack.push_back(root);
                while (!stack.empty()) {
                    auto u = stack.back();
                    stack.pop_back();
                    order_.push_back(u);
                    auto kids = by_rarity(pf_.entity_children[u]);
                    stack.insert(stack.end(), kids.rbegin(), kids.rend());
                }
            }
        }
    }

    std::optional<std::size_t> var_of(std::size_t u) const
    {
        return pp_ ? pp_->entity_var[u] : std::nullopt;
    }

    bool compatible(std::size_t u, std::size_t v) const
    {
        const Entity& p = pat_.entities[u];
        const Entity& a = agent_.entities[v];
        if (!(p.control == a.control))
            return false;
        if (auto x = var_of(u)) {
            if (!a.param)
                return false;
            const auto& dom = pp_->domains[*x];
            if (!std::binary_search(dom.begin(), dom.end(), *a.param))
                return false;
            if (binding_[*x] && *binding_[*x] != *a.param)
                return false;
        } else if (p.param != a.param) {
            return false;
        }
        const std::size_t want = pf_.entity_children[u].size();
        const std::size_t have = af_.entity_children[v].size();
        return pf_.entity_sites[u].empty() ? have == want : have >= want;
    }

    bool done() const { return limit_ > 0 && out_.size() >= limit_; }

    void place(std::size_t i)
    {
        if (done())
            return;
        if (i == order_.size()) {
            finish();
            return;
        }
        const std::size_t u = order_[i];
        const Place parent = pat_.entities[u].parent;
        static const std::vector<std::size_t> none;
        const std::vector<std::size_t>* candidates = &none;
        if (parent.is_entity()) {
            candidates = &af_.entity_children[image_[parent.index]];
        } else if (host_[parent.index]) {
            candidates = &af_.entities_under(*host_[parent.index]);
        } else {
            auto it = by_control_.find(pat_.entities[u].control.name);
            if (it != by_control_.end())
                candidates = &it->second;
        }
        for (auto v : *candidates) {
            if (used_[v] || !compatible(u, v))
                continue;
            const auto x = var_of(u);
            const bool bind_here = x && !binding_[*x];
            if (bind_here)
                binding_[*x] = agent_.entities[v].param;
            const bool host_here = parent.is_region() && !host_[parent.index];
            if (host_here)
                host_[parent.index] = agent_.entities[v].parent;
            image_[u] = v;
            used_[v] = true;
            place(i + 1);
            used_[v] = false;
            if (host_here)
                host_[parent.index].reset();
            if (bind_here)
                binding_[*x].reset();
            if (done())
                return;
        }
    }

    // True when `p` is a matched entity or lies inside one.
    bool blocked(Place p) const
    {
        while (p.is_entity()) {
            if (used_[p.index])
                return true;
            p = agent_.entities[p.index].parent;
        }
        return false;
    }

    void finish()
    {
        for (const auto& h : host_)
            if (h && blocked(*h))
                return;

        link_maps_.clear();
        std::vector<std::optional<std::size_t>> f(pat_.links.size());
        std::vector<std::size_t> owner(agent_.links.size(), no_link);
        std::vector<std::vector<char>> taken(pat_.entities.size());
        for (auto u : order_)
            taken[u].assign(agent_.entities[image_[u]].ports.size(), 0);
        slots_.clear();
        for (auto u : order_)
            for (std::size_t j = 0; j < pat_.entities[u].ports.size(); ++j)
                slots_.emplace_back(u, j);
        solve_links(0, f, owner, taken);
        if (link_maps_.empty())
            return;

        // Unmatched children of each matched entity that has sites; sites
        // directly under a region stay empty.
        std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> groups;
        for (auto u : order_) {
            const auto& holes = pf_.entity_sites[u];
            if (holes.empty())
                continue;
            std::vector<bool> mapped(agent_.entities.size(), false);
            for (auto c : pf_.entity_children[u])
                mapped[image_[c]] = true;
            std::vector<std::size_t> rest;
            for (auto c : af_.entity_children[image_[u]])
                if (!mapped[c])
                    rest.push_back(c);
            groups.emplace_back(holes, std::move(rest));
        }

        std::vector<std::size_t> empty_regions;
        for (std::size_t r = 0; r < pat_.regions; ++r)
            if (pf_.region_entities[r].empty())
                empty_regions.push_back(r);
        std::vector<Place> free_places;
        if (!empty_regions.empty()) {
            for (std::size_t r = 0; r < agent_.regions; ++r)
                free_places.push_back(Place::region(r));
            for (std::size_t v = 0; v < agent_.entities.size(); ++v)
                if (!agent_.entities[v].control.atomic && !blocked(Place::entity(v)))
                    free_places.push_back(Place::entity(v));
        }

        Match m;
        m.entities = image_;
        m.sites.assign(pat_.sites.size(), {});
        m.regions.assign(pat_.regions, Place::region(0));
        for (std::size_t r = 0; r < pat_.regions; ++r)
            if (host_[r])
                m.regions[r] = *host_[r];
        m.bindings = binding_;
        distribute(m, groups, 0, empty_regions, free_places);
    }

    void solve_links(std::size_t t, std::vector<std::optional<std::size_t>>& f, std::vector<std::size_t>& owner,
                     std::vector<std::vector<char>>& taken)
    {
        if (t == slots_.size()) {
            link_maps_.insert(f);
            return;
        }
        const auto [u, j] = slots_[t];
        const std::size_t l = pat_.entities[u].ports[j];
        const bool closed = !pat_.links[l].name;
        const auto& aports = agent_.entities[image_[u]].ports;
        std::vector<std::size_t> tried;
        for (std::size_t q = 0; q < aports.size(); ++q) {
            if (taken[u][q])
                continue;
            const std::size_t a = aports[q];
            if (std::find(tried.begin(), tried.end(), a) != tried.end())
                continue;
            tried.push_back(a);
            bool fresh = false;
            if (f[l]) {
                if (*f[l] != a)
                    continue;
            } else {
                if (owner[a] != no_link)
                    continue;
                if (closed && (agent_.links[a].name || agent_port_count_[a] != pattern_port_count_[l]))
                    continue;
                f[l] = a;
                owner[a] = l;
                fresh = true;
            }
            taken[u][q] = 1;
            solve_links(t + 1, f, owner, taken);
            taken[u][q] = 0;
            if (fresh) {
                f[l].reset();
                owner[a] = no_link;
            }
        }
    }

    // Spreads each matched entity's unmatched children over its sites.
    void distribute(Match& m, const std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>>& groups,
                    std::size_t g, const std::vector<std::size_t>& empty_regions,
                    const std::vector<Place>& free_places)
    {
        if (done())
            return;
        if (g == groups.size()) {
            place_empty(m, empty_regions, 0, free_places);
            return;
        }
        const auto& [holes, rest] = groups[g];
        if (holes.size() == 1) {
            m.sites[holes[0]] = rest;
            distribute(m, groups, g + 1, empty_regions, free_places);
            return;
        }
        std::vector<std::size_t> pick(rest.size(), 0);
        while (true) {
            for (auto s : holes)
                m.sites[s].clear();
            for (std::size_t i = 0; i < rest.size(); ++i)
                m.sites[holes[pick[i]]].push_back(rest[i]);
            distribute(m, groups, g + 1, empty_regions, free_places);
            if (done())
                return;
            std::size_t i = 0;
            while (i < pick.size() && ++pick[i] == holes.size())
                pick[i++] = 0;
            if (i == pick.size())
                return;
        }
    }

    void place_empty(Match& m, const std::vector<std::size_t>& empty_regions, std::size_t k,
                     const std::vector<Place>& free_places)
    {
        if (done())
            return;
        if (k == empty_regions.size()) {
            for (const auto& f : link_maps_) {
                m.links = f;
                out_.push_back(m);
                if (done())
                    return;
            }
            return;
        }
        for (const auto& p : free_places) {
            m.regions[empty_regions[k]] = p;
            place_empty(m, empty_regions, k + 1, free_places);
        }
    }

    const Bigraph& agent_;
    const Bigraph& pat_;
    const ParamPattern* pp_;
    std::size_t limit_;
    Forest af_;
    Forest pf_;
    std::unordered_map<std::string, std::vector<std::size_t>> by_control_;
    std::vector<std::size_t> agent_port_count_;
    std::vector<std::size_t> pattern_port_count_;
    std::vector<std::size_t> order_;
    std::vector<std::size_t> image_;
    std::vector<bool> used_;
    std::vector<std::optional<Place>> host_;
    std::vector<std::optional<std::int64_t>> binding_;
    std::vector<std::pair<std::size_t, std::size_t>> slots_;
    std::set<std::vector<std::optional<std::size_t>>> link_maps_;
    std::vector<Match> out_;
};

} // namespace

std::vector<Match> occurrences(const Bigraph& agent, const Bigraph& pattern, const ParamPattern* params,
                               std::size_t limit)
{
    return Matcher(agent, pattern, params, limit).run();
}

bool occurs(const Bigraph& agent, const Bigraph& pattern, const ParamPattern* params)
{
    return !occurrences(agent, pattern, params, 1).empty();
}

std::vector<bool> covered_entities(const Bigraph& agent, const Match& m)
{
    std::vector<bool> in(agent.entities.size(), false);
    for (auto v : m.entities)
        in[v] = true;
    std::vector<bool> site_root(agent.entities.size(), false);
    for (const auto& s : m.sites)
        for (auto v : s)
            site_root[v] = true;
    for (std::size_t v = 0; v < agent.entities.size(); ++v) {
        Place p = Place::entity(v);
        while (p.is_entity()) {
            if (site_root[p.index]) {
                in[v] = true;
                break;
            }
            p = agent.entities[p.index].parent;
        }
    }
    return in;
}

} // namespace tickgraph

namespace tickgraph {

bool is_occurrence(const Bigraph& agent, const Bigraph& pattern, const Match& m)
{
    const std::size_t n = pattern.entities.size();
    if (m.entities.size() != n || m.links.size() != pattern.links.size() || m.sites.size() != pattern.sites.size() ||
        m.regions.size() != pattern.regions || !agent.sites.empty())
        return false;
    std::vector<bool> used(agent.entities.size(), false);
    for (auto v : m.entities) {
        if (v >= agent.entities.size() || used[v])
            return false;
        used[v] = true;
    }
    auto blocked = [&](Place p) {
        while (p.is_entity()) {
            if (p.index >= agent.entities.size() || used[p.index])
                return true;
            p = agent.entities[p.index].parent;
        }
        return p.index >= agent.regions;
    };
    for (const auto& r : m.regions)
        if (blocked(r))
            return false;

    const Forest af(agent);
    const Forest pf(pattern);
    for (std::size_t u = 0; u < n; ++u) {
        const Entity& p = pattern.entities[u];
        const Entity& a = agent.entities[m.entities[u]];
        if (!(p.control == a.control) || p.param != a.param)
            return false;
        const Place want = p.parent.is_entity() ? Place::entity(m.entities[p.parent.index]) : m.regions[p.parent.index];
        if (a.parent != want)
            return false;
        std::vector<std::size_t> expect;
        for (auto c : pf.entity_children[u])
            expect.push_back(m.entities[c]);
        for (auto s : pf.entity_sites[u])
            expect.insert(expect.end(), m.sites[s].begin(), m.sites[s].end());
        std::vector<std::size_t> have = af.entity_children[m.entities[u]];
        std::sort(expect.begin(), expect.end());
        std::sort(have.begin(), have.end());
        if (expect != have)
            return false;
    }
    for (std::size_t s = 0; s < pattern.sites.size(); ++s)
        if (pattern.sites[s].is_region() && !m.sites[s].empty())
            return false;

    std::vector<std::size_t> agent_ports(agent.links.size(), 0);
    for (const auto& e : agent.entities)
        for (auto l : e.ports)
            ++agent_ports[l];
    std::vector<std::size_t> pattern_ports(pattern.links.size(), 0);
    for (const auto& e : pattern.entities)
        for (auto l : e.ports)
            ++pattern_ports[l];
    std::vector<bool> image(agent.links.size(), false);
    for (std::size_t l = 0; l < pattern.links.size(); ++l) {
        if (!pattern_ports[l]) {
            if (m.links[l])
                return false;
            continue;
        }
        if (!m.links[l] || *m.links[l] >= agent.links.size() || image[*m.links[l]])
            return false;
        image[*m.links[l]] = true;
        if (!pattern.links[l].name && (agent.links[*m.links[l]].name || agent_ports[*m.links[l]] != pattern_ports[l]))
            return false;
    }
    for (std::size_t u = 0; u < n; ++u) {
        std::vector<std::size_t> want;
        for (auto l : pattern.entities[u].ports)
            want.push_back(*m.links[l]);
        auto have = agent.entities[m.entities[u]].ports;
        std::sort(want.begin(), want.end());
        std::sort(have.begin(), have.end());
        if (want != have)
            return false;
    }
    return true;
}

} // namespace tickgraph
