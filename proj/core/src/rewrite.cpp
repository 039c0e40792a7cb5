#include "tickgraph/rewrite.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>
#include <unordered_map>

#include "tickgraph/error.hpp"

namespace tickgraph {

namespace {

[[noreturn]] void invalid(const std::string& rule, const std::string& what)
{
    throw RewriteError(RewriteError::Kind::invalid_rule, "rule " + rule + ": " + what);
}

// Calls fn(valuation) for every valuation in lexicographic order.
template <class Fn>
void for_each_valuation(const std::vector<std::vector<std::int64_t>>& domains, Fn&& fn)
{
    for (const auto& d : domains)
        if (d.empty())
            return;
    std::vector<std::size_t> at(domains.size(), 0);
    std::vector<std::int64_t> val(domains.size());
    while (true) {
        for (std::size_t i = 0; i < domains.size(); ++i)
            val[i] = domains[i][at[i]];
        fn(std::as_const(val));
        std::size_t i = domains.size();
        while (i > 0) {
            --i;
            if (++at[i] < domains[i].size())
                break;
            at[i] = 0;
            if (i == 0)
                return;
        }
        if (domains.empty())
            return;
    }
}

bool intersects(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b)
{
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j])
            return true;
        if (a[i] < b[j])
            ++i;
        else
            ++j;
    }
    return false;
}

// Drops closed links without ports or inner names and renumbers the rest.
void compact_links(Bigraph& b)
{
    std::vector<bool> used(b.links.size(), false);
    for (const auto& e : b.entities)
        for (auto p : e.ports)
            used[p] = true;
    for (const auto& [_, l] : b.inner)
        used[l] = true;
    std::vector<std::size_t> remap(b.links.size(), no_link);
    std::vector<Link> kept;
    for (std::size_t i = 0; i < b.links.size(); ++i) {
        if (!used[i] && !b.links[i].name)
            continue;
        remap[i] = kept.size();
        kept.push_back(b.links[i]);
    }
    for (auto& e : b.entities)
        for (auto& p : e.ports)
            p = remap[p];
    for (auto& [_, l] : b.inner)
        l = remap[l];
    b.links = std::move(kept);
}

} // namespace

std::uint64_t RuleFamily::size() const
{
    std::uint64_t n = 1;
    for (const auto& d : domains) {
        if (d.empty())
            return 0;
        if (n > UINT64_MAX / d.size())
            return UINT64_MAX;
        n *= d.size();
    }
    return n;
}

void check_template(const RuleTemplate& t)
{
    if (!(t.weight > 0.0) || !std::isfinite(t.weight))
        invalid(t.name, "weight must be positive");
    const Bigraph& l = t.redex.shape;
    const Bigraph& r = t.reactum.shape;
    if (l.regions != r.regions)
        invalid(t.name, "redex has " + std::to_string(l.regions) + " regions but reactum has " +
                            std::to_string(r.regions));
    if (l.outer_names() != r.outer_names())
        invalid(t.name, "redex and reactum have different outer names");
    if (!l.inner.empty() || !r.inner.empty())
        invalid(t.name, "rules may not have inner names");
    if (t.site_map.empty()) {
        if (l.sites.size() != r.sites.size())
            invalid(t.name, "redex has " + std::to_string(l.sites.size()) + " sites but reactum has " +
                                std::to_string(r.sites.size()));
    } else {
        if (t.site_map.size() != r.sites.size() || l.sites.size() != r.sites.size())
            invalid(t.name, "site map must be a bijection");
        std::vector<bool> hit(l.sites.size(), false);
        for (auto s : t.site_map) {
            if (s >= l.sites.size() || hit[s])
                invalid(t.name, "site map must be a bijection");
            hit[s] = true;
        }
    }
    for (const auto& v : validate(l))
        invalid(t.name, "redex: " + v.subject + ": " + v.message);
    for (const auto& v : validate(r))
        invalid(t.name, "reactum: " + v.subject + ": " + v.message);
    for (const auto& e : t.redex.params) {
        if (!e)
            continue;
        if (!e->as_variable() && !e->as_constant())
            invalid(t.name, "arithmetic is not allowed in a redex (" + e->to_string() + ")");
        if (auto x = e->as_variable(); x && *x >= t.params.size())
            invalid(t.name, "unknown parameter in redex");
    }
    std::vector<std::int64_t> probe(t.params.size(), 0);
    for (const auto& e : t.reactum.params)
        if (e)
            try {
                (void)e->eval(probe);
            } catch (const std::out_of_range&) {
                invalid(t.name, "unknown parameter in reactum");
            }
    if (t.condition && !validate(t.condition->pattern).empty())
        invalid(t.name, "invalid condition pattern");
}

std::string instance_name(const std::string& base, std::span<const std::int64_t> valuation)
{
    if (valuation.empty())
        return base;
    std::string out = base + "(";
    for (std::size_t i = 0; i < valuation.size(); ++i)
        out += (i ? "," : "") + std::to_string(valuation[i]);
    return out + ")";
}

ReactionRule instantiate(const RuleTemplate& t, std::span<const std::int64_t> valuation)
{
    ReactionRule r;
    r.name = instance_name(t.name, valuation);
    r.base = t.name;
    r.redex = t.redex.instantiate(valuation);
    r.reactum = t.reactum.instantiate(valuation);
    r.weight = t.weight;
    r.condition = t.condition;
    r.site_map = t.site_map;
    return r;
}

std::vector<ReactionRule> expand(const RuleFamily& family)
{
    const RuleTemplate& t = *family.rule;
    if (family.domains.size() != t.params.size())
        invalid(t.name, "expected " + std::to_string(t.params.size()) + " parameter domains, got " +
                            std::to_string(family.domains.size()));
    for (std::size_t i = 0; i < family.domains.size(); ++i)
        if (family.domains[i].empty())
            throw RewriteError(RewriteError::Kind::empty_domain,
                               "rule " + t.name + ": parameter " + t.params[i] + " has an empty domain");
    std::vector<ReactionRule> out;
    for_each_valuation(family.domains, [&](const std::vector<std::int64_t>& v) { out.push_back(instantiate(t, v)); });
    return out;
}

bool condition_holds(const Bigraph& agent, const NegativeCondition& condition, const Match& m)
{
    const auto covered = covered_entities(agent, m);
    for (const auto& occ : occurrences(agent, condition.pattern)) {
        const bool outside =
            std::none_of(occ.entities.begin(), occ.entities.end(), [&](std::size_t v) { return covered[v]; });
        if (outside)
            return false;
    }
    return true;
}

Bigraph apply(const Bigraph& agent, const ReactionRule& rule, const Match& m)
{
    if (!is_occurrence(agent, rule.redex, m))
        throw RewriteError(RewriteError::Kind::stale_match, "rule " + rule.name + ": match is not an occurrence");
    if (rule.condition && !condition_holds(agent, *rule.condition, m))
        throw RewriteError(RewriteError::Kind::condition_violated, "rule " + rule.name + ": condition violated");

    const Bigraph& reactum = rule.reactum;
    std::vector<bool> matched(agent.entities.size(), false);
    for (auto v : m.entities)
        matched[v] = true;

    Bigraph out;
    out.regions = agent.regions;
    out.links = agent.links;
    out.inner = agent.inner;
    std::vector<std::size_t> remap(agent.entities.size(), no_link);
    for (std::size_t v = 0; v < agent.entities.size(); ++v)
        if (!matched[v]) {
            remap[v] = out.entities.size();
            out.entities.push_back(agent.entities[v]);
        }
    auto host = [&](Place p) { return p.is_region() ? p : Place::entity(remap[p.index]); };
    for (auto& e : out.entities)
        if (e.parent.is_region() || !matched[e.parent.index])
            e.parent = host(e.parent);

    const std::size_t base = out.entities.size();
    auto reactum_place = [&](Place p) {
        return p.is_region() ? host(m.regions[p.index]) : Place::entity(base + p.index);
    };
    std::vector<std::size_t> link_of(reactum.links.size(), no_link);
    for (std::size_t l = 0; l < reactum.links.size(); ++l) {
        if (reactum.links[l].name)
            if (auto x = rule.redex.find_outer(*reactum.links[l].name); x && m.links[*x]) {
                link_of[l] = *m.links[*x];
                continue;
            }
        link_of[l] = out.links.size();
        out.links.push_back(Link{});
    }
    for (const auto& e : reactum.entities) {
        Entity copy = e;
        copy.parent = reactum_place(e.parent);
        for (auto& p : copy.ports)
            p = link_of[p];
        out.entities.push_back(std::move(copy));
    }
    for (std::size_t j = 0; j < reactum.sites.size(); ++j) {
        const std::size_t i = rule.site_map.empty() ? j : rule.site_map[j];
        for (auto v : m.sites.at(i))
            out.entities[remap[v]].parent = reactum_place(reactum.sites[j]);
    }
    compact_links(out);

    if (auto v = validate(out); !v.empty())
        throw RewriteError(RewriteError::Kind::invalid_result,
                           "rule " + rule.name + " produced an invalid bigraph: " + v[0].subject + ": " + v[0].message);
    return out;
}

std::optional<std::size_t> ActionMap::action_of(const std::string& base) const
{
    for (std::size_t a = 0; a < actions.size(); ++a)
        for (const auto& b : actions[a].second)
            if (b == base)
                return a;
    return std::nullopt;
}

ReactiveSystem::ReactiveSystem(Bigraph initial, PrioritySpec priorities, ActionMap actions, MatchMode mode)
    : initial_(std::move(initial)), priorities_(std::move(priorities)), actions_(std::move(actions)), mode_(mode)
{
    std::map<std::string, std::size_t> owner;
    for (std::size_t a = 0; a < actions_.actions.size(); ++a)
        for (const auto& b : actions_.actions[a].second)
            if (!owner.emplace(b, a).second)
                invalid(b, "belongs to two actions");

    std::set<std::string> used;
    std::vector<std::pair<std::size_t, const RuleFamily*>> all;
    for (std::size_t c = 0; c < priorities_.classes.size(); ++c) {
        auto& cls = priorities_.classes[c];
        action_index_.emplace_back();
        expanded_.emplace_back();
        valuations_.emplace_back();
        patterns_.emplace_back();
        for (auto& f : cls) {
            if (!f.rule)
                throw RewriteError(RewriteError::Kind::invalid_rule, "priority class holds an empty rule family");
            const RuleTemplate& t = *f.rule;
            check_template(t);
            if (f.domains.size() != t.params.size())
                invalid(t.name, "expected " + std::to_string(t.params.size()) + " parameter domains");
            for (std::size_t i = 0; i < f.domains.size(); ++i) {
                auto& d = f.domains[i];
                if (d.empty())
                    throw RewriteError(RewriteError::Kind::empty_domain,
                                       "rule " + t.name + ": parameter " + t.params[i] + " has an empty domain");
                std::sort(d.begin(), d.end());
                d.erase(std::unique(d.begin(), d.end()), d.end());
            }
            auto it = owner.find(t.name);
            if (it == owner.end())
                invalid(t.name, "belongs to no action");
            action_index_.back().push_back(it->second);
            used.insert(t.name);

            ParamPattern pp;
            pp.domains = f.domains;
            pp.entity_var.assign(t.redex.shape.entities.size(), std::nullopt);
            for (std::size_t u = 0; u < t.redex.params.size(); ++u)
                if (t.redex.params[u])
                    pp.entity_var[u] = t.redex.params[u]->as_variable();
            patterns_.back().push_back(std::move(pp));

            expanded_.back().emplace_back();
            valuations_.back().emplace_back();
            if (mode_ == MatchMode::eager)
                for_each_valuation(f.domains, [&](const std::vector<std::int64_t>& v) {
                    expanded_.back().back().push_back(instantiate(t, v));
                    valuations_.back().back().push_back(v);
                });
        }
    }
    for (std::size_t c = 0; c < priorities_.classes.size(); ++c)
        for (const auto& f : priorities_.classes[c])
            all.emplace_back(c, &f);
    for (std::size_t i = 0; i < all.size(); ++i)
        for (std::size_t j = i + 1; j < all.size(); ++j) {
            const RuleFamily& a = *all[i].second;
            const RuleFamily& b = *all[j].second;
            if (a.base_name() != b.base_name())
                continue;
            bool overlap = a.domains.size() == b.domains.size();
            for (std::size_t k = 0; overlap && k < a.domains.size(); ++k)
                overlap = intersects(a.domains[k], b.domains[k]);
            if (overlap)
                invalid(a.base_name(), "an instance appears in more than one priority class entry");
        }
    for (const auto& [name, _] : owner)
        if (!used.count(name))
            invalid(name, "is listed in an action but in no priority class");
}

std::vector<ActionOutcomes> class_outcomes(const Bigraph& agent, const ReactiveSystem& system, std::size_t cls)
{
    const auto& families = system.priorities().classes.at(cls);
    std::map<std::size_t, std::vector<Outcome>> by_action;
    for (std::size_t f = 0; f < families.size(); ++f) {
        const RuleTemplate& t = *families[f].rule;
        std::vector<Outcome> found;
        auto keep = [&](ReactionRule rule, std::vector<std::int64_t> valuation, Match m) {
            m.bindings.clear();
            if (rule.condition && !condition_holds(agent, *rule.condition, m))
                return;
            found.push_back(Outcome{std::move(rule), std::move(valuation), std::move(m)});
        };
        if (system.mode() == MatchMode::eager) {
            const auto& rules = system.expanded(cls, f);
            const auto& vals = system.valuations(cls, f);
            for (std::size_t k = 0; k < rules.size(); ++k)
                for (auto& m : occurrences(agent, rules[k].redex))
                    keep(rules[k], vals[k], std::move(m));
        } else {
            const auto& pp = system.pattern(cls, f);
            for (auto& m : occurrences(agent, t.redex.shape, &pp)) {
                std::vector<std::vector<std::int64_t>> doms = families[f].domains;
                for (std::size_t x = 0; x < doms.size(); ++x)
                    if (m.bindings[x])
                        doms[x] = {*m.bindings[x]};
                for_each_valuation(doms, [&](const std::vector<std::int64_t>& v) { keep(instantiate(t, v), v, m); });
            }
        }
        std::stable_sort(found.begin(), found.end(), [](const Outcome& a, const Outcome& b) {
            return std::tie(a.valuation, a.match) < std::tie(b.valuation, b.match);
        });
        auto& dst = by_action[system.action_of(cls, f)];
        for (auto& o : found)
            dst.push_back(std::move(o));
    }
    std::vector<ActionOutcomes> out;
    for (auto& [a, outcomes] : by_action)
        if (!outcomes.empty())
            out.push_back(ActionOutcomes{a, std::move(outcomes)});
    return out;
}

std::vector<ActionOutcomes> enabled_outcomes(const Bigraph& agent, const ReactiveSystem& system)
{
    for (std::size_t c = 0; c < system.priorities().classes.size(); ++c) {
        auto out = class_outcomes(agent, system, c);
        if (!out.empty())
            return out;
    }
    return {};
}

std::vector<Successor> action_distribution(const Bigraph& agent, std::span<const Outcome> outcomes)
{
    double total = 0.0;
    for (const auto& o : outcomes)
        total += o.rule.weight;
    std::vector<Successor> out;
    std::unordered_map<CanonicalForm, std::size_t, CanonicalFormHash> index;
    for (const auto& o : outcomes) {
        Bigraph next = apply(agent, o.rule, o.match);
        CanonicalForm form = canonical_form(next);
        auto [it, fresh] = index.emplace(form, out.size());
        if (fresh) {
            out.push_back(Successor{std::move(next), std::move(form), o.rule.weight, {o.rule.name}});
        } else {
            Successor& s = out[it->second];
            s.probability += o.rule.weight;
            if (std::find(s.rules.begin(), s.rules.end(), o.rule.name) == s.rules.end())
                s.rules.push_back(o.rule.name);
        }
    }
    // Weights are summed per target before dividing, so a single target
    // gets exactly 1.
    for (auto& s : out)
        s.probability /= total;
    return out;
}

} // namespace tickgraph
