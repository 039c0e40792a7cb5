#include "tickgraph/clocks.hpp"

#include <algorithm>
#include <set>

#include "tickgraph/error.hpp"

namespace tickgraph {

namespace {

[[noreturn]] void bad_config(const std::string& what)
{
    throw ConstructionError(ConstructionError::Kind::invalid_config, what);
}

ParamBigraph merge_all(const std::vector<ParamBigraph>& parts)
{
    ParamBigraph out(one());
    for (const auto& p : parts)
        out = merge(out, p);
    return out;
}

// Local clocks (optionally in their container) followed by GC, one region.
ParamBigraph clock_region(const ClockConfig& cfg, const std::vector<IntExpr>& local, const IntExpr* global)
{
    std::vector<ParamBigraph> clocks;
    for (std::size_t i = 0; i < local.size(); ++i) {
        const std::string names[] = {cfg.timed[i].link};
        clocks.push_back(ion(cfg.local_clock(), local[i], names));
    }
    std::vector<ParamBigraph> parts;
    if (!cfg.container.empty() && !local.empty())
        parts.push_back(nest(ParamBigraph(ion(cfg.container_control(), std::nullopt, {})), merge_all(clocks)));
    else
        parts = clocks;
    if (global)
        parts.push_back(ion(cfg.global_clock_control(), *global, {}));
    return merge_all(parts);
}

} // namespace

void ClockConfig::check() const
{
    if (max_time < 1)
        bad_config("max_time must be at least 1");
    if (tick_step < 1)
        bad_config("tick_step must be at least 1");
    std::set<std::string> links;
    for (const auto& t : timed)
        if (!links.insert(t.link).second)
            bad_config("clock link " + t.link + " is used twice");
    if (local_control.empty() || global_control.empty())
        bad_config("clock controls need names");
}

std::vector<std::int64_t> ClockConfig::advance_domain() const
{
    std::vector<std::int64_t> out;
    for (std::int64_t v = 0; v <= max_time - tick_step; v += tick_step)
        out.push_back(v);
    return out;
}

Bigraph build_clock_perspective(const Bigraph& system, const ClockConfig& cfg)
{
    cfg.check();
    for (const auto& t : cfg.timed) {
        auto l = system.find_outer(t.link);
        const bool reserved = l && std::any_of(system.entities.begin(), system.entities.end(), [&](const Entity& e) {
                                  return e.control.name == t.control &&
                                         std::find(e.ports.begin(), e.ports.end(), *l) != e.ports.end();
                              });
        if (!reserved)
            bad_config("timed entity " + t.control + " has no port on clock link " + t.link);
    }
    std::vector<IntExpr> zeros(cfg.timed.size(), IntExpr::literal(0));
    const IntExpr zero = IntExpr::literal(0);
    Bigraph out = parallel(system, clock_region(cfg, zeros, cfg.global_clock ? &zero : nullptr).shape);
    for (const auto& t : cfg.timed)
        out = close(t.link, out);
    return out;
}

RuleFamily gen_clock_advance(const ClockConfig& cfg)
{
    cfg.check();
    const std::size_t k = cfg.timed.size();
    if (k == 0 && !cfg.global_clock)
        bad_config("clock_advance needs at least one clock");
    auto rule = std::make_shared<RuleTemplate>();
    rule->name = "clock_advance";
    for (std::size_t i = 0; i < k; ++i)
        rule->params.push_back(k == 1 && !cfg.global_clock ? "n" : "n" + std::to_string(i + 1));
    if (cfg.global_clock)
        rule->params.push_back("n");

    std::vector<IntExpr> before, after;
    for (std::size_t i = 0; i < k; ++i) {
        before.push_back(IntExpr::variable(i, rule->params[i]));
        after.push_back(IntExpr::binary(IntExpr::Op::add, before.back(), IntExpr::literal(cfg.tick_step)));
    }
    std::optional<IntExpr> g_before, g_after;
    if (cfg.global_clock) {
        g_before = IntExpr::variable(k, "n");
        g_after = IntExpr::binary(IntExpr::Op::add, *g_before, IntExpr::literal(cfg.tick_step));
    }
    rule->redex = clock_region(cfg, before, g_before ? &*g_before : nullptr);
    rule->reactum = clock_region(cfg, after, g_after ? &*g_after : nullptr);
    rule->weight = 1.0;
    check_template(*rule);
    return RuleFamily{rule, std::vector<std::vector<std::int64_t>>(rule->params.size(), cfg.advance_domain())};
}

RuleFamily timed_rule(const RuleFamily& base, const std::string& clock_link, std::vector<std::int64_t> domain,
                      bool reset, const Control& clock, bool close_link)
{
    const RuleTemplate& b = *base.rule;
    if (domain.empty())
        throw RewriteError(RewriteError::Kind::empty_domain, "timed rule " + b.name + ": empty clock domain");
    if (!b.redex.shape.find_outer(clock_link) || !b.reactum.shape.find_outer(clock_link))
        throw RewriteError(RewriteError::Kind::invalid_rule,
                           "timed rule " + b.name + ": no clock port on link " + clock_link);
    if (clock.arity != 1 || !clock.atomic || !clock.parameterised)
        throw RewriteError(RewriteError::Kind::invalid_rule, "clock control " + clock.name + " must be atomic, "
                                                             "parameterised and of arity 1");
    auto rule = std::make_shared<RuleTemplate>(b);
    std::string var = "n";
    while (std::find(b.params.begin(), b.params.end(), var) != b.params.end())
        var += "_clock";
    rule->params.push_back(var);
    const IntExpr n = IntExpr::variable(b.params.size(), var);
    const std::string names[] = {clock_link};
    const ParamBigraph before = ion(clock, n, names);
    const ParamBigraph after = reset ? ParamBigraph(ion(clock, 0, names)) : before;
    rule->redex = parallel(b.redex, before);
    rule->reactum = parallel(b.reactum, after);
    if (close_link) {
        rule->redex = close(clock_link, rule->redex);
        rule->reactum = close(clock_link, rule->reactum);
    }
    // The clock adds one region; sites keep their numbering.
    check_template(*rule);
    std::sort(domain.begin(), domain.end());
    domain.erase(std::unique(domain.begin(), domain.end()), domain.end());
    RuleFamily out{rule, base.domains};
    out.domains.push_back(std::move(domain));
    return out;
}

PrioritySpec encode_invariant(const RuleFamily& timed, const GuardSpec& guard, const ClockConfig& cfg)
{
    cfg.check();
    const std::string& name = timed.base_name();
    if (timed.domains.empty())
        throw RewriteError(RewriteError::Kind::invalid_rule, "rule " + name + " has no clock parameter");
    if (guard.lower > guard.upper || guard.lower < 0 || guard.upper > cfg.max_time)
        throw RewriteError(RewriteError::Kind::invalid_rule, "guard of " + name + " is not an interval in [0, maxT]");
    if (guard.lower % cfg.tick_step || guard.upper % cfg.tick_step)
        throw RewriteError(RewriteError::Kind::invalid_rule,
                           "guard bounds of " + name + " must be multiples of the tick step " +
                               std::to_string(cfg.tick_step));
    const auto& clock_domain = timed.domains.back();
    auto slice = [&](std::int64_t lo, std::int64_t hi) {
        RuleFamily f = timed;
        auto& d = f.domains.back();
        d.clear();
        for (auto v : clock_domain)
            if (v >= lo && v <= hi)
                d.push_back(v);
        return f;
    };
    PrioritySpec out;
    out.classes.resize(2);
    out.classes[1].push_back(gen_clock_advance(cfg));
    if (guard.deadline) {
        if (!std::binary_search(clock_domain.begin(), clock_domain.end(), guard.upper))
            throw RewriteError(RewriteError::Kind::invalid_rule,
                               "deadline instance " + instance_name(name, {&guard.upper, 1}) + " is missing");
        out.classes[0].push_back(slice(guard.upper, guard.upper));
        auto low = slice(guard.lower, guard.upper - 1);
        if (!low.domains.back().empty())
            out.classes[1].push_back(std::move(low));
    } else {
        auto all = slice(guard.lower, guard.upper);
        if (!all.domains.back().empty())
            out.classes[1].push_back(std::move(all));
    }
    return out;
}

PrioritySpec combine(std::span<const PrioritySpec> fragments)
{
    PrioritySpec out;
    for (const auto& f : fragments) {
        if (out.classes.size() < f.classes.size())
            out.classes.resize(f.classes.size());
        for (std::size_t c = 0; c < f.classes.size(); ++c)
            for (const auto& fam : f.classes[c]) {
                auto& dst = out.classes[c];
                const bool seen = std::any_of(dst.begin(), dst.end(), [&](const RuleFamily& g) {
                    return g.base_name() == fam.base_name() && g.domains == fam.domains;
                });
                if (!seen)
                    dst.push_back(fam);
            }
    }
    return out;
}

} // namespace tickgraph
