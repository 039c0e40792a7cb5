#include "tickgraph/mdp.hpp"

#include <atomic>
#include <bit>
#include <cstdio>
#include <exception>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "tickgraph/error.hpp"

namespace tickgraph {

std::size_t Mdp::choice_count() const
{
    std::size_t n = 0;
    for (const auto& s : states)
        n += s.choices.size();
    return n;
}

std::size_t Mdp::transition_count() const
{
    std::size_t n = 0;
    for (const auto& s : states)
        for (const auto& c : s.choices)
            n += c.distribution.size();
    return n;
}

std::size_t Mdp::deadlock_count() const
{
    std::size_t n = 0;
    for (const auto& s : states)
        n += s.deadlock ? 1 : 0;
    return n;
}

std::optional<std::size_t> Mdp::find_action(std::string_view name) const
{
    for (std::size_t a = 0; a < actions.size(); ++a)
        if (actions[a] == name)
            return a;
    return std::nullopt;
}

namespace {

struct Expansion {
    struct Action {
        std::size_t action;
        std::vector<Successor> successors;
    };
    std::vector<Action> actions;
    std::exception_ptr error;
};

Expansion expand_state(const Bigraph& state, const ReactiveSystem& system)
{
    Expansion out;
    try {
        for (const auto& group : enabled_outcomes(state, system))
            out.actions.push_back({group.action, action_distribution(state, group.outcomes)});
    } catch (...) {
        out.error = std::current_exception();
    }
    return out;
}

} // namespace

Mdp explore(const ReactiveSystem& system, const ExploreLimits& limits)
{
    if (limits.max_states < 1)
        throw std::invalid_argument("max_states must be at least 1");
    Mdp mdp;
    for (const auto& [name, _] : system.actions().actions)
        mdp.actions.push_back(name);

    std::unordered_map<CanonicalForm, std::size_t, CanonicalFormHash> index;
    auto add = [&](CanonicalForm form, std::size_t depth, std::size_t frontier) {
        auto [it, fresh] = index.emplace(form, mdp.states.size());
        if (!fresh)
            return it->second;
        if (mdp.states.size() >= limits.max_states)
            throw BudgetExceeded(mdp.states.size(), frontier);
        MdpState s;
        s.bigraph = decode(form);
        s.form = std::move(form);
        s.depth = depth;
        mdp.states.push_back(std::move(s));
        return it->second;
    };
    add(canonical_form(system.initial()), 0, 0);

    const unsigned jobs = std::max(1u, limits.jobs);
    const std::size_t batch_size = 64 * static_cast<std::size_t>(jobs);
    std::size_t next = 0;
    while (next < mdp.states.size()) {
        const std::size_t end = std::min(mdp.states.size(), next + batch_size);
        std::vector<Expansion> results(end - next);
        auto work = [&](std::size_t i) {
            const MdpState& s = mdp.states[next + i];
            if (limits.max_depth && s.depth >= *limits.max_depth)
                return;
            results[i] = expand_state(s.bigraph, system);
        };
        if (jobs > 1 && results.size() > 1) {
            std::atomic<std::size_t> cursor{0};
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < std::min<std::size_t>(jobs, results.size()); ++t)
                pool.emplace_back([&] {
                    for (std::size_t i; (i = cursor.fetch_add(1)) < results.size();)
                        work(i);
                });
            for (auto& t : pool)
                t.join();
        } else {
            for (std::size_t i = 0; i < results.size(); ++i)
                work(i);
        }

        // Serial insertion keeps numbering independent of the thread count.
        for (std::size_t i = 0; i < results.size(); ++i) {
            const std::size_t id = next + i;
            if (results[i].error)
                std::rethrow_exception(results[i].error);
            if (limits.max_depth && mdp.states[id].depth >= *limits.max_depth) {
                mdp.states[id].expanded = false;
                continue;
            }
            std::vector<Choice> choices;
            for (auto& a : results[i].actions) {
                Choice c{a.action, {}};
                for (auto& succ : a.successors) {
                    const std::size_t frontier = mdp.states.size() - id - 1;
                    const std::size_t target = add(std::move(succ.form), mdp.states[id].depth + 1, frontier);
                    c.distribution.push_back({target, succ.probability, std::move(succ.rules)});
                }
                choices.push_back(std::move(c));
            }
            mdp.states[id].choices = std::move(choices);
            mdp.states[id].deadlock = mdp.states[id].choices.empty();
        }
        next = end;
    }

    if (limits.fix_deadlocks && mdp.deadlock_count() > 0) {
        const std::size_t stall = mdp.actions.size();
        mdp.actions.emplace_back(stall_action);
        for (std::size_t i = 0; i < mdp.states.size(); ++i)
            if (mdp.states[i].deadlock)
                mdp.states[i].choices.push_back({stall, {{i, 1.0, {}}}});
    }
    return mdp;
}

std::string format_probability(double p)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", p);
    return buf;
}

PrismFiles export_prism(const Mdp& mdp)
{
    PrismFiles out;
    std::string& tra = out.tra;
    tra = std::to_string(mdp.states.size()) + " " + std::to_string(mdp.choice_count()) + " " +
          std::to_string(mdp.transition_count()) + "\n";
    for (std::size_t s = 0; s < mdp.states.size(); ++s) {
        const auto& choices = mdp.states[s].choices;
        for (std::size_t c = 0; c < choices.size(); ++c)
            for (const auto& t : choices[c].distribution)
                tra += std::to_string(s) + " " + std::to_string(c) + " " + std::to_string(t.target) + " " +
                       format_probability(t.probability) + " " + mdp.actions[choices[c].action] + "\n";
    }

    std::string& lab = out.lab;
    lab = "0=\"init\" 1=\"deadlock\"";
    for (std::size_t i = 0; i < mdp.label_names.size(); ++i)
        lab += " " + std::to_string(i + 2) + "=\"" + mdp.label_names[i] + "\"";
    lab += "\n";
    for (std::size_t s = 0; s < mdp.states.size(); ++s) {
        std::vector<std::size_t> ids;
        if (s == 0)
            ids.push_back(0);
        if (mdp.states[s].deadlock)
            ids.push_back(1);
        if (s < mdp.labels.size())
            for (auto l : mdp.labels[s])
                ids.push_back(l + 2);
        if (ids.empty())
            continue;
        lab += std::to_string(s) + ":";
        for (auto id : ids)
            lab += " " + std::to_string(id);
        lab += "\n";
    }

    out.sta = "(state)\n";
    for (std::size_t s = 0; s < mdp.states.size(); ++s)
        out.sta += std::to_string(s) + ":(" + std::to_string(s) + ")\n";
    return out;
}

std::string export_dot(const Mdp& mdp)
{
    std::string out = "digraph mdp {\n  node [shape=ellipse];\n";
    for (std::size_t s = 0; s < mdp.states.size(); ++s) {
        std::string label = std::to_string(s);
        std::vector<std::string> names;
        if (s == 0)
            names.push_back("init");
        if (mdp.states[s].deadlock)
            names.push_back("deadlock");
        if (s < mdp.labels.size())
            for (auto l : mdp.labels[s])
                names.push_back(mdp.label_names[l]);
        for (std::size_t i = 0; i < names.size(); ++i)
            label += (i ? ", " : "\\n") + names[i];
        out += "  s" + std::to_string(s) + " [label=\"" + label + "\"];\n";
    }
    for (std::size_t s = 0; s < mdp.states.size(); ++s) {
        const auto& choices = mdp.states[s].choices;
        for (std::size_t c = 0; c < choices.size(); ++c) {
            const std::string node = "c" + std::to_string(s) + "_" + std::to_string(c);
            out += "  " + node + " [shape=point];\n";
            out += "  s" + std::to_string(s) + " -> " + node + " [label=\"" + mdp.actions[choices[c].action] +
                   "\", arrowhead=none];\n";
            for (const auto& t : choices[c].distribution)
                out += "  " + node + " -> s" + std::to_string(t.target) + " [label=\"" +
                       format_probability(t.probability) + "\"];\n";
        }
    }
    out += "}\n";
    return out;
}

TraFile parse_tra(std::string_view text)
{
    TraFile f;
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument(".tra: missing header");
    {
        std::istringstream h(line);
        if (!(h >> f.states >> f.choices >> f.transitions))
            throw std::invalid_argument(".tra: malformed header");
    }
    std::size_t n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty())
            continue;
        std::istringstream r(line);
        TraRow row;
        std::string prob;
        if (!(r >> row.src >> row.choice >> row.dst >> prob))
            throw std::invalid_argument(".tra line " + std::to_string(n) + ": malformed row");
        char* end = nullptr;
        row.probability = std::strtod(prob.c_str(), &end);
        if (end == prob.c_str() || *end)
            throw std::invalid_argument(".tra line " + std::to_string(n) + ": bad probability");
        r >> row.action;
        f.rows.push_back(std::move(row));
    }
    if (f.rows.size() != f.transitions)
        throw std::invalid_argument(".tra: header announces " + std::to_string(f.transitions) +
                                    " transitions but the file has " + std::to_string(f.rows.size()));
    return f;
}

namespace {

constexpr std::string_view cache_magic = "TGMDPC";
constexpr std::uint32_t cache_version = 1;

class Out {
public:
    void u64(std::uint64_t v)
    {
        for (int i = 0; i < 8; ++i)
            bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void u32(std::uint32_t v)
    {
        for (int i = 0; i < 4; ++i)
            bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void u8(std::uint8_t v) { bytes.push_back(static_cast<char>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(std::string_view s)
    {
        u64(s.size());
        bytes.append(s);
    }
    std::string bytes;
};

class In {
public:
    explicit In(std::string_view b) : b_(b) {}
    std::uint64_t u64()
    {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }
    std::uint32_t u32()
    {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint8_t u8()
    {
        need(1);
        return static_cast<std::uint8_t>(b_[pos_++]);
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str()
    {
        const auto n = u64();
        need(n);
        std::string s(b_.substr(pos_, n));
        pos_ += n;
        return s;
    }
    std::string_view raw(std::size_t n)
    {
        need(n);
        auto s = b_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t count()
    {
        const auto n = u64();
        if (n > b_.size())
            throw std::invalid_argument("cache: implausible count");
        return static_cast<std::size_t>(n);
    }
    bool at_end() const { return pos_ == b_.size(); }

private:
    void need(std::uint64_t n) const
    {
        if (n > b_.size() - pos_)
            throw std::invalid_argument("cache: truncated");
    }
    std::string_view b_;
    std::size_t pos_ = 0;
};

} // namespace

std::string serialize(const Mdp& mdp, std::uint64_t key)
{
    Out o;
    o.bytes.append(cache_magic);
    o.u32(cache_version);
    o.u64(key);
    o.u64(mdp.actions.size());
    for (const auto& a : mdp.actions)
        o.str(a);
    o.u64(mdp.states.size());
    for (const auto& s : mdp.states) {
        o.str(s.form.bytes());
        o.u64(s.form.digest());
        o.u64(s.depth);
        o.u8(static_cast<std::uint8_t>((s.deadlock ? 1 : 0) | (s.expanded ? 2 : 0)));
        o.u64(s.choices.size());
        for (const auto& c : s.choices) {
            o.u64(c.action);
            o.u64(c.distribution.size());
            for (const auto& t : c.distribution) {
                o.u64(t.target);
                o.f64(t.probability);
                o.u64(t.rules.size());
                for (const auto& r : t.rules)
                    o.str(r);
            }
        }
    }
    return std::move(o.bytes);
}

std::optional<Mdp> deserialize(std::string_view bytes, std::uint64_t key)
{
    if (bytes.substr(0, cache_magic.size()) != cache_magic)
        throw std::invalid_argument("cache: bad magic");
    In in(bytes.substr(cache_magic.size()));
    if (in.u32() != cache_version || in.u64() != key)
        return std::nullopt;
    Mdp mdp;
    const auto actions = in.count();
    for (std::size_t a = 0; a < actions; ++a)
        mdp.actions.push_back(in.str());
    const auto states = in.count();
    for (std::size_t i = 0; i < states; ++i) {
        MdpState s;
        s.form = CanonicalForm(in.str());
        if (in.u64() != s.form.digest())
            throw std::invalid_argument("cache: digest mismatch in state " + std::to_string(i));
        s.bigraph = decode(s.form);
        s.depth = in.u64();
        const auto flags = in.u8();
        s.deadlock = flags & 1;
        s.expanded = flags & 2;
        const auto choices = in.count();
        for (std::size_t c = 0; c < choices; ++c) {
            Choice ch;
            ch.action = in.u64();
            if (ch.action >= mdp.actions.size())
                throw std::invalid_argument("cache: bad action index");
            const auto n = in.count();
            for (std::size_t t = 0; t < n; ++t) {
                Transition tr;
                tr.target = in.u64();
                if (tr.target >= states)
                    throw std::invalid_argument("cache: bad target");
                tr.probability = in.f64();
                const auto rules = in.count();
                for (std::size_t r = 0; r < rules; ++r)
                    tr.rules.push_back(in.str());
                ch.distribution.push_back(std::move(tr));
            }
            s.choices.push_back(std::move(ch));
        }
        mdp.states.push_back(std::move(s));
    }
    if (!in.at_end())
        throw std::invalid_argument("cache: trailing bytes");
    return mdp;
}

Trace simulate(const ReactiveSystem& system, std::uint64_t seed, std::size_t steps)
{
    std::mt19937_64 rng(seed);
    auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    Trace trace;
    Bigraph state = decode(canonical_form(system.initial()));
    for (std::size_t step = 0; step < steps; ++step) {
        auto groups = enabled_outcomes(state, system);
        if (groups.empty()) {
            trace.deadlock_at = step;
            break;
        }
        const auto pick = std::min(groups.size() - 1, static_cast<std::size_t>(uniform() * groups.size()));
        const auto& group = groups[pick];
        auto dist = action_distribution(state, group.outcomes);
        const double u = uniform();
        double acc = 0.0;
        std::size_t chosen = dist.size() - 1;
        for (std::size_t i = 0; i < dist.size(); ++i) {
            acc += dist[i].probability;
            if (u < acc) {
                chosen = i;
                break;
            }
        }
        Successor& next = dist[chosen];
        trace.steps.push_back({step, system.actions().actions[group.action].first, next.rules.front(),
                               next.form.digest()});
        state = decode(next.form);
    }
    return trace;
}

} // namespace tickgraph
